//! Levelwise wavelet tree over the integer alphabet `[0, 2^N)`.
//!
//! Each node splits its dyadic value range at the midpoint: the smaller half
//! gets bit 0, the larger half bit 1. Level `l` therefore stores bit
//! `N - 1 - l` of every symbol, grouped by the symbol's top `l` bits. Nodes are
//! not stored explicitly; a child's extent inside the next level is derived
//! from the parent's extent with two rank queries.

use std::fmt;
use std::ops::Range;

use crate::bitvec::BitVector;
use crate::error::{fits, Error, Result};

/// Root-to-leaf sequence of bits read for one position.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct BitPath(Vec<bool>);

impl BitPath {
    pub fn new(bits: Vec<bool>) -> Self {
        Self(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Leaf-to-root reading of the same path.
    pub fn reversed(&self) -> BitPath {
        BitPath(self.0.iter().rev().copied().collect())
    }

    /// Interprets the path as an MSB-first binary number.
    ///
    /// Panics if the path is longer than 64 bits.
    pub fn to_value(&self) -> u64 {
        assert!(self.0.len() <= 64, "path longer than 64 bits");
        self.0.iter().fold(0u64, |acc, &b| (acc << 1) | b as u64)
    }
}

impl From<Vec<bool>> for BitPath {
    fn from(bits: Vec<bool>) -> Self {
        Self(bits)
    }
}

impl fmt::Display for BitPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

/// Space accounting for a built index, in bits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceStats {
    /// One bit per symbol per level.
    pub payload_bits: u64,
    /// Rank directories, word padding and any side tables.
    pub overhead_bits: u64,
    /// What the same symbols cost stored at full width.
    pub raw_bits: u64,
    /// `(payload + overhead) / raw`; zero when `raw_bits` is zero.
    pub ratio: f64,
}

impl SpaceStats {
    pub(crate) fn new(payload_bits: u64, overhead_bits: u64, raw_bits: u64) -> Self {
        let ratio = if raw_bits == 0 {
            0.0
        } else {
            (payload_bits + overhead_bits) as f64 / raw_bits as f64
        };
        Self {
            payload_bits,
            overhead_bits,
            raw_bits,
            ratio,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaveletTree {
    width: u32,
    len: usize,
    levels: Vec<BitVector>,
}

impl WaveletTree {
    /// Builds the tree for `seq` with `width` bits per symbol.
    pub fn new(seq: &[u64], width: u32) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        if let Some((position, &value)) = seq.iter().enumerate().find(|(_, &v)| !fits(v, width)) {
            return Err(Error::SymbolOutOfDomain {
                position,
                value,
                width,
            });
        }

        let mut current = seq.to_vec();
        let mut next = Vec::with_capacity(seq.len());
        let mut levels = Vec::with_capacity(width as usize);
        for level in 0..width {
            let shift = width - 1 - level;
            levels.push(BitVector::from_bits(
                current.iter().map(|&v| v >> shift & 1 == 1),
            ));
            // Stable split of every node: its zeros, then its ones. Nodes are
            // the maximal runs sharing the top `level` bits.
            next.clear();
            let mut start = 0;
            while start < current.len() {
                let node = prefix(current[start], shift + 1);
                let mut end = start + 1;
                while end < current.len() && prefix(current[end], shift + 1) == node {
                    end += 1;
                }
                let run = &current[start..end];
                next.extend(run.iter().filter(|&&v| v >> shift & 1 == 0));
                next.extend(run.iter().filter(|&&v| v >> shift & 1 == 1));
                start = end;
            }
            std::mem::swap(&mut current, &mut next);
        }

        Ok(Self {
            width,
            len: seq.len(),
            levels,
        })
    }

    /// Reassembles a tree from stored level bitvectors.
    pub fn from_levels(width: u32, len: usize, levels: Vec<BitVector>) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        if levels.len() != width as usize || levels.iter().any(|l| l.len() != len) {
            return Err(Error::InvalidRange(format!(
                "expected {width} levels of length {len}"
            )));
        }
        Ok(Self { width, len, levels })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn levels(&self) -> &[BitVector] {
        &self.levels
    }

    pub fn level(&self, level: usize) -> &BitVector {
        &self.levels[level]
    }

    pub(crate) fn check_symbol(&self, s: u64) -> Result<()> {
        if fits(s, self.width) {
            Ok(())
        } else {
            Err(Error::SymbolTooWide {
                value: s,
                width: self.width,
            })
        }
    }

    fn check_position(&self, i: usize) -> Result<()> {
        if i < self.len {
            Ok(())
        } else {
            Err(Error::OutOfRange {
                index: i,
                len: self.len,
            })
        }
    }

    #[inline]
    fn bit_of(&self, s: u64, level: usize) -> bool {
        s >> (self.width as usize - 1 - level) & 1 == 1
    }

    /// Extents of the 0-child and 1-child of the node `node` at `level`.
    #[inline]
    fn children(&self, level: usize, node: &Range<usize>) -> (Range<usize>, Range<usize>) {
        let bv = &self.levels[level];
        let zeros = bv.rank0_unchecked(node.end) - bv.rank0_unchecked(node.start);
        let split = node.start + zeros;
        (node.start..split, split..node.end)
    }

    /// Maps an absolute position inside `node` at `level` to the matching
    /// absolute position inside the child selected by `bit`.
    #[inline]
    fn descend(&self, level: usize, node: &Range<usize>, pos: usize, bit: bool) -> (Range<usize>, usize) {
        let bv = &self.levels[level];
        let (zero_child, one_child) = self.children(level, node);
        if bit {
            let off = bv.rank1_unchecked(pos) - bv.rank1_unchecked(node.start);
            (one_child.clone(), one_child.start + off)
        } else {
            let off = bv.rank0_unchecked(pos) - bv.rank0_unchecked(node.start);
            (zero_child.clone(), zero_child.start + off)
        }
    }

    /// Bits read along the rank-guided root-to-leaf route of position `i`.
    pub fn gather_path(&self, i: usize) -> Result<BitPath> {
        self.check_position(i)?;
        let mut bits = Vec::with_capacity(self.width as usize);
        let mut node = 0..self.len;
        let mut pos = i;
        for level in 0..self.width as usize {
            let bit = self.levels[level].get(pos);
            bits.push(bit);
            (node, pos) = self.descend(level, &node, pos, bit);
        }
        Ok(BitPath(bits))
    }

    /// The symbol at position `i`.
    pub fn access(&self, i: usize) -> Result<u64> {
        self.gather_path(i).map(|p| p.to_value())
    }

    /// Occurrences of `s` in `[0, pos)`.
    pub fn rank(&self, s: u64, pos: usize) -> Result<usize> {
        self.check_symbol(s)?;
        if pos > self.len {
            return Err(Error::OutOfRange {
                index: pos,
                len: self.len,
            });
        }
        let mut node = 0..self.len;
        let mut end = pos;
        for level in 0..self.width as usize {
            if node.is_empty() {
                return Ok(0);
            }
            (node, end) = self.descend(level, &node, end, self.bit_of(s, level));
        }
        Ok(end - node.start)
    }

    /// Extent of the leaf for `s` along with the node extents visited on
    /// the way down (one per level, root first).
    fn leaf_route(&self, s: u64) -> (Vec<Range<usize>>, Range<usize>) {
        let mut route = Vec::with_capacity(self.width as usize);
        let mut node = 0..self.len;
        for level in 0..self.width as usize {
            route.push(node.clone());
            let (zero, one) = self.children(level, &node);
            node = if self.bit_of(s, level) { one } else { zero };
        }
        (route, node)
    }

    /// Position of the `k`-th (zero-based) occurrence of `s`.
    pub fn select(&self, s: u64, k: usize) -> Result<usize> {
        self.check_symbol(s)?;
        let (route, leaf) = self.leaf_route(s);
        if k >= leaf.len() {
            return Err(Error::NotFound {
                k,
                count: leaf.len(),
            });
        }
        let mut off = k;
        for level in (0..self.width as usize).rev() {
            let bv = &self.levels[level];
            let node = &route[level];
            let pos = if self.bit_of(s, level) {
                bv.select1(bv.rank1_unchecked(node.start) + off)?
            } else {
                bv.select0(bv.rank0_unchecked(node.start) + off)?
            };
            off = pos - node.start;
        }
        Ok(off)
    }

    /// Occurrences of `s` in the whole sequence.
    pub fn count(&self, s: u64) -> Result<usize> {
        self.check_symbol(s)?;
        Ok(self.leaf_route(s).1.len())
    }

    /// Extent, inside every level from `depth` on, of the elements whose top
    /// `depth` bits equal `prefix`.
    pub fn prefix_extent(&self, prefix: u64, depth: u32) -> Range<usize> {
        assert!(depth <= self.width);
        let mut node = 0..self.len;
        for level in 0..depth as usize {
            let bit = prefix >> (depth as usize - 1 - level) & 1 == 1;
            let (zero, one) = self.children(level, &node);
            node = if bit { one } else { zero };
        }
        node
    }

    /// Start positions of the `2^level` nodes at `level`, followed by `len`.
    ///
    /// Derived from the levels above on demand; costs `O(2^level)`.
    pub fn node_offsets(&self, level: usize) -> Result<Vec<usize>> {
        if level >= self.width as usize {
            return Err(Error::OutOfRange {
                index: level,
                len: self.width as usize,
            });
        }
        let mut offsets = vec![0, self.len];
        for l in 0..level {
            let mut next = Vec::with_capacity(offsets.len() * 2 - 1);
            for w in offsets.windows(2) {
                let (zero, _) = self.children(l, &(w[0]..w[1]));
                next.push(w[0]);
                next.push(zero.end);
            }
            next.push(self.len);
            offsets = next;
        }
        Ok(offsets)
    }

    /// Number of positions `i` in `[l, r)` with `lo <= seq[i] <= hi`.
    pub fn range_count(&self, positions: Range<usize>, lo: u64, hi: u64) -> Result<usize> {
        let Range { start, end } = positions;
        if start > end || end > self.len {
            return Err(Error::InvalidRange(format!(
                "positions [{start}, {end}) with length {}",
                self.len
            )));
        }
        if lo > hi {
            return Err(Error::InvalidRange(format!("values [{lo}, {hi}]")));
        }
        self.check_symbol(hi)?;
        if start == end {
            return Ok(0);
        }
        let top = 1u128 << self.width;
        Ok(self.range_count_rec(0, 0..self.len, start..end, 0, top, lo as u128, hi as u128))
    }

    // `sel` is the query window expressed inside `node`; [vlo, vhi) is the
    // node's value range.
    #[allow(clippy::too_many_arguments)]
    fn range_count_rec(
        &self,
        level: usize,
        node: Range<usize>,
        sel: Range<usize>,
        vlo: u128,
        vhi: u128,
        lo: u128,
        hi: u128,
    ) -> usize {
        if sel.is_empty() || vhi <= lo || vlo > hi {
            return 0;
        }
        if lo <= vlo && vhi - 1 <= hi {
            return sel.len();
        }
        let mid = vlo + (vhi - vlo) / 2;
        let (zero, one) = self.children(level, &node);
        let bv = &self.levels[level];
        let z0 = bv.rank0_unchecked(node.start);
        let o0 = bv.rank1_unchecked(node.start);
        let zsel = zero.start + bv.rank0_unchecked(sel.start) - z0
            ..zero.start + bv.rank0_unchecked(sel.end) - z0;
        let osel = one.start + bv.rank1_unchecked(sel.start) - o0
            ..one.start + bv.rank1_unchecked(sel.end) - o0;
        self.range_count_rec(level + 1, zero, zsel, vlo, mid, lo, hi)
            + self.range_count_rec(level + 1, one, osel, mid, vhi, lo, hi)
    }

    /// Payload, directory and padding bits; raw is full-width storage.
    pub fn space_stats(&self) -> SpaceStats {
        let payload = self.width as u64 * self.len as u64;
        SpaceStats::new(payload, self.overhead_bits(), payload)
    }

    pub(crate) fn overhead_bits(&self) -> u64 {
        self.levels
            .iter()
            .map(|l| (l.directory_bits() + l.padding_bits()) as u64)
            .sum()
    }
}

#[inline]
fn prefix(v: u64, shift: u32) -> u64 {
    if shift >= 64 {
        0
    } else {
        v >> shift
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bits(s: &str) -> Vec<bool> {
        s.chars().map(|c| c == '1').collect()
    }

    /// Independent construction: explicit recursive nodes, each level being
    /// the concatenation of its nodes' bitvectors from left to right.
    fn oracle_levels(seq: &[u64], width: u32) -> Vec<Vec<bool>> {
        fn rec(seq: &[u64], width: u32, depth: u32, out: &mut Vec<Vec<bool>>) {
            if depth == width {
                return;
            }
            let shift = width - 1 - depth;
            out[depth as usize].extend(seq.iter().map(|v| v >> shift & 1 == 1));
            let zeros: Vec<u64> = seq.iter().copied().filter(|v| v >> shift & 1 == 0).collect();
            let ones: Vec<u64> = seq.iter().copied().filter(|v| v >> shift & 1 == 1).collect();
            rec(&zeros, width, depth + 1, out);
            rec(&ones, width, depth + 1, out);
        }
        let mut out = vec![Vec::new(); width as usize];
        // depth-first visits nodes left-to-right within each level
        rec(seq, width, 0, &mut out);
        out
    }

    fn levels_of(wt: &WaveletTree) -> Vec<Vec<bool>> {
        wt.levels().iter().map(|l| l.iter().collect()).collect()
    }

    #[test]
    fn full_range_two_bits() {
        let wt = WaveletTree::new(&[0, 1, 2, 3], 2).unwrap();
        assert_eq!(levels_of(&wt), vec![bits("0011"), bits("0101")]);
        assert_eq!(wt.gather_path(2).unwrap().bits(), &bits("10")[..]);
    }

    #[test]
    fn shuffled_two_bits() {
        let seq = [2, 0, 3, 1];
        let wt = WaveletTree::new(&seq, 2).unwrap();
        assert_eq!(levels_of(&wt), oracle_levels(&seq, 2));
        assert_eq!(levels_of(&wt), vec![bits("1010"), bits("0101")]);
        assert_eq!(wt.gather_path(1).unwrap().bits(), &bits("00")[..]);
        assert_eq!(wt.access(0), Ok(2));
        assert_eq!(wt.rank(3, 4), Ok(1));
        assert_eq!(wt.select(3, 0), Ok(2));
        assert_eq!(wt.range_count(0..4, 1, 3), Ok(3));
        assert_eq!(wt.count(0), Ok(1));
    }

    #[test]
    fn empty_tree() {
        let wt = WaveletTree::new(&[], 3).unwrap();
        assert_eq!(wt.levels().len(), 3);
        assert!(wt.levels().iter().all(|l| l.is_empty()));
        assert_eq!(wt.rank(5, 0), Ok(0));
        assert!(wt.access(0).is_err());
        assert!(wt.select(0, 0).is_err());
        assert_eq!(wt.range_count(0..0, 0, 7), Ok(0));
        assert_eq!(wt.space_stats().payload_bits, 0);
    }

    #[test]
    fn singletons_and_constants() {
        let wt = WaveletTree::new(&[6], 3).unwrap();
        assert_eq!(wt.gather_path(0).unwrap().to_string(), "110");
        assert_eq!(wt.access(0), Ok(6));
        let wt = WaveletTree::new(&[0, 0, 0], 1).unwrap();
        assert_eq!(wt.access(2), Ok(0));
        let wt = WaveletTree::new(&[5, 5, 5, 5], 3).unwrap();
        assert_eq!(wt.rank(5, 4), Ok(4));
        assert_eq!(wt.rank(4, 4), Ok(0));
        let wt = WaveletTree::new(&[7], 3).unwrap();
        assert_eq!(wt.select(7, 0), Ok(0));
        let wt = WaveletTree::new(&[0, 1], 1).unwrap();
        assert_eq!(wt.select(1, 1), Err(Error::NotFound { k: 1, count: 1 }));
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            WaveletTree::new(&[1, 4, 2], 2),
            Err(Error::SymbolOutOfDomain {
                position: 1,
                value: 4,
                width: 2
            })
        );
        assert_eq!(WaveletTree::new(&[], 0), Err(Error::InvalidWidth(0)));
        assert_eq!(WaveletTree::new(&[], 65), Err(Error::InvalidWidth(65)));
        let wt = WaveletTree::new(&[1, 2], 2).unwrap();
        assert!(matches!(wt.rank(4, 0), Err(Error::SymbolTooWide { .. })));
        assert!(matches!(wt.rank(0, 3), Err(Error::OutOfRange { .. })));
        assert!(matches!(wt.access(2), Err(Error::OutOfRange { .. })));
        #[allow(clippy::reversed_empty_ranges)]
        let backwards = 1..0;
        assert!(wt.range_count(backwards, 0, 1).is_err());
        assert!(wt.range_count(0..2, 2, 1).is_err());
        assert!(wt.range_count(0..3, 0, 1).is_err());
        assert!(wt.range_count(0..2, 0, 4).is_err());
    }

    #[test]
    fn full_width_symbols() {
        let seq = [u64::MAX, 0, 1 << 63, 42, u64::MAX];
        let wt = WaveletTree::new(&seq, 64).unwrap();
        for (i, &v) in seq.iter().enumerate() {
            assert_eq!(wt.access(i), Ok(v));
        }
        assert_eq!(wt.rank(u64::MAX, 5), Ok(2));
        assert_eq!(wt.select(u64::MAX, 1), Ok(4));
        assert_eq!(wt.range_count(0..5, 0, u64::MAX), Ok(5));
        assert_eq!(wt.range_count(0..5, 1, 1 << 63), Ok(2));
    }

    #[test]
    fn node_offsets_partition() {
        let seq = [3, 1, 0, 2, 2, 7, 5, 5];
        let wt = WaveletTree::new(&seq, 3).unwrap();
        assert_eq!(wt.node_offsets(0).unwrap(), vec![0, 8]);
        // top bit: {3,1,0,2,2} | {7,5,5}
        assert_eq!(wt.node_offsets(1).unwrap(), vec![0, 5, 8]);
        // top two bits: 00 {1,0}, 01 {3,2,2}, 10 {5,5}, 11 {7}
        assert_eq!(wt.node_offsets(2).unwrap(), vec![0, 2, 5, 7, 8]);
        assert!(wt.node_offsets(3).is_err());
    }

    #[test]
    fn overhead_at_scale() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let seq: Vec<u64> = (0..100_000).map(|_| rng.gen_range(0..256)).collect();
        let stats = WaveletTree::new(&seq, 8).unwrap().space_stats();
        assert_eq!(stats.payload_bits, 800_000);
        assert_eq!(stats.raw_bits, 800_000);
        assert!(stats.overhead_bits as f64 / stats.payload_bits as f64 <= 0.13);
        let stats = WaveletTree::new(&[0, 1, 2, 3], 2).unwrap().space_stats();
        assert_eq!(stats.payload_bits, 8);
    }

    fn seq_strategy() -> impl Strategy<Value = (u32, Vec<u64>)> {
        (1u32..=8).prop_flat_map(|w| (Just(w), proptest::collection::vec(0u64..(1 << w), 0..300)))
    }

    proptest! {
        #[test]
        fn matches_recursive_construction((w, seq) in seq_strategy()) {
            let wt = WaveletTree::new(&seq, w).unwrap();
            prop_assert_eq!(levels_of(&wt), oracle_levels(&seq, w));
        }

        #[test]
        fn queries_match_array((w, seq) in seq_strategy()) {
            let wt = WaveletTree::new(&seq, w).unwrap();
            let n = seq.len();
            for (i, &v) in seq.iter().enumerate() {
                prop_assert_eq!(wt.access(i).unwrap(), v);
            }
            let mut total = 0;
            for s in 0..(1u64 << w) {
                let occ: Vec<usize> = (0..n).filter(|&i| seq[i] == s).collect();
                total += wt.rank(s, n).unwrap();
                prop_assert_eq!(wt.count(s).unwrap(), occ.len());
                for (k, &p) in occ.iter().enumerate() {
                    prop_assert_eq!(wt.select(s, k).unwrap(), p);
                    prop_assert_eq!(wt.rank(s, p + 1).unwrap(), k + 1);
                }
                prop_assert!(wt.select(s, occ.len()).is_err());
            }
            prop_assert_eq!(total, n);
        }

        #[test]
        fn range_count_additive((w, seq) in seq_strategy(), a in 0usize..300, b in 0usize..300, cut in 0u64..256) {
            let wt = WaveletTree::new(&seq, w).unwrap();
            let n = seq.len();
            let (l, r) = (a.min(b).min(n), a.max(b).min(n));
            let top = (1u64 << w) - 1;
            let cut = cut.min(top);
            let below = wt.range_count(l..r, 0, cut).unwrap();
            let above = if cut < top { wt.range_count(l..r, cut + 1, top).unwrap() } else { 0 };
            prop_assert_eq!(below + above, r - l);
            let brute = seq[l..r].iter().filter(|&&v| v <= cut).count();
            prop_assert_eq!(below, brute);
        }
    }
}

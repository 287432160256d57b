//! Index/value identity checks and the pattern-based codec.
//!
//! With the midpoint split, a position's root-to-leaf path in a
//! [`WaveletTree`] over `[0, 2^N)` is the MSB-first binary expansion of its
//! symbol; read leaf-to-root it is the bit-reversed (LSB-first) expansion.
//! [`verify_equal`] checks this position by position.
//!
//! Alphabets that are not a full `[0, 2^N)` range are split into
//! [`PatternGroup`]s. Every member of a group shares a fixed set of bit
//! positions; the remaining `k` positions range over all of `[0, 2^k)` and
//! are stored in a wavelet tree, prefixed by the group id.

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{fits, low_mask, Error, Result};
use crate::wavelet::{BitPath, SpaceStats, WaveletTree};

/// MSB-first (root-to-leaf) path of `v` in a tree of the given width.
pub fn value_to_path(v: u64, width: u32) -> Result<BitPath> {
    if !(1..=64).contains(&width) {
        return Err(Error::InvalidWidth(width));
    }
    if !fits(v, width) {
        return Err(Error::SymbolTooWide { value: v, width });
    }
    Ok(BitPath::new(
        (0..width).rev().map(|p| v >> p & 1 == 1).collect(),
    ))
}

/// Inverse of [`value_to_path`].
pub fn path_to_value(path: &BitPath) -> Result<u64> {
    if path.is_empty() || path.len() > 64 {
        return Err(Error::InvalidWidth(path.len() as u32));
    }
    Ok(path.to_value())
}

/// Outcome of [`verify_equal`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EqualityReport {
    pub holds: bool,
    pub first_violation: Option<usize>,
}

/// Checks that every gathered path equals the binary expansion of the
/// corresponding symbol of `original`.
pub fn verify_equal(wt: &WaveletTree, original: &[u64]) -> Result<EqualityReport> {
    if wt.len() != original.len() {
        return Err(Error::LengthMismatch {
            index: wt.len(),
            reference: original.len(),
        });
    }
    if let Some((position, &value)) = original
        .iter()
        .enumerate()
        .find(|(_, &v)| !fits(v, wt.width()))
    {
        return Err(Error::SymbolOutOfDomain {
            position,
            value,
            width: wt.width(),
        });
    }
    for (i, &v) in original.iter().enumerate() {
        let path = wt.gather_path(i)?;
        let expected = value_to_path(v, wt.width())?;
        // the leaf-to-root reading must be the LSB-first expansion
        let lsb_first: Vec<bool> = (0..wt.width()).map(|p| v >> p & 1 == 1).collect();
        if path != expected || path.reversed().bits() != &lsb_first[..] {
            return Ok(EqualityReport {
                holds: false,
                first_violation: Some(i),
            });
        }
    }
    Ok(EqualityReport {
        holds: true,
        first_violation: None,
    })
}

/// Spreads the low bits of `r` over the set positions of `mask`, lowest
/// first (software `pdep`).
pub fn scatter_bits(r: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut m = mask;
    let mut bit = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if r >> bit & 1 == 1 {
            out |= low;
        }
        m &= m - 1;
        bit += 1;
    }
    out
}

/// Gathers the bits of `v` at the set positions of `mask` into the low bits
/// of the result (software `pext`).
pub fn compact_bits(v: u64, mask: u64) -> u64 {
    let mut out = 0;
    let mut m = mask;
    let mut bit = 0;
    while m != 0 {
        let low = m & m.wrapping_neg();
        if v & low != 0 {
            out |= 1 << bit;
        }
        m &= m - 1;
        bit += 1;
    }
    out
}

/// A set of values agreeing on `fixed_mask`, varying freely elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PatternGroup {
    pub base: u64,
    pub fixed_mask: u64,
    pub fixed_bits: u64,
    pub residual_width: u32,
}

impl PatternGroup {
    /// The aligned block `[base, base + 2^k)` over `width`-bit values.
    pub fn dyadic(base: u64, k: u32, width: u32) -> Self {
        let fixed_mask = low_mask(width) & !low_mask(k);
        Self {
            base,
            fixed_mask,
            fixed_bits: base,
            residual_width: k,
        }
    }

    fn free_mask(&self, width: u32) -> u64 {
        low_mask(width) & !self.fixed_mask
    }

    pub fn contains(&self, v: u64, width: u32) -> bool {
        fits(v, width) && v & self.fixed_mask == self.fixed_bits
    }

    pub fn size(&self) -> u128 {
        1u128 << self.residual_width
    }

    /// Member with residual `r`.
    pub fn scatter(&self, r: u64, width: u32) -> u64 {
        self.fixed_bits | scatter_bits(r, self.free_mask(width))
    }

    /// Residual of member `v`.
    pub fn compact(&self, v: u64, width: u32) -> u64 {
        compact_bits(v, self.free_mask(width))
    }

    /// True when the free positions are exactly the `k` lowest.
    pub fn is_low_residual(&self, width: u32) -> bool {
        self.free_mask(width) == low_mask(self.residual_width)
    }

    fn validate(&self, width: u32) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidTable(format!("group base={:#x}: {msg}", self.base)));
        if self.fixed_mask & !low_mask(width) != 0 {
            return fail("mask wider than the symbol width");
        }
        if self.fixed_bits & !self.fixed_mask != 0 {
            return fail("fixed bits outside the mask");
        }
        if self.residual_width != width - self.fixed_mask.count_ones() {
            return fail("residual width disagrees with the mask");
        }
        if self.base != self.fixed_bits {
            return fail("base is not the smallest member");
        }
        Ok(())
    }

    fn intersects(&self, other: &PatternGroup) -> bool {
        (self.fixed_bits ^ other.fixed_bits) & self.fixed_mask & other.fixed_mask == 0
    }

    /// Printable form: `base=<hex> mask=<bin> fixed=<bin> k=<int>`.
    pub fn display(&self, width: u32) -> impl fmt::Display + '_ {
        GroupDisplay { group: self, width }
    }
}

struct GroupDisplay<'a> {
    group: &'a PatternGroup,
    width: u32,
}

impl fmt::Display for GroupDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let w = self.width as usize;
        write!(
            f,
            "base={:#x} mask={:0w$b} fixed={:0w$b} k={}",
            self.group.base, self.group.fixed_mask, self.group.fixed_bits, self.group.residual_width
        )
    }
}

/// Greedy cover of a sorted alphabet by maximal aligned dyadic blocks.
pub fn dyadic_decompose(alphabet: &BTreeSet<u64>, width: u32) -> Result<Vec<PatternGroup>> {
    check_alphabet(alphabet, width)?;
    let values: Vec<u64> = alphabet.iter().copied().collect();
    let mut groups = Vec::new();
    let mut i = 0;
    while i < values.len() {
        let base = values[i];
        let align = if base == 0 { width } else { base.trailing_zeros().min(width) };
        // values are distinct and sorted, so [base, base + 2^k) is covered
        // iff the element 2^k - 1 steps ahead is base + 2^k - 1
        let mut k = 0;
        while k < align {
            let span = 1u128 << (k + 1);
            let last = i as u128 + span - 1;
            if last >= values.len() as u128 || values[last as usize] as u128 != base as u128 + span - 1 {
                break;
            }
            k += 1;
        }
        groups.push(PatternGroup::dyadic(base, k, width));
        i += 1usize << k;
    }
    Ok(groups)
}

fn check_alphabet(alphabet: &BTreeSet<u64>, width: u32) -> Result<()> {
    if !(1..=64).contains(&width) {
        return Err(Error::InvalidWidth(width));
    }
    let Some(&max) = alphabet.last() else {
        return Err(Error::EmptyAlphabet);
    };
    if !fits(max, width) {
        return Err(Error::SymbolTooWide { value: max, width });
    }
    Ok(())
}

/// Ordered, disjoint pattern groups over `width`-bit symbols.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternTable {
    width: u32,
    groups: Vec<PatternGroup>,
    group_bits: u32,
    k_max: u32,
    low_residual: bool,
}

impl PatternTable {
    /// Validates and indexes a list of groups.
    pub fn new(width: u32, mut groups: Vec<PatternGroup>) -> Result<Self> {
        if !(1..=64).contains(&width) {
            return Err(Error::InvalidWidth(width));
        }
        if groups.is_empty() {
            return Err(Error::EmptyAlphabet);
        }
        for g in &groups {
            g.validate(width)?;
        }
        groups.sort_by_key(|g| g.base);
        let low_residual = groups.iter().all(|g| g.is_low_residual(width));
        let disjoint = if low_residual {
            groups.windows(2).all(|w| w[0].base as u128 + w[0].size() <= w[1].base as u128)
        } else {
            groups
                .iter()
                .enumerate()
                .all(|(i, a)| groups[i + 1..].iter().all(|b| !a.intersects(b)))
        };
        if !disjoint {
            return Err(Error::InvalidTable("groups overlap".into()));
        }
        let group_bits = usize::BITS - (groups.len() - 1).leading_zeros();
        let k_max = groups.iter().map(|g| g.residual_width).max().unwrap_or(0);
        Ok(Self {
            width,
            groups,
            group_bits,
            k_max,
            low_residual,
        })
    }

    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn groups(&self) -> &[PatternGroup] {
        &self.groups
    }

    /// Bits needed for a group id: `ceil(log2(max(1, groups)))`.
    pub fn group_bits(&self) -> u32 {
        self.group_bits
    }

    pub fn k_max(&self) -> u32 {
        self.k_max
    }

    /// Composite code width. Never below one so the tree stays well-formed
    /// for a single zero-residual group.
    pub fn code_width(&self) -> u32 {
        (self.group_bits + self.k_max).max(1)
    }

    /// Number of values covered by the table.
    pub fn alphabet_size(&self) -> u128 {
        self.groups.iter().map(|g| g.size()).sum()
    }

    /// Group index holding `v`.
    pub fn locate(&self, v: u64) -> Option<usize> {
        if !fits(v, self.width) {
            return None;
        }
        if self.low_residual {
            let idx = self.groups.partition_point(|g| g.base <= v).checked_sub(1)?;
            self.groups[idx].contains(v, self.width).then_some(idx)
        } else {
            self.groups.iter().position(|g| g.contains(v, self.width))
        }
    }

    pub fn encode(&self, v: u64) -> Option<u64> {
        let g = self.locate(v)?;
        let r = self.groups[g].compact(v, self.width);
        Some(((g as u64) << self.k_max) | r)
    }

    pub fn decode(&self, code: u64) -> Option<u64> {
        let g = if self.k_max >= 64 { 0 } else { code >> self.k_max } as usize;
        let r = code & low_mask(self.k_max);
        let group = self.groups.get(g)?;
        fits(r, group.residual_width).then(|| group.scatter(r, self.width))
    }

    /// Every member value, in group order. Intended for small widths.
    pub fn members(&self) -> impl Iterator<Item = u64> + '_ {
        self.groups.iter().flat_map(move |g| {
            (0..g.size() as u64).map(move |r| g.scatter(r, self.width))
        })
    }
}

impl fmt::Display for PatternTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for g in &self.groups {
            writeln!(f, "{}", g.display(self.width))?;
        }
        Ok(())
    }
}

/// Pattern table for `alphabet`: a single group when every member agrees on
/// a set of positions and the rest span a complete residual range, the dyadic
/// cover otherwise.
pub fn extract_patterns(alphabet: &BTreeSet<u64>, width: u32) -> Result<PatternTable> {
    check_alphabet(alphabet, width)?;
    let all = low_mask(width);
    let and = alphabet.iter().fold(all, |acc, &v| acc & v);
    let or = alphabet.iter().fold(0, |acc, &v| acc | v);
    // positions where every member carries the same bit
    let fixed_mask = all & !(and ^ or);
    let k = width - fixed_mask.count_ones();
    if alphabet.len() as u128 == 1u128 << k {
        let group = PatternGroup {
            base: and,
            fixed_mask,
            fixed_bits: and,
            residual_width: k,
        };
        return PatternTable::new(width, vec![group]);
    }
    PatternTable::new(width, dyadic_decompose(alphabet, width)?)
}

/// Pattern table plus the wavelet tree over composite codes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RevivalFullIndex {
    table: PatternTable,
    composite: WaveletTree,
}

impl RevivalFullIndex {
    /// Encodes `seq` against `table`.
    pub fn encode(seq: &[u64], table: PatternTable) -> Result<Self> {
        if table.code_width() > 64 {
            return Err(Error::CompositeTooWide(table.code_width()));
        }
        let codes = seq
            .iter()
            .enumerate()
            .map(|(position, &value)| {
                table
                    .encode(value)
                    .ok_or(Error::NotInTable { position, value })
            })
            .collect::<Result<Vec<_>>>()?;
        let composite = WaveletTree::new(&codes, table.code_width())?;
        Ok(Self { table, composite })
    }

    /// Infers the alphabet from `seq`, extracts patterns and encodes.
    pub fn from_sequence(seq: &[u64], width: u32) -> Result<Self> {
        let alphabet: BTreeSet<u64> = seq.iter().copied().collect();
        if alphabet.is_empty() {
            // nothing to factor out; a single full-range group
            let table = PatternTable::new(width, vec![PatternGroup::dyadic(0, width, width)])?;
            return Self::encode(seq, table);
        }
        Self::encode(seq, extract_patterns(&alphabet, width)?)
    }

    /// Pairs a stored table and composite tree, checking that every stored
    /// code decodes.
    pub fn from_parts(table: PatternTable, composite: WaveletTree) -> Result<Self> {
        if composite.width() != table.code_width() {
            return Err(Error::InvalidTable(format!(
                "composite width {} but table needs {}",
                composite.width(),
                table.code_width()
            )));
        }
        let idx = Self { table, composite };
        let n = idx.composite.len();
        let top = low_mask(idx.composite.width());
        let k_max = idx.table.k_max;
        let groups = idx.table.groups.len() as u64;
        // undecodable codes: residual padding inside each group, and group
        // ids past the table
        let mut bad = 0;
        for (g, group) in idx.table.groups.iter().enumerate() {
            if group.residual_width < k_max {
                let lo = ((g as u64) << k_max) | (1u64 << group.residual_width);
                let hi = ((g as u64) << k_max) | low_mask(k_max);
                bad += idx.composite.range_count(0..n, lo, hi)?;
            }
        }
        let first_unused = (groups as u128) << k_max;
        if first_unused <= top as u128 {
            bad += idx.composite.range_count(0..n, first_unused as u64, top)?;
        }
        if bad > 0 {
            return Err(Error::InvalidTable(format!("{bad} undecodable composite codes")));
        }
        Ok(idx)
    }

    pub fn table(&self) -> &PatternTable {
        &self.table
    }

    pub fn composite(&self) -> &WaveletTree {
        &self.composite
    }

    pub fn len(&self) -> usize {
        self.composite.len()
    }

    pub fn is_empty(&self) -> bool {
        self.composite.is_empty()
    }

    /// Value at position `i`: the group's fixed bits with the residual
    /// scattered into the free positions.
    pub fn access(&self, i: usize) -> Result<u64> {
        let code = self.composite.access(i)?;
        self.table
            .decode(code)
            .ok_or(Error::CorruptCode { position: i, code })
    }

    pub fn decode(&self) -> Result<Vec<u64>> {
        (0..self.len()).map(|i| self.access(i)).collect()
    }

    /// Occurrences of value `v` in `[0, pos)`.
    pub fn rank(&self, v: u64, pos: usize) -> Result<usize> {
        match self.table.encode(v) {
            Some(code) => self.composite.rank(code, pos),
            None if pos <= self.len() => Ok(0),
            None => Err(Error::OutOfRange {
                index: pos,
                len: self.len(),
            }),
        }
    }

    pub fn select(&self, v: u64, k: usize) -> Result<usize> {
        match self.table.encode(v) {
            Some(code) => self.composite.select(code, k),
            None => Err(Error::NotFound { k, count: 0 }),
        }
    }

    pub fn count(&self, v: u64) -> Result<usize> {
        self.rank(v, self.len())
    }

    /// Positions in `range` whose value lies in `[lo, hi]`.
    ///
    /// Within a group the scatter map is monotone, so the matching residuals
    /// form one interval per group.
    pub fn range_count(&self, range: std::ops::Range<usize>, lo: u64, hi: u64) -> Result<usize> {
        if lo > hi {
            return Err(Error::InvalidRange(format!("values [{lo}, {hi}]")));
        }
        if !fits(hi, self.table.width) {
            return Err(Error::SymbolTooWide {
                value: hi,
                width: self.table.width,
            });
        }
        if range.start > range.end || range.end > self.len() {
            return Err(Error::InvalidRange(format!(
                "positions [{}, {}) with length {}",
                range.start,
                range.end,
                self.len()
            )));
        }
        let w = self.table.width;
        let mut total = 0;
        for (g, group) in self.table.groups.iter().enumerate() {
            let size = group.size();
            // first residual with value >= lo, first with value > hi
            let r_lo = partition(size, |r| group.scatter(r, w) < lo);
            let r_hi = partition(size, |r| group.scatter(r, w) <= hi);
            if r_lo < r_hi {
                let prefix = (g as u64) << self.table.k_max;
                total += self.composite.range_count(
                    range.clone(),
                    prefix | r_lo as u64,
                    prefix | (r_hi - 1) as u64,
                )?;
            }
        }
        Ok(total)
    }

    /// Composite payload, raw at the original width, table bits as overhead.
    pub fn space_stats(&self) -> SpaceStats {
        let n = self.len() as u64;
        let payload = self.composite.width() as u64 * n;
        // base, mask, fixed bits and residual width per stored group
        let table_bits = self.table.groups.len() as u64 * (3 * 64 + 8);
        SpaceStats::new(
            payload,
            self.composite.overhead_bits() + table_bits,
            self.table.width as u64 * n,
        )
    }
}

/// Smallest `r` in `[0, size)` for which `pred` is false (`pred` monotone).
fn partition(size: u128, pred: impl Fn(u64) -> bool) -> u128 {
    let (mut lo, mut hi) = (0u128, size);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if pred(mid as u64) {
            lo = mid + 1;
        } else {
            hi = mid;
        }
    }
    lo
}

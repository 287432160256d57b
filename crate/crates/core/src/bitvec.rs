//! Packed bitvector with a flat rank directory.
//!
//! Bits are stored least-significant-bit-first in 64-bit words. One cumulative
//! 1-count is kept per 512-bit superblock; rank finishes with at most eight
//! word popcounts and select binary-searches the directory before scanning.

use crate::error::{Error, Result};

pub(crate) const WORD_BITS: usize = 64;
pub(crate) const SUPERBLOCK_BITS: usize = 512;
const WORDS_PER_SUPERBLOCK: usize = SUPERBLOCK_BITS / WORD_BITS;

/// Immutable bit sequence supporting `rank` and `select`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BitVector {
    len: usize,
    words: Vec<u64>,
    // rank_dir[j] = number of ones in [0, 512 * j)
    rank_dir: Vec<u64>,
    ones: usize,
}

impl BitVector {
    /// Builds from a sequence of bits.
    pub fn from_bits<I: IntoIterator<Item = bool>>(bits: I) -> Self {
        let mut words = Vec::new();
        let mut len = 0usize;
        for bit in bits {
            if len.is_multiple_of(WORD_BITS) {
                words.push(0);
            }
            if bit {
                *words.last_mut().unwrap() |= 1u64 << (len % WORD_BITS);
            }
            len += 1;
        }
        Self::assemble(words, len)
    }

    /// Builds from raw words. Returns `None` if `words` has the wrong size or
    /// any bit at or beyond `len` is set.
    pub fn from_words(words: Vec<u64>, len: usize) -> Option<Self> {
        if words.len() != len.div_ceil(WORD_BITS) {
            return None;
        }
        let tail = len % WORD_BITS;
        if tail != 0 && words[words.len() - 1] >> tail != 0 {
            return None;
        }
        Some(Self::assemble(words, len))
    }

    fn assemble(words: Vec<u64>, len: usize) -> Self {
        let mut rank_dir = Vec::with_capacity(len.div_ceil(SUPERBLOCK_BITS));
        let mut acc = 0u64;
        for chunk in words.chunks(WORDS_PER_SUPERBLOCK) {
            rank_dir.push(acc);
            acc += chunk.iter().map(|w| w.count_ones() as u64).sum::<u64>();
        }
        Self {
            len,
            words,
            rank_dir,
            ones: acc as usize,
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn words(&self) -> &[u64] {
        &self.words
    }

    /// Total number of set bits.
    pub fn count_ones(&self) -> usize {
        self.ones
    }

    pub fn count_zeros(&self) -> usize {
        self.len - self.ones
    }

    /// Reads bit `i`. Panics if `i >= len`.
    #[inline]
    pub fn get(&self, i: usize) -> bool {
        assert!(i < self.len, "bit index {i} out of range for length {}", self.len);
        self.words[i / WORD_BITS] >> (i % WORD_BITS) & 1 == 1
    }

    pub fn try_get(&self, i: usize) -> Result<bool> {
        if i >= self.len {
            return Err(Error::OutOfRange {
                index: i,
                len: self.len,
            });
        }
        Ok(self.get(i))
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Number of ones in `[0, pos)`.
    pub fn rank1(&self, pos: usize) -> Result<usize> {
        if pos > self.len {
            return Err(Error::OutOfRange {
                index: pos,
                len: self.len,
            });
        }
        Ok(self.rank1_unchecked(pos))
    }

    /// Number of zeros in `[0, pos)`.
    pub fn rank0(&self, pos: usize) -> Result<usize> {
        self.rank1(pos).map(|ones| pos - ones)
    }

    #[inline]
    pub(crate) fn rank1_unchecked(&self, pos: usize) -> usize {
        debug_assert!(pos <= self.len);
        if self.rank_dir.is_empty() {
            return 0;
        }
        // pos == len on a superblock boundary lands one past the directory
        let sb = (pos / SUPERBLOCK_BITS).min(self.rank_dir.len() - 1);
        let mut count = self.rank_dir[sb] as usize;
        let first = sb * WORDS_PER_SUPERBLOCK;
        let last = pos / WORD_BITS;
        for w in &self.words[first..last] {
            count += w.count_ones() as usize;
        }
        let rem = pos % WORD_BITS;
        if rem != 0 {
            count += (self.words[last] & ((1u64 << rem) - 1)).count_ones() as usize;
        }
        count
    }

    #[inline]
    pub(crate) fn rank0_unchecked(&self, pos: usize) -> usize {
        pos - self.rank1_unchecked(pos)
    }

    /// Position of the `k`-th one (zero-based).
    pub fn select1(&self, k: usize) -> Result<usize> {
        if k >= self.ones {
            return Err(Error::NotFound {
                k,
                count: self.ones,
            });
        }
        Ok(self.select_impl::<true>(k))
    }

    /// Position of the `k`-th zero (zero-based).
    pub fn select0(&self, k: usize) -> Result<usize> {
        let zeros = self.count_zeros();
        if k >= zeros {
            return Err(Error::NotFound { k, count: zeros });
        }
        Ok(self.select_impl::<false>(k))
    }

    fn select_impl<const ONES: bool>(&self, k: usize) -> usize {
        let before = |sb: usize| -> usize {
            let ones = self.rank_dir[sb] as usize;
            if ONES {
                ones
            } else {
                sb * SUPERBLOCK_BITS - ones
            }
        };
        // last superblock whose prefix count is <= k
        let (mut lo, mut hi) = (0usize, self.rank_dir.len());
        while hi - lo > 1 {
            let mid = (lo + hi) / 2;
            if before(mid) <= k {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut remaining = k - before(lo);
        for (wi, &raw) in self.words.iter().enumerate().skip(lo * WORDS_PER_SUPERBLOCK) {
            let w = if ONES { raw } else { !raw };
            let c = w.count_ones() as usize;
            if remaining < c {
                return wi * WORD_BITS + select_in_word(w, remaining);
            }
            remaining -= c;
        }
        unreachable!("select target is bounded by the total count")
    }

    /// Bits spent on the rank directory.
    pub fn directory_bits(&self) -> usize {
        self.rank_dir.len() * 64
    }

    /// Bits in the word array beyond `len`.
    pub fn padding_bits(&self) -> usize {
        self.words.len() * WORD_BITS - self.len
    }
}

#[inline]
fn select_in_word(mut w: u64, k: usize) -> usize {
    for _ in 0..k {
        w &= w - 1;
    }
    w.trailing_zeros() as usize
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn bv(bits: &[u8]) -> BitVector {
        BitVector::from_bits(bits.iter().map(|&b| b == 1))
    }

    #[test]
    fn empty() {
        let v = bv(&[]);
        assert_eq!(v.len(), 0);
        assert_eq!(v.rank1(0), Ok(0));
        assert!(v.rank1(1).is_err());
        assert!(v.select1(0).is_err());
        assert!(v.select0(0).is_err());
        assert_eq!(v.directory_bits(), 0);
    }

    #[test]
    fn small_readback() {
        let v = bv(&[1, 0, 1, 0]);
        let got: Vec<bool> = v.iter().collect();
        assert_eq!(got, vec![true, false, true, false]);
        assert_eq!(v.rank1(0), Ok(0));
        assert_eq!(v.rank1(3), Ok(2));
        assert_eq!(v.rank0(3), Ok(1));
        assert_eq!(v.select1(0), Ok(0));
        assert_eq!(v.select1(1), Ok(2));
        assert_eq!(v.select0(1), Ok(3));
        assert!(matches!(v.select1(2), Err(Error::NotFound { .. })));
        assert!(matches!(v.rank1(5), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn no_ones() {
        assert_eq!(
            bv(&[0, 0, 0]).select1(0),
            Err(Error::NotFound { k: 0, count: 0 })
        );
    }

    #[test]
    fn saturated_superblock() {
        let v = BitVector::from_bits(std::iter::repeat_n(true, 512));
        assert_eq!(v.rank1(512), Ok(512));
        assert_eq!(v.select1(511), Ok(511));
        assert_eq!(v.directory_bits(), 64);
        assert_eq!(v.padding_bits(), 0);
    }

    #[test]
    fn zeros_do_not_leak_from_padding() {
        let v = BitVector::from_bits(std::iter::repeat_n(true, 70));
        assert!(v.select0(0).is_err());
        let v = bv(&[1, 1, 0]);
        assert_eq!(v.select0(0), Ok(2));
        assert!(v.select0(1).is_err());
    }

    #[test]
    fn from_words_rejects_dirty_tail() {
        assert!(BitVector::from_words(vec![0b1000], 3).is_none());
        assert!(BitVector::from_words(vec![0b100], 3).is_some());
        assert!(BitVector::from_words(vec![], 1).is_none());
    }

    #[test]
    fn random_matches_input() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let bits: Vec<bool> = (0..1000).map(|_| rng.gen()).collect();
        let v = BitVector::from_bits(bits.iter().copied());
        for (i, &b) in bits.iter().enumerate() {
            assert_eq!(v.get(i), b);
        }
    }

    #[test]
    fn rank_matches_scan_at_scale() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for density in [0.01, 0.5, 0.97] {
            let bits: Vec<bool> = (0..100_000).map(|_| rng.gen_bool(density)).collect();
            let v = BitVector::from_bits(bits.iter().copied());
            let mut ones = 0;
            for (p, &b) in bits.iter().enumerate() {
                assert_eq!(v.rank1_unchecked(p), ones);
                ones += b as usize;
            }
            assert_eq!(v.rank1(bits.len()), Ok(ones));
            let overhead = (v.directory_bits() + v.padding_bits()) as f64 / v.len() as f64;
            assert!(overhead <= 0.13, "overhead {overhead}");
        }
    }

    proptest! {
        #[test]
        fn rank_select_laws(bits in proptest::collection::vec(any::<bool>(), 0..3000)) {
            let v = BitVector::from_bits(bits.iter().copied());
            let mut ones = 0;
            for pos in 0..=bits.len() {
                prop_assert_eq!(v.rank1(pos).unwrap() + v.rank0(pos).unwrap(), pos);
                prop_assert_eq!(v.rank1(pos).unwrap(), ones);
                if pos < bits.len() { ones += bits[pos] as usize; }
            }
            for k in 0..v.count_ones() {
                let p = v.select1(k).unwrap();
                prop_assert!(v.get(p));
                prop_assert_eq!(v.rank1(p).unwrap(), k);
            }
            for k in 0..v.count_zeros() {
                let p = v.select0(k).unwrap();
                prop_assert!(!v.get(p));
                prop_assert_eq!(v.rank0(p).unwrap(), k);
            }
        }
    }
}

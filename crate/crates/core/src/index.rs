use std::ops::Range;

use crate::coc;
use crate::error::Result;
use crate::revival::RevivalFullIndex;
use crate::wavelet::{SpaceStats, WaveletTree};

/// Either kind of persisted index, answering queries in terms of the
/// original symbol values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Index {
    Plain(WaveletTree),
    Full(RevivalFullIndex),
}

impl Index {
    pub fn len(&self) -> usize {
        match self {
            Index::Plain(wt) => wt.len(),
            Index::Full(idx) => idx.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Width of the stored tree.
    pub fn tree_width(&self) -> u32 {
        self.tree().width()
    }

    /// Width of the original symbols.
    pub fn symbol_width(&self) -> u32 {
        match self {
            Index::Plain(wt) => wt.width(),
            Index::Full(idx) => idx.table().width(),
        }
    }

    pub fn tree(&self) -> &WaveletTree {
        match self {
            Index::Plain(wt) => wt,
            Index::Full(idx) => idx.composite(),
        }
    }

    pub fn access(&self, i: usize) -> Result<u64> {
        match self {
            Index::Plain(wt) => wt.access(i),
            Index::Full(idx) => idx.access(i),
        }
    }

    pub fn decode(&self) -> Result<Vec<u64>> {
        (0..self.len()).map(|i| self.access(i)).collect()
    }

    pub fn rank(&self, s: u64, pos: usize) -> Result<usize> {
        match self {
            Index::Plain(wt) => wt.rank(s, pos),
            Index::Full(idx) => idx.rank(s, pos),
        }
    }

    pub fn select(&self, s: u64, k: usize) -> Result<usize> {
        match self {
            Index::Plain(wt) => wt.select(s, k),
            Index::Full(idx) => idx.select(s, k),
        }
    }

    pub fn count(&self, s: u64) -> Result<usize> {
        match self {
            Index::Plain(wt) => coc::count_eq(wt, s),
            Index::Full(idx) => idx.count(s),
        }
    }

    pub fn range_count(&self, positions: Range<usize>, lo: u64, hi: u64) -> Result<usize> {
        match self {
            Index::Plain(wt) => coc::range_count(wt, positions, lo, hi),
            Index::Full(idx) => idx.range_count(positions, lo, hi),
        }
    }

    pub fn sum(&self) -> u128 {
        match self {
            Index::Plain(wt) => coc::sum_direct(wt),
            Index::Full(idx) => coc::sum_direct_full(idx),
        }
    }

    pub fn space_stats(&self) -> SpaceStats {
        match self {
            Index::Plain(wt) => wt.space_stats(),
            Index::Full(idx) => idx.space_stats(),
        }
    }
}

impl From<WaveletTree> for Index {
    fn from(wt: WaveletTree) -> Self {
        Index::Plain(wt)
    }
}

impl From<RevivalFullIndex> for Index {
    fn from(idx: RevivalFullIndex) -> Self {
        Index::Full(idx)
    }
}

//! Aggregates evaluated on the level bitvectors alone.
//!
//! Level `l` of a width-`N` tree holds bit `N - 1 - l` of every symbol, so a
//! level's popcount weighted by `2^(N-1-l)` is that bit's contribution to the
//! sum. Nothing here decodes a symbol.

use std::ops::Range;

use crate::error::Result;
use crate::revival::RevivalFullIndex;
use crate::wavelet::WaveletTree;

/// Sum of all symbols, as the weighted popcount of the levels.
pub fn sum_direct(wt: &WaveletTree) -> u128 {
    let width = wt.width() as usize;
    wt.levels()
        .iter()
        .enumerate()
        .map(|(level, bv)| (bv.count_ones() as u128) << (width - 1 - level))
        .sum()
}

/// Sum of the original values behind a pattern-coded index.
///
/// Each group contributes `count * fixed_bits` plus, for every free
/// position, the popcount of the corresponding composite level restricted to
/// the group's extent.
pub fn sum_direct_full(idx: &RevivalFullIndex) -> u128 {
    let table = idx.table();
    let wt = idx.composite();
    let width = table.width();
    let k_max = table.k_max();
    let depth = wt.width() - k_max;
    let mut total = 0u128;
    for (g, group) in table.groups().iter().enumerate() {
        let extent = wt.prefix_extent(g as u64, depth);
        if extent.is_empty() {
            continue;
        }
        total += extent.len() as u128 * group.fixed_bits as u128;
        for j in 0..group.residual_width {
            let level = (depth + k_max - 1 - j) as usize;
            let bv = wt.level(level);
            let ones = bv.rank1_unchecked(extent.end) - bv.rank1_unchecked(extent.start);
            // residual bit j lands on the value bit that scatter gives it
            let weight = group.scatter(1 << j, width) & !group.fixed_bits;
            total += ones as u128 * weight as u128;
        }
    }
    total
}

/// Occurrences of `s`.
pub fn count_eq(wt: &WaveletTree, s: u64) -> Result<usize> {
    wt.count(s)
}

/// Positions in `positions` whose symbol lies in `[lo, hi]`.
pub fn range_count(wt: &WaveletTree, positions: Range<usize>, lo: u64, hi: u64) -> Result<usize> {
    wt.range_count(positions, lo, hi)
}

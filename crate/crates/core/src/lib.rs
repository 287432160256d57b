//! Wavelet trees over `[0, 2^N)` whose root-to-leaf paths are the binary
//! expansions of the symbols they store.
//!
//! - [`bitvec`]: packed bitvector with rank/select.
//! - [`wavelet`]: the levelwise tree, with access, rank, select and range
//!   counting.
//! - [`revival`]: path/value identity checks and the pattern codec for
//!   arbitrary alphabets.
//! - [`coc`]: aggregates computed from level popcounts.
//! - [`cram_vm`]: a register machine addressing a compressed store.
//! - [`storage`]: the binary index format.

pub mod bitvec;
pub mod coc;
pub mod cram_vm;
mod error;
mod index;
pub mod revival;
pub mod storage;
pub mod wavelet;

pub use bitvec::BitVector;
pub use error::{Error, Result};
pub use index::Index;
pub use revival::{
    dyadic_decompose, extract_patterns, verify_equal, EqualityReport, PatternGroup, PatternTable,
    RevivalFullIndex,
};
pub use storage::{read_index, write_index, StorageError};
pub use wavelet::{BitPath, SpaceStats, WaveletTree};

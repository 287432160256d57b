use thiserror::Error;

/// Errors raised by the query and codec operations.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("position {index} out of range for length {len}")]
    OutOfRange { index: usize, len: usize },

    #[error("symbol {value} at position {position} does not fit in {width} bits")]
    SymbolOutOfDomain {
        position: usize,
        value: u64,
        width: u32,
    },

    #[error("symbol {value} does not fit in {width} bits")]
    SymbolTooWide { value: u64, width: u32 },

    #[error("width {0} is not in 1..=64")]
    InvalidWidth(u32),

    #[error("occurrence {k} not found (only {count} present)")]
    NotFound { k: usize, count: usize },

    #[error("length mismatch: index holds {index} symbols, reference holds {reference}")]
    LengthMismatch { index: usize, reference: usize },

    #[error("symbol {value} at position {position} is not covered by any pattern group")]
    NotInTable { position: usize, value: u64 },

    #[error("empty alphabet")]
    EmptyAlphabet,

    #[error("composite code width {0} exceeds 64 bits")]
    CompositeTooWide(u32),

    #[error("corrupt composite code {code} at position {position}")]
    CorruptCode { position: usize, code: u64 },

    #[error("invalid range: {0}")]
    InvalidRange(String),

    #[error("invalid pattern table: {0}")]
    InvalidTable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// True when `value` is representable in `width` bits.
#[inline]
pub(crate) fn fits(value: u64, width: u32) -> bool {
    width >= 64 || value >> width == 0
}

/// Mask with the low `width` bits set.
#[inline]
pub(crate) fn low_mask(width: u32) -> u64 {
    if width >= 64 {
        u64::MAX
    } else {
        (1u64 << width) - 1
    }
}

//! Binary index format.
//!
//! ```text
//! "RWTI" | version u8 = 1 | kind u8 (0 plain, 1 pattern-coded) | width u8 | len u64
//! width levels, each ceil(len / 64) u64 words
//! kind 1 only: "PTN1" | original width u8 | group count u16
//!              per group: base u64 | fixed_mask u64 | fixed_bits u64 | residual_width u8
//! ```
//!
//! Integers are little-endian and bits inside a word are least-significant
//! first. Rank directories are rebuilt on load.

use std::io::{self, Read, Write};

use thiserror::Error;

use crate::bitvec::BitVector;
use crate::index::Index;
use crate::revival::{PatternGroup, PatternTable, RevivalFullIndex};
use crate::wavelet::WaveletTree;

pub const MAGIC: [u8; 4] = *b"RWTI";
pub const PATTERN_MAGIC: [u8; 4] = *b"PTN1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 15;

const KIND_PLAIN: u8 = 0;
const KIND_FULL: u8 = 1;

#[derive(Debug, Error)]
pub enum StorageError {
    #[error("i/o error: {0}")]
    Io(#[from] io::Error),
    #[error("stream ended early")]
    Truncated,
    #[error("bad magic {0:?}")]
    BadMagic([u8; 4]),
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),
    #[error("unknown index kind {0}")]
    UnknownKind(u8),
    #[error("invalid index: {0}")]
    Invalid(String),
}

impl From<crate::Error> for StorageError {
    fn from(e: crate::Error) -> Self {
        StorageError::Invalid(e.to_string())
    }
}

/// Serializes `index`, returning the number of bytes written.
pub fn write_index<W: Write>(index: &Index, sink: &mut W) -> Result<usize, StorageError> {
    let mut out = Vec::new();
    let (kind, tree) = match index {
        Index::Plain(wt) => (KIND_PLAIN, wt),
        Index::Full(idx) => (KIND_FULL, idx.composite()),
    };
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(kind);
    out.push(tree.width() as u8);
    out.extend_from_slice(&(tree.len() as u64).to_le_bytes());
    for level in tree.levels() {
        for w in level.words() {
            out.extend_from_slice(&w.to_le_bytes());
        }
    }
    if let Index::Full(idx) = index {
        let table = idx.table();
        let count = u16::try_from(table.groups().len())
            .map_err(|_| StorageError::Invalid("more than 65535 pattern groups".into()))?;
        out.extend_from_slice(&PATTERN_MAGIC);
        out.push(table.width() as u8);
        out.extend_from_slice(&count.to_le_bytes());
        for g in table.groups() {
            out.extend_from_slice(&g.base.to_le_bytes());
            out.extend_from_slice(&g.fixed_mask.to_le_bytes());
            out.extend_from_slice(&g.fixed_bits.to_le_bytes());
            out.push(g.residual_width as u8);
        }
    }
    sink.write_all(&out)?;
    Ok(out.len())
}

pub fn to_bytes(index: &Index) -> Vec<u8> {
    let mut out = Vec::new();
    write_index(index, &mut out).expect("writing to a Vec cannot fail");
    out
}

struct Reader<R> {
    inner: R,
}

impl<R: Read> Reader<R> {
    fn bytes<const N: usize>(&mut self) -> Result<[u8; N], StorageError> {
        let mut buf = [0u8; N];
        self.inner.read_exact(&mut buf).map_err(|e| match e.kind() {
            io::ErrorKind::UnexpectedEof => StorageError::Truncated,
            _ => StorageError::Io(e),
        })?;
        Ok(buf)
    }

    fn u8(&mut self) -> Result<u8, StorageError> {
        Ok(self.bytes::<1>()?[0])
    }

    fn u16(&mut self) -> Result<u16, StorageError> {
        Ok(u16::from_le_bytes(self.bytes()?))
    }

    fn u64(&mut self) -> Result<u64, StorageError> {
        Ok(u64::from_le_bytes(self.bytes()?))
    }
}

/// Parses an index, re-validating every structural invariant.
pub fn read_index<R: Read>(source: R) -> Result<Index, StorageError> {
    let mut r = Reader { inner: source };
    let magic = r.bytes::<4>()?;
    if magic != MAGIC {
        return Err(StorageError::BadMagic(magic));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(StorageError::UnsupportedVersion(version));
    }
    let kind = r.u8()?;
    if kind != KIND_PLAIN && kind != KIND_FULL {
        return Err(StorageError::UnknownKind(kind));
    }
    let width = r.u8()? as u32;
    if !(1..=64).contains(&width) {
        return Err(StorageError::Invalid(format!("width {width}")));
    }
    let len = usize::try_from(r.u64()?)
        .map_err(|_| StorageError::Invalid("length exceeds address space".into()))?;
    let words_per_level = len.div_ceil(64);
    let mut levels = Vec::with_capacity(width as usize);
    for level in 0..width {
        let mut words = Vec::new();
        for _ in 0..words_per_level {
            words.push(r.u64()?);
        }
        let bv = BitVector::from_words(words, len).ok_or_else(|| {
            StorageError::Invalid(format!("level {level} has bits set past the end"))
        })?;
        levels.push(bv);
    }
    let tree = WaveletTree::from_levels(width, len, levels)?;
    let index = if kind == KIND_PLAIN {
        Index::Plain(tree)
    } else {
        let magic = r.bytes::<4>()?;
        if magic != PATTERN_MAGIC {
            return Err(StorageError::BadMagic(magic));
        }
        let symbol_width = r.u8()? as u32;
        let count = r.u16()?;
        let mut groups = Vec::with_capacity(count as usize);
        for _ in 0..count {
            groups.push(PatternGroup {
                base: r.u64()?,
                fixed_mask: r.u64()?,
                fixed_bits: r.u64()?,
                residual_width: r.u8()? as u32,
            });
        }
        let sorted = groups.windows(2).all(|w| w[0].base < w[1].base);
        let table = PatternTable::new(symbol_width, groups)?;
        if !sorted {
            return Err(StorageError::Invalid("pattern groups not sorted by base".into()));
        }
        Index::Full(RevivalFullIndex::from_parts(table, tree)?)
    };
    let mut trailing = [0u8; 1];
    if r.inner.read(&mut trailing)? != 0 {
        return Err(StorageError::Invalid("trailing bytes after index".into()));
    }
    Ok(index)
}

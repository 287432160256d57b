//! A straight-line register machine whose memory is a compressed index.
//!
//! Two address modes reach the store: index mode (`GATHER`, position to
//! value, one bit read per tree level) and value mode (`RANK`/`SELECT`,
//! symbol to counts and positions). `SUM` is the weighted-popcount
//! aggregate. Registers are eight wrapping 64-bit words.

use std::fmt;

use thiserror::Error;

use crate::coc;
use crate::index::Index;
use crate::wavelet::WaveletTree;

pub const NUM_REGS: usize = 8;

/// Register number in `0..8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Reg(u8);

impl Reg {
    pub fn new(n: u8) -> Option<Self> {
        (n < NUM_REGS as u8).then_some(Reg(n))
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for Reg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "r{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Instr {
    LoadI { rd: Reg, imm: u64 },
    /// `rd <- seq[ri]`
    Gather { rd: Reg, ri: Reg },
    /// `rd <- occurrences of rs in [0, ri)`
    Rank { rd: Reg, rs: Reg, ri: Reg },
    /// `rd <- position of occurrence rk of rs`
    Select { rd: Reg, rs: Reg, rk: Reg },
    Sum { rd: Reg },
    Len { rd: Reg },
    Add { rd: Reg, rs: Reg, rt: Reg },
    Sub { rd: Reg, rs: Reg, rt: Reg },
    Mul { rd: Reg, rs: Reg, rt: Reg },
    Print { rd: Reg },
    Halt,
}

impl fmt::Display for Instr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Instr::LoadI { rd, imm } => write!(f, "LOADI {rd} {imm}"),
            Instr::Gather { rd, ri } => write!(f, "GATHER {rd} {ri}"),
            Instr::Rank { rd, rs, ri } => write!(f, "RANK {rd} {rs} {ri}"),
            Instr::Select { rd, rs, rk } => write!(f, "SELECT {rd} {rs} {rk}"),
            Instr::Sum { rd } => write!(f, "SUM {rd}"),
            Instr::Len { rd } => write!(f, "LEN {rd}"),
            Instr::Add { rd, rs, rt } => write!(f, "ADD {rd} {rs} {rt}"),
            Instr::Sub { rd, rs, rt } => write!(f, "SUB {rd} {rs} {rt}"),
            Instr::Mul { rd, rs, rt } => write!(f, "MUL {rd} {rs} {rt}"),
            Instr::Print { rd } => write!(f, "PRINT {rd}"),
            Instr::Halt => f.write_str("HALT"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    instructions: Vec<Instr>,
}

impl Program {
    pub fn new(instructions: Vec<Instr>) -> Self {
        Self { instructions }
    }

    pub fn instructions(&self) -> &[Instr] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in &self.instructions {
            writeln!(f, "{i}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VmError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("trap at pc={pc}: {message}")]
    Trap { pc: usize, message: String },
    #[error("step limit of {0} exceeded")]
    Timeout(usize),
    #[error("step limit must be positive")]
    ZeroStepLimit,
}

fn parse_reg(tok: &str) -> Result<Reg, String> {
    tok.strip_prefix(['r', 'R'])
        .and_then(|n| n.parse::<u8>().ok())
        .and_then(Reg::new)
        .ok_or_else(|| format!("expected register r0-r7, found `{tok}`"))
}

fn parse_imm(tok: &str) -> Result<u64, String> {
    let parsed = match tok.strip_prefix("0x") {
        Some(hex) => u64::from_str_radix(hex, 16),
        None => tok.parse::<u64>(),
    };
    parsed.map_err(|_| format!("expected 64-bit unsigned immediate, found `{tok}`"))
}

/// Parses program text: one instruction per line, `#` starts a comment line.
pub fn parse(text: &str) -> Result<Program, VmError> {
    let mut instructions = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| VmError::Parse {
            line: lineno + 1,
            message,
        };
        let mut toks = line.split_whitespace();
        let op = toks.next().unwrap().to_ascii_uppercase();
        let args: Vec<&str> = toks.collect();
        let arity = match op.as_str() {
            "HALT" => 0,
            "SUM" | "LEN" | "PRINT" => 1,
            "LOADI" | "GATHER" => 2,
            "RANK" | "SELECT" | "ADD" | "SUB" | "MUL" => 3,
            _ => return Err(err(format!("unknown mnemonic `{op}`"))),
        };
        if args.len() != arity {
            return Err(err(format!(
                "{op} takes {arity} operands, found {}",
                args.len()
            )));
        }
        let reg = |i: usize| parse_reg(args[i]).map_err(err);
        let instr = match op.as_str() {
            "HALT" => Instr::Halt,
            "SUM" => Instr::Sum { rd: reg(0)? },
            "LEN" => Instr::Len { rd: reg(0)? },
            "PRINT" => Instr::Print { rd: reg(0)? },
            "LOADI" => Instr::LoadI {
                rd: reg(0)?,
                imm: parse_imm(args[1]).map_err(err)?,
            },
            "GATHER" => Instr::Gather {
                rd: reg(0)?,
                ri: reg(1)?,
            },
            "RANK" => Instr::Rank {
                rd: reg(0)?,
                rs: reg(1)?,
                ri: reg(2)?,
            },
            "SELECT" => Instr::Select {
                rd: reg(0)?,
                rs: reg(1)?,
                rk: reg(2)?,
            },
            "ADD" => Instr::Add {
                rd: reg(0)?,
                rs: reg(1)?,
                rt: reg(2)?,
            },
            "SUB" => Instr::Sub {
                rd: reg(0)?,
                rs: reg(1)?,
                rt: reg(2)?,
            },
            "MUL" => Instr::Mul {
                rd: reg(0)?,
                rs: reg(1)?,
                rt: reg(2)?,
            },
            _ => unreachable!(),
        };
        instructions.push(instr);
    }
    Ok(Program { instructions })
}

/// The memory side of the machine.
pub trait CompressedStore {
    /// Bits per stored symbol; one bit per level is read by a gather.
    fn width(&self) -> u32;
    fn len(&self) -> usize;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
    fn gather(&self, i: usize) -> crate::Result<u64>;
    fn rank(&self, s: u64, pos: usize) -> crate::Result<usize>;
    fn select(&self, s: u64, k: usize) -> crate::Result<usize>;
    fn sum(&self) -> u128;
}

impl CompressedStore for WaveletTree {
    fn width(&self) -> u32 {
        WaveletTree::width(self)
    }
    fn len(&self) -> usize {
        WaveletTree::len(self)
    }
    fn gather(&self, i: usize) -> crate::Result<u64> {
        self.gather_path(i).map(|p| p.to_value())
    }
    fn rank(&self, s: u64, pos: usize) -> crate::Result<usize> {
        WaveletTree::rank(self, s, pos)
    }
    fn select(&self, s: u64, k: usize) -> crate::Result<usize> {
        WaveletTree::select(self, s, k)
    }
    fn sum(&self) -> u128 {
        coc::sum_direct(self)
    }
}

impl CompressedStore for Index {
    fn width(&self) -> u32 {
        self.tree_width()
    }
    fn len(&self) -> usize {
        Index::len(self)
    }
    fn gather(&self, i: usize) -> crate::Result<u64> {
        self.access(i)
    }
    fn rank(&self, s: u64, pos: usize) -> crate::Result<usize> {
        Index::rank(self, s, pos)
    }
    fn select(&self, s: u64, k: usize) -> crate::Result<usize> {
        Index::select(self, s, k)
    }
    fn sum(&self) -> u128 {
        Index::sum(self)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct VmState {
    pub regs: [u64; NUM_REGS],
    pub output: Vec<u64>,
    pub pc: usize,
    /// Level-bitvector bits read by gathers.
    pub cost: u64,
    pub halted: bool,
}

/// Runs `program` against `store` for at most `step_limit` instructions.
pub fn run<S: CompressedStore + ?Sized>(
    program: &Program,
    store: &S,
    step_limit: usize,
) -> Result<VmState, VmError> {
    if step_limit == 0 {
        return Err(VmError::ZeroStepLimit);
    }
    let mut st = VmState::default();
    let mut steps = 0;
    while let Some(&instr) = program.instructions.get(st.pc) {
        if steps == step_limit {
            return Err(VmError::Timeout(step_limit));
        }
        steps += 1;
        let pc = st.pc;
        let trap = |e: crate::Error| VmError::Trap {
            pc,
            message: e.to_string(),
        };
        let r = st.regs;
        match instr {
            Instr::LoadI { rd, imm } => st.regs[rd.index()] = imm,
            Instr::Gather { rd, ri } => {
                let pos = to_usize(r[ri.index()]);
                st.regs[rd.index()] = store.gather(pos).map_err(trap)?;
                st.cost += store.width() as u64;
            }
            Instr::Rank { rd, rs, ri } => {
                let pos = to_usize(r[ri.index()]);
                st.regs[rd.index()] = store.rank(r[rs.index()], pos).map_err(trap)? as u64;
            }
            Instr::Select { rd, rs, rk } => {
                let k = to_usize(r[rk.index()]);
                st.regs[rd.index()] = store.select(r[rs.index()], k).map_err(trap)? as u64;
            }
            Instr::Sum { rd } => st.regs[rd.index()] = store.sum() as u64,
            Instr::Len { rd } => st.regs[rd.index()] = store.len() as u64,
            Instr::Add { rd, rs, rt } => {
                st.regs[rd.index()] = r[rs.index()].wrapping_add(r[rt.index()])
            }
            Instr::Sub { rd, rs, rt } => {
                st.regs[rd.index()] = r[rs.index()].wrapping_sub(r[rt.index()])
            }
            Instr::Mul { rd, rs, rt } => {
                st.regs[rd.index()] = r[rs.index()].wrapping_mul(r[rt.index()])
            }
            Instr::Print { rd } => st.output.push(r[rd.index()]),
            Instr::Halt => {
                st.halted = true;
                return Ok(st);
            }
        }
        st.pc += 1;
    }
    Ok(st)
}

// positions beyond the address space are out of range for any store
fn to_usize(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn store() -> WaveletTree {
        WaveletTree::new(&[2, 0, 3, 1], 2).unwrap()
    }

    #[test]
    fn parse_examples() {
        assert_eq!(parse("LOADI r0 3\nGATHER r1 r0\nPRINT r1\nHALT").unwrap().len(), 4);
        assert_eq!(parse("SUM r0\nPRINT r0\nHALT").unwrap().len(), 3);
        assert_eq!(
            parse("# header\n\n  sum r0\n").unwrap().instructions(),
            &[Instr::Sum { rd: Reg(0) }]
        );
        assert!(matches!(parse("BADOP r0"), Err(VmError::Parse { line: 1, .. })));
        assert!(matches!(parse("HALT\nSUM r8"), Err(VmError::Parse { line: 2, .. })));
        assert!(matches!(parse("LOADI r0"), Err(VmError::Parse { line: 1, .. })));
        assert!(matches!(parse("LOADI r0 -1"), Err(VmError::Parse { .. })));
        assert!(matches!(parse("LOADI r0 18446744073709551616"), Err(VmError::Parse { .. })));
        assert!(matches!(parse("ADD x0 r1 r2"), Err(VmError::Parse { .. })));
    }

    #[test]
    fn display_reparses() {
        let src = "LOADI r0 7\nGATHER r1 r0\nRANK r2 r1 r0\nSELECT r3 r1 r2\nSUM r4\nLEN r5\nADD r6 r1 r2\nSUB r6 r6 r1\nMUL r7 r6 r6\nPRINT r7\nHALT\n";
        let p = parse(src).unwrap();
        assert_eq!(p.to_string(), src);
    }

    #[test]
    fn gather_and_sum() {
        let p = parse("LOADI r0 3\nGATHER r1 r0\nPRINT r1\nHALT").unwrap();
        let st = run(&p, &store(), 100).unwrap();
        assert_eq!(st.output, vec![1]);
        assert_eq!(st.cost, 2);
        assert!(st.halted);
        let p = parse("SUM r0\nPRINT r0\nHALT").unwrap();
        assert_eq!(run(&p, &store(), 100).unwrap().output, vec![6]);
    }

    #[test]
    fn value_mode() {
        let p = parse("LOADI r0 3\nLEN r1\nRANK r2 r0 r1\nLOADI r3 0\nSELECT r4 r0 r3\nPRINT r2\nPRINT r4").unwrap();
        let st = run(&p, &store(), 100).unwrap();
        assert_eq!(st.output, vec![1, 2]);
        assert!(!st.halted);
        assert_eq!(st.cost, 0);
    }

    #[test]
    fn traps() {
        let p = parse("LOADI r0 9\nGATHER r1 r0\nHALT").unwrap();
        assert!(matches!(run(&p, &store(), 100), Err(VmError::Trap { pc: 1, .. })));
        let p = parse("LOADI r0 4\nRANK r1 r0 r0").unwrap();
        assert!(matches!(run(&p, &store(), 100), Err(VmError::Trap { pc: 1, .. })));
        let p = parse("LOADI r0 1\nSELECT r1 r0 r0").unwrap();
        assert!(matches!(run(&p, &store(), 100), Err(VmError::Trap { pc: 1, .. })));
        let p = parse("LEN r0\nLEN r0\nLEN r0").unwrap();
        assert_eq!(run(&p, &store(), 2), Err(VmError::Timeout(2)));
        assert_eq!(run(&p, &store(), 0), Err(VmError::ZeroStepLimit));
    }

    #[test]
    fn wrapping_arithmetic() {
        let p = parse("LOADI r0 0\nLOADI r1 1\nSUB r2 r0 r1\nMUL r3 r2 r2\nADD r4 r2 r1\nPRINT r2\nPRINT r3\nPRINT r4").unwrap();
        let st = run(&p, &store(), 100).unwrap();
        assert_eq!(st.output, vec![u64::MAX, 1, 0]);
    }
}

//! The `revwt` command-line tool.

use std::collections::BTreeSet;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};

use revwt::cram_vm;
use revwt::{extract_patterns, read_index, verify_equal, write_index, Index, RevivalFullIndex, WaveletTree};

#[derive(Debug, Parser)]
#[command(name = "revwt", version, about = "Wavelet-tree indexes whose paths are their values")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Mode {
    /// Every byte is one symbol.
    Bytes,
    /// Whitespace-separated decimal integers.
    U64text,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build an index from an input file.
    Build {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        width: Option<u32>,
        /// Factor shared bit patterns out before indexing.
        #[arg(long)]
        full: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Symbol at position I.
    Access { index: PathBuf, i: usize },
    /// Occurrences of S before position POS.
    Rank { index: PathBuf, s: u64, pos: usize },
    /// Position of the K-th (zero-based) occurrence of S.
    Select { index: PathBuf, s: u64, k: usize },
    /// Sum of all symbols, from level popcounts.
    Sum { index: PathBuf },
    /// Occurrences of S.
    Count { index: PathBuf, s: u64 },
    /// Positions in [L, R) holding a symbol in [LO, HI].
    Rangecount {
        index: PathBuf,
        l: usize,
        r: usize,
        lo: u64,
        hi: u64,
    },
    /// Check an index against the sequence it was built from.
    Verify {
        index: PathBuf,
        #[arg(long)]
        against: PathBuf,
        #[arg(long, value_enum, default_value = "bytes")]
        mode: Mode,
    },
    /// Print the pattern table an input would be encoded with.
    Patterns {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum)]
        mode: Mode,
        #[arg(long)]
        width: Option<u32>,
    },
    /// Space accounting.
    Stats { index: PathBuf },
    /// Run a program against the index.
    Vm {
        index: PathBuf,
        program: PathBuf,
        #[arg(long, default_value_t = 1_000_000)]
        step_limit: usize,
    },
}

/// Runs the tool on `argv` (including the program name); returns the exit
/// code. Results go to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() {
                let _ = write!(err, "{}", e.render());
                2
            } else {
                let _ = write!(out, "{}", e.render());
                0
            };
            return code;
        }
    };
    match execute(cli.command, out) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
    }
}

fn read_symbols(path: &Path, mode: Mode) -> Result<Vec<u64>> {
    let data = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    match mode {
        Mode::Bytes => Ok(data.into_iter().map(u64::from).collect()),
        Mode::U64text => {
            let text = std::str::from_utf8(&data).context("input is not UTF-8")?;
            text.split_whitespace()
                .map(|tok| tok.parse::<u64>().with_context(|| format!("not a decimal u64: `{tok}`")))
                .collect()
        }
    }
}

fn resolve_width(symbols: &[u64], mode: Mode, width: Option<u32>) -> Result<u32> {
    let width = match (width, mode) {
        (Some(w), _) => w,
        (None, Mode::Bytes) => 8,
        (None, Mode::U64text) => {
            let max = symbols.iter().copied().max().unwrap_or(0);
            (u64::BITS - max.leading_zeros()).max(1)
        }
    };
    ensure!((1..=64).contains(&width), "width {width} is not in 1..=64");
    Ok(width)
}

fn load(path: &Path) -> Result<Index> {
    let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    read_index(BufReader::new(file)).with_context(|| format!("loading {}", path.display()))
}

fn execute(command: Command, out: &mut dyn Write) -> Result<i32> {
    match command {
        Command::Build {
            input,
            mode,
            width,
            full,
            out: target,
        } => {
            let symbols = read_symbols(&input, mode)?;
            let width = resolve_width(&symbols, mode, width)?;
            let index = if full {
                Index::Full(RevivalFullIndex::from_sequence(&symbols, width)?)
            } else {
                Index::Plain(WaveletTree::new(&symbols, width)?)
            };
            let file = File::create(&target).with_context(|| format!("creating {}", target.display()))?;
            let mut sink = BufWriter::new(file);
            write_index(&index, &mut sink)?;
            sink.flush()?;
        }
        Command::Access { index, i } => writeln!(out, "{}", load(&index)?.access(i)?)?,
        Command::Rank { index, s, pos } => writeln!(out, "{}", load(&index)?.rank(s, pos)?)?,
        Command::Select { index, s, k } => writeln!(out, "{}", load(&index)?.select(s, k)?)?,
        Command::Sum { index } => writeln!(out, "{}", load(&index)?.sum())?,
        Command::Count { index, s } => writeln!(out, "{}", load(&index)?.count(s)?)?,
        Command::Rangecount { index, l, r, lo, hi } => {
            writeln!(out, "{}", load(&index)?.range_count(l..r, lo, hi)?)?
        }
        Command::Verify {
            index,
            against,
            mode,
        } => {
            let index = load(&index)?;
            let original = read_symbols(&against, mode)?;
            let violation = match &index {
                Index::Plain(wt) => verify_equal(wt, &original)?.first_violation,
                Index::Full(idx) => {
                    ensure!(
                        idx.len() == original.len(),
                        "length mismatch: index holds {} symbols, reference holds {}",
                        idx.len(),
                        original.len()
                    );
                    let decoded = idx.decode()?;
                    decoded.iter().zip(&original).position(|(a, b)| a != b)
                }
            };
            return Ok(match violation {
                None => {
                    writeln!(out, "OK")?;
                    0
                }
                Some(i) => {
                    writeln!(out, "violation at position {i}")?;
                    1
                }
            });
        }
        Command::Patterns { input, mode, width } => {
            let symbols = read_symbols(&input, mode)?;
            let width = resolve_width(&symbols, mode, width)?;
            let alphabet: BTreeSet<u64> = symbols.into_iter().collect();
            if alphabet.is_empty() {
                bail!("input is empty");
            }
            write!(out, "{}", extract_patterns(&alphabet, width)?)?;
        }
        Command::Stats { index } => {
            let stats = load(&index)?.space_stats();
            writeln!(out, "payload_bits={}", stats.payload_bits)?;
            writeln!(out, "overhead_bits={}", stats.overhead_bits)?;
            writeln!(out, "raw_bits={}", stats.raw_bits)?;
            writeln!(out, "ratio={:.6}", stats.ratio)?;
        }
        Command::Vm {
            index,
            program,
            step_limit,
        } => {
            let index = load(&index)?;
            let text = fs::read_to_string(&program).with_context(|| format!("reading {}", program.display()))?;
            let program = cram_vm::parse(&text)?;
            let state = cram_vm::run(&program, &index, step_limit)?;
            for v in &state.output {
                writeln!(out, "{v}")?;
            }
            writeln!(out, "cost={}", state.cost)?;
        }
    }
    Ok(0)
}

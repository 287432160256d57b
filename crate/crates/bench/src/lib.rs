//! Input generators shared by the benchmarks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `n` uniform symbols over `[0, 2^width)`, reproducible from `seed`.
pub fn uniform(n: usize, width: u32, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| rng.gen_range(0..1u64 << width)).collect()
}

/// `n` symbols drawn from the printable ASCII letters.
pub fn letters(n: usize, seed: u64) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let c = rng.gen_range(0..52u64);
            if c < 26 { b'A' as u64 + c } else { b'a' as u64 + c - 26 }
        })
        .collect()
}

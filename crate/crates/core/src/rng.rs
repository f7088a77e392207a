//! Seeded random number generation.
//!
//! Every stochastic routine in the crate takes either an explicit `u64` seed
//! or a `&mut Rng` derived from one. The generator is ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`, whose output stream is fixed by the
//! `rand_chacha` crate and does not change across platforms or runs.
//!
//! Uniform variates are produced here rather than through `rand`'s
//! distribution machinery, so the stream contract is fully defined by this
//! module: `uniform(rng) = (next_u64 >> 11) * 2^-53`.

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};

/// The generator used throughout the crate.
pub type Rng = ChaCha8Rng;

pub fn seeded(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform draw in `[0, 1)` with 53 bits of precision.
pub fn uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// Uniform integer in `0..n` by inversion of [`uniform`]. `n` must be positive.
pub fn index<R: RngCore + ?Sized>(rng: &mut R, n: usize) -> usize {
    debug_assert!(n > 0);
    let i = (uniform(rng) * n as f64) as usize;
    i.min(n - 1)
}

/// Samples an index from a discrete distribution by inverse CDF.
///
/// Round-off in the cumulative sum is absorbed by the last index with
/// positive probability.
pub fn categorical<R: RngCore + ?Sized>(rng: &mut R, probs: &[f64]) -> usize {
    let u = uniform(rng);
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last_positive = i;
            if u < acc {
                return i;
            }
        }
    }
    last_positive
}

pub fn standard_normal<R: RngCore>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

/// Derives the seed of stream `index` from a base seed (`base + index`,
/// wrapping).
pub fn derive(base: u64, index: u64) -> u64 {
    base.wrapping_add(index)
}

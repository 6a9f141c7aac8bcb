//! Connections on bundles with structure groupoid G⋉ℝⁿ for G = SO(2), SO(3),
//! given through local connection data A_i(σ, m)(u) ∈ 𝔤.

pub mod family;
pub mod forms;
pub mod lie;
pub mod scenario;
pub mod transport;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericError {
    #[error("input: {0}")]
    Input(String),
    #[error("outside the chart domain: {0}")]
    Domain(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("non-finite values: {0}")]
    Divergence(String),
}

/// Evaluates `f` on `n` samples in parallel. Sample k draws from stream k of a
/// ChaCha8 generator seeded with `seed`, so results do not depend on scheduling.
pub fn sweep<T: Send>(n: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> T + Sync) -> Vec<T> {
    (0..n)
        .into_par_iter()
        .map(|k| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(k as u64);
            f(&mut rng)
        })
        .collect()
}

/// Largest finite value of a sweep; any error or non-finite value gives +∞.
pub fn sweep_max(n: usize, seed: u64, f: impl Fn(&mut ChaCha8Rng) -> Result<f64, NumericError> + Sync) -> f64 {
    sweep(n, seed, f)
        .into_iter()
        .map(|r| match r {
            Ok(x) if x.is_finite() => x,
            _ => f64::INFINITY,
        })
        .fold(0.0, f64::max)
}

/// The generator behind every seeded sample outside [`sweep`].
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

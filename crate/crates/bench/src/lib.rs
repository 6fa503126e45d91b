//! Fixtures shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rcm_core::sampler::{ChainState, HeatBath};
use rcm_core::ModelParams;

/// A chain state after `sweeps` sweeps from the empty configuration,
/// together with its kernel and generator.
pub fn warmed_chain(
    n: usize,
    lambda: f64,
    q: f64,
    sweeps: usize,
    seed: u64,
) -> (HeatBath, ChainState, ChaCha8Rng) {
    let kernel = HeatBath::new(ModelParams::new(n, lambda, q).expect("valid parameters"))
        .expect("supported size");
    let mut state = ChainState::empty(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut order = Vec::new();
    for _ in 0..sweeps {
        kernel.sweep(&mut state, &mut order, &mut rng);
    }
    (kernel, state, rng)
}

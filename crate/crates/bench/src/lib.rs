//! Fixtures shared by the benchmarks.

use crossdrift::harness::initial_state;
use crossdrift::measures::UniformComponent;
use crossdrift::{InitialDensity, ParticleState, PiecewiseDensity};

/// Two disjoint blocks, `uniform(-2, -1)` against `uniform(1, 2)`.
pub fn blocks(n: usize) -> ParticleState {
    let rho = InitialDensity::uniform(-2.0, -1.0).unwrap();
    let eta = InitialDensity::uniform(1.0, 2.0).unwrap();
    initial_state(&rho, &eta, n).unwrap()
}

/// Interleaved mixtures, which produce many crossings before sticking.
pub fn interleaved(n: usize) -> ParticleState {
    let comp = |a: f64| UniformComponent { weight: 0.25, a, b: a + 0.5 };
    let rho = InitialDensity::mixture(vec![comp(0.0), comp(1.0), comp(2.0), comp(3.0)]).unwrap();
    let eta = InitialDensity::mixture(vec![comp(0.5), comp(1.5), comp(2.5), comp(3.5)]).unwrap();
    initial_state(&rho, &eta, n).unwrap()
}

/// Reconstruction of `n` evenly spaced particles on `[a, a + 1]`.
pub fn grid_density(n: usize, a: f64) -> PiecewiseDensity {
    let pos: Vec<f64> = (0..n).map(|k| a + k as f64 / (n - 1) as f64).collect();
    PiecewiseDensity::reconstruct(&pos).unwrap()
}

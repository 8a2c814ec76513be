//! Shared fixtures for the criterion benchmarks.

use hombridge_core::{initial_guess, Builtin, Grid, NonlinearitySpec, Profile};

pub fn exponential() -> NonlinearitySpec {
    NonlinearitySpec::builtin(Builtin::Exponential)
}

/// The trough-centred initial guess at `c` on `[-T, T)` with `n` points and
/// amplitude `factor·L(f, c)`.
pub fn guess(c: f64, half_length: f64, n: usize, factor: f64) -> Profile {
    let f = exponential();
    let grid = Grid::new(half_length, n).expect("valid grid");
    let l = hombridge_core::lower_bound(&f, c, 1e6).expect("admissible").finite().expect("finite bound");
    initial_guess(&f, c, &grid, factor * l).expect("admissible")
}

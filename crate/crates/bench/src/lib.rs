//! Shared fixtures for the criterion benches.

use odrf_core::eval::{make_target, sample, TargetSpec};
use odrf_core::{Dataset, Task};

/// `n` noisy samples of a sine ridge along the diagonal of `[0,1]^p`.
pub fn ridge_data(n: usize, p: usize, seed: u64) -> Dataset {
    let target = make_target(&TargetSpec::diagonal_sine(p, 4.0, 0.1), 0).expect("valid spec");
    sample(&target, n, seed).expect("valid sample")
}

/// Binary labels drawn from the same ridge rescaled to `[0.1, 0.9]`.
pub fn ridge_labels(n: usize, p: usize, seed: u64) -> Dataset {
    let mut spec = TargetSpec::diagonal_sine(p, 4.0, 0.0);
    spec.amplitude = 0.4;
    spec.intercept = 0.5;
    spec.task = Task::Classification;
    let target = make_target(&spec, 0).expect("valid spec");
    sample(&target, n, seed).expect("valid sample")
}

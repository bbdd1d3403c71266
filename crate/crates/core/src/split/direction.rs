//! Direction estimation for an oblique cut on a coordinate subset.
//!
//! Regression nodes use ridge least squares of the centered response on the
//! centered features; classification nodes use a few ridge-penalized IRLS
//! steps of logistic regression. Either way only the direction of the slope
//! vector matters, so it is returned on the unit sphere.

use nalgebra::{DMatrix, DVector};

use super::criterion::Criterion;
use super::threshold::best_threshold;
use crate::data::Task;

/// Slope vectors with a smaller norm are treated as zero.
pub const ZERO_NORM: f64 = 1e-12;
const WEIGHT_MIN: f64 = 1e-6;
const WEIGHT_MAX: f64 = 0.25;

/// `features` is row-major `N x q`. Always returns a unit vector of length `q`.
pub fn fit_direction(
    features: &[f64],
    q: usize,
    y: &[f64],
    task: Task,
    lambda: f64,
    irls_steps: usize,
) -> Vec<f64> {
    assert!(q >= 1 && features.len() == y.len() * q);
    if q == 1 {
        return vec![1.0];
    }
    let slope = match task {
        Task::Regression => ridge_slope(features, q, y, lambda),
        Task::Classification => logistic_slope(features, q, y, lambda, irls_steps),
    };
    match slope.and_then(normalized) {
        Some(theta) => theta,
        None => fallback_axis(features, q, y, task),
    }
}

fn normalized(v: Vec<f64>) -> Option<Vec<f64>> {
    let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
    if !norm.is_finite() || norm < ZERO_NORM {
        return None;
    }
    Some(v.into_iter().map(|c| c / norm).collect())
}

fn column_means(features: &[f64], q: usize) -> Vec<f64> {
    let n = features.len() / q;
    let mut means = vec![0.0; q];
    for row in features.chunks_exact(q) {
        for (m, v) in means.iter_mut().zip(row) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n as f64);
    means
}

fn ridge_slope(features: &[f64], q: usize, y: &[f64], lambda: f64) -> Option<Vec<f64>> {
    let means = column_means(features, q);
    let y_mean = y.iter().sum::<f64>() / y.len() as f64;
    let mut gram = DMatrix::<f64>::zeros(q, q);
    let mut rhs = DVector::<f64>::zeros(q);
    let mut centered = vec![0.0; q];
    for (row, &yi) in features.chunks_exact(q).zip(y) {
        for (c, (v, m)) in centered.iter_mut().zip(row.iter().zip(&means)) {
            *c = v - m;
        }
        let yc = yi - y_mean;
        for a in 0..q {
            rhs[a] += centered[a] * yc;
            for b in a..q {
                gram[(a, b)] += centered[a] * centered[b];
            }
        }
    }
    for a in 0..q {
        gram[(a, a)] += lambda;
        for b in 0..a {
            gram[(a, b)] = gram[(b, a)];
        }
    }
    solve_spd(gram, rhs).map(|v| v.iter().copied().collect())
}

fn logistic_slope(
    features: &[f64],
    q: usize,
    y: &[f64],
    lambda: f64,
    steps: usize,
) -> Option<Vec<f64>> {
    let means = column_means(features, q);
    let dim = q + 1;
    // column 0 is the intercept
    let design: Vec<f64> = features
        .chunks_exact(q)
        .flat_map(|row| std::iter::once(1.0).chain(row.iter().zip(&means).map(|(v, m)| v - m)))
        .collect();
    let mut beta = DVector::<f64>::zeros(dim);
    for _ in 0..steps.max(1) {
        let mut gram = DMatrix::<f64>::zeros(dim, dim);
        let mut rhs = DVector::<f64>::zeros(dim);
        for (x, &yi) in design.chunks_exact(dim).zip(y) {
            let eta: f64 = x.iter().zip(beta.iter()).map(|(a, b)| a * b).sum();
            let prob = 1.0 / (1.0 + (-eta).exp());
            let w = (prob * (1.0 - prob)).clamp(WEIGHT_MIN, WEIGHT_MAX);
            let working = eta + (yi - prob) / w;
            for a in 0..dim {
                rhs[a] += w * x[a] * working;
                for b in a..dim {
                    gram[(a, b)] += w * x[a] * x[b];
                }
            }
        }
        for a in 0..dim {
            if a > 0 {
                gram[(a, a)] += lambda;
            }
            for b in 0..a {
                gram[(a, b)] = gram[(b, a)];
            }
        }
        let next = solve_spd(gram, rhs)?;
        if next.iter().any(|v| !v.is_finite()) {
            break;
        }
        beta = next;
    }
    Some(beta.iter().skip(1).copied().collect())
}

fn solve_spd(gram: DMatrix<f64>, rhs: DVector<f64>) -> Option<DVector<f64>> {
    match gram.clone().cholesky() {
        Some(chol) => Some(chol.solve(&rhs)),
        None => gram.lu().solve(&rhs),
    }
}

/// Unit vector along the single subset feature with the largest marginal gain.
fn fallback_axis(features: &[f64], q: usize, y: &[f64], task: Task) -> Vec<f64> {
    let criterion = Criterion::for_task(task);
    let mut best = (0, f64::NEG_INFINITY);
    let mut column = Vec::with_capacity(y.len());
    for j in 0..q {
        column.clear();
        column.extend(features.chunks_exact(q).map(|row| row[j]));
        if let Ok(t) = best_threshold(&column, y, criterion) {
            if t.gain > best.1 {
                best = (j, t.gain);
            }
        }
    }
    let mut theta = vec![0.0; q];
    theta[best.0] = 1.0;
    theta
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn grid(n: usize) -> Vec<[f64; 2]> {
        (0..n)
            .flat_map(|i| {
                (0..n).map(move |j| [i as f64 / n as f64, ((j * 7 + i * 3) % n) as f64 / n as f64])
            })
            .collect()
    }

    #[test]
    fn recovers_exact_linear_direction() {
        let pts = grid(8);
        let features: Vec<f64> = pts.iter().flatten().copied().collect();
        let y: Vec<f64> = pts.iter().map(|p| p[0] - p[1]).collect();
        let theta = fit_direction(&features, 2, &y, Task::Regression, 1e-6, 5);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert_abs_diff_eq!(theta[0], h, epsilon = 1e-6);
        assert_abs_diff_eq!(theta[1], -h, epsilon = 1e-6);
    }

    #[test]
    fn scalar_direction_is_one() {
        let theta = fit_direction(
            &[0.1, 0.5, 0.9],
            1,
            &[3.0, 1.0, 2.0],
            Task::Regression,
            1e-6,
            5,
        );
        assert_eq!(theta, vec![1.0]);
    }

    #[test]
    fn constant_target_falls_back_to_an_axis() {
        let pts = grid(5);
        let features: Vec<f64> = pts.iter().flatten().copied().collect();
        let y = vec![4.0; pts.len()];
        let theta = fit_direction(&features, 2, &y, Task::Regression, 1e-6, 5);
        assert_eq!(theta.iter().filter(|&&c| c == 1.0).count(), 1);
        assert_eq!(theta.iter().filter(|&&c| c == 0.0).count(), 1);
    }

    #[test]
    fn logistic_direction_separates_classes() {
        let pts = grid(10);
        let features: Vec<f64> = pts.iter().flatten().copied().collect();
        let y: Vec<f64> = pts
            .iter()
            .map(|p| if p[0] + p[1] > 1.0 { 1.0 } else { 0.0 })
            .collect();
        let theta = fit_direction(&features, 2, &y, Task::Classification, 1e-6, 5);
        assert_abs_diff_eq!(
            theta.iter().map(|c| c * c).sum::<f64>(),
            1.0,
            epsilon = 1e-12
        );
        // both coefficients positive and roughly equal
        assert!(theta[0] > 0.5 && theta[1] > 0.5, "{theta:?}");
    }
}

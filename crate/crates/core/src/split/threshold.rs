//! One-dimensional threshold search over projected values.

use super::criterion::{purity, Criterion};
use crate::error::{Error, Result};

/// Gains closer than this are treated as tied; the earlier (smaller) threshold wins.
pub(crate) const TIE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Threshold {
    pub threshold: f64,
    pub gain: f64,
    /// Samples with `z <= threshold`.
    pub left_count: usize,
}

/// Midpoint strictly below `hi` and at least `lo`, for `lo < hi`.
#[inline]
pub(crate) fn midpoint(lo: f64, hi: f64) -> f64 {
    let s = lo + (hi - lo) / 2.0;
    if s >= hi {
        lo
    } else {
        s
    }
}

/// Scans every midpoint between consecutive distinct sorted values of `z` in a
/// single pass with running sums and returns the highest-gain threshold.
pub fn best_threshold(z: &[f64], y: &[f64], criterion: Criterion) -> Result<Threshold> {
    best_threshold_with(z, y, criterion, &mut Vec::with_capacity(z.len()))
}

/// Same as [`best_threshold`] but reuses `pairs` as scratch space.
pub(crate) fn best_threshold_with(
    z: &[f64],
    y: &[f64],
    criterion: Criterion,
    pairs: &mut Vec<(f64, f64)>,
) -> Result<Threshold> {
    if z.len() != y.len() {
        return Err(Error::LengthMismatch(z.len(), y.len()));
    }
    let n = z.len();
    if n < 2 {
        return Err(Error::NoValidSplit);
    }
    pairs.clear();
    pairs.extend(z.iter().copied().zip(y.iter().copied()));
    // only the boundaries between distinct z values are scored, so the order
    // among equal z does not matter
    pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
    if pairs[0].0 == pairs[n - 1].0 {
        return Err(Error::NoValidSplit);
    }

    let nf = n as f64;
    let mut best: Option<Threshold> = None;
    match criterion {
        Criterion::Variance => {
            let mean = y.iter().sum::<f64>() / nf;
            let total: f64 = y.iter().map(|v| v - mean).sum();
            let parent = total * total / nf;
            let mut sum_left = 0.0;
            for k in 0..n - 1 {
                sum_left += pairs[k].1 - mean;
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo == hi {
                    continue;
                }
                let n_left = (k + 1) as f64;
                let sum_right = total - sum_left;
                let gain = (sum_left * sum_left / n_left + sum_right * sum_right / (nf - n_left)
                    - parent)
                    / nf;
                consider(&mut best, lo, hi, gain.max(0.0), k + 1);
            }
        }
        Criterion::Gini => {
            if y.iter().any(|&v| v != 0.0 && v != 1.0) {
                return Err(Error::NonBinary);
            }
            let ones = y.iter().filter(|&&v| v == 1.0).count();
            let parent = purity(ones, n);
            let mut ones_left = 0;
            for k in 0..n - 1 {
                if pairs[k].1 == 1.0 {
                    ones_left += 1;
                }
                let (lo, hi) = (pairs[k].0, pairs[k + 1].0);
                if lo == hi {
                    continue;
                }
                let n_left = k + 1;
                let n_right = n - n_left;
                let gain = -parent
                    + n_left as f64 / nf * purity(ones_left, n_left)
                    + n_right as f64 / nf * purity(ones - ones_left, n_right);
                consider(&mut best, lo, hi, gain.max(0.0), n_left);
            }
        }
    }
    best.ok_or(Error::NoValidSplit)
}

#[inline]
fn consider(best: &mut Option<Threshold>, lo: f64, hi: f64, gain: f64, left_count: usize) {
    let better = match best {
        None => true,
        Some(b) => gain > b.gain + TIE_TOL,
    };
    if better {
        *best = Some(Threshold {
            threshold: midpoint(lo, hi),
            gain,
            left_count,
        });
    }
}

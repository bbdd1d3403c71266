//! Impurity criteria for a two-way split of a node.
//!
//! All gains are normalized per sample of the parent node, so multiplying by
//! `N(A)` gives the drop in summed squared error (or summed Gini impurity).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Criterion {
    Variance,
    Gini,
}

impl Criterion {
    pub fn for_task(task: crate::data::Task) -> Self {
        match task {
            crate::data::Task::Regression => Criterion::Variance,
            crate::data::Task::Classification => Criterion::Gini,
        }
    }

    pub fn gain(self, y: &[f64], left: &[bool]) -> Result<f64> {
        match self {
            Criterion::Variance => impurity_gain(y, left),
            Criterion::Gini => gini_gain(y, left),
        }
    }
}

fn check_sides(y: &[f64], left: &[bool]) -> Result<(usize, usize)> {
    if y.len() != left.len() {
        return Err(Error::LengthMismatch(y.len(), left.len()));
    }
    let n_left = left.iter().filter(|&&l| l).count();
    let n_right = y.len() - n_left;
    if n_left == 0 || n_right == 0 {
        return Err(Error::EmptySide);
    }
    Ok((n_left, n_right))
}

fn mean_sq_dev<'a>(values: impl Iterator<Item = &'a f64> + Clone) -> f64 {
    let (sum, n) = values
        .clone()
        .fold((0.0, 0usize), |(s, n), &v| (s + v, n + 1));
    let mean = sum / n as f64;
    values.map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64
}

/// Variance reduction `||Y - Ybar_A||^2_A - [P(A+)||Y - Ybar_A+||^2 + P(A-)||Y - Ybar_A-||^2]`.
pub fn impurity_gain(y: &[f64], left: &[bool]) -> Result<f64> {
    let (n_left, n_right) = check_sides(y, left)?;
    let n = y.len() as f64;
    let parent = mean_sq_dev(y.iter());
    let l = mean_sq_dev(y.iter().zip(left).filter(|(_, &l)| l).map(|(v, _)| v));
    let r = mean_sq_dev(y.iter().zip(left).filter(|(_, &l)| !l).map(|(v, _)| v));
    Ok(parent - (n_left as f64 / n * l + n_right as f64 / n * r))
}

/// Squared inner product of the centered response with the normalized
/// decision stump of the split. Algebraically equal to [`impurity_gain`]; kept
/// as an independent route for cross-checking.
pub fn stump_gain(y: &[f64], left: &[bool]) -> Result<f64> {
    let (n_left, n_right) = check_sides(y, left)?;
    let n = y.len() as f64;
    let p_left = n_left as f64 / n;
    let p_right = n_right as f64 / n;
    let norm = (p_left * p_right).sqrt();
    let mean = y.iter().sum::<f64>() / n;
    let inner = y
        .iter()
        .zip(left)
        .map(|(&v, &l)| {
            let stump = if l { p_right / norm } else { -p_left / norm };
            (v - mean) * stump
        })
        .sum::<f64>()
        / n;
    Ok(inner * inner)
}

/// Gini gain `-sum_k P^2(k|A) + P(A+) sum_k P^2(k|A+) + P(A-) sum_k P^2(k|A-)` for labels in {0, 1}.
pub fn gini_gain(y: &[f64], left: &[bool]) -> Result<f64> {
    let (n_left, n_right) = check_sides(y, left)?;
    if y.iter().any(|&v| v != 0.0 && v != 1.0) {
        return Err(Error::NonBinary);
    }
    let ones = y.iter().filter(|&&v| v == 1.0).count();
    let ones_left = y.iter().zip(left).filter(|(&v, &l)| l && v == 1.0).count();
    let ones_right = ones - ones_left;
    let n = y.len();
    Ok(-purity(ones, n)
        + n_left as f64 / n as f64 * purity(ones_left, n_left)
        + n_right as f64 / n as f64 * purity(ones_right, n_right))
}

/// `sum_k P^2(k)` for a two-class node with `ones` positives among `n`.
#[inline]
pub(crate) fn purity(ones: usize, n: usize) -> f64 {
    let p1 = ones as f64 / n as f64;
    let p0 = (n - ones) as f64 / n as f64;
    p1 * p1 + p0 * p0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        let y = [0.0, 0.0, 1.0, 1.0];
        let m = [true, true, false, false];
        assert_abs_diff_eq!(impurity_gain(&y, &m).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(stump_gain(&y, &m).unwrap(), 0.25, epsilon = 1e-15);
        assert_abs_diff_eq!(gini_gain(&y, &m).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            impurity_gain(&[1.0, 3.0], &[true, false]).unwrap(),
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn constant_and_pure_nodes_have_no_gain() {
        let y = [2.5; 5];
        let m = [true, false, true, false, false];
        assert_abs_diff_eq!(impurity_gain(&y, &m).unwrap(), 0.0);
        assert_abs_diff_eq!(stump_gain(&y, &m).unwrap(), 0.0);
        assert_abs_diff_eq!(gini_gain(&[1.0; 5], &m).unwrap(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn errors() {
        assert!(matches!(
            impurity_gain(&[1.0, 2.0], &[true, true]),
            Err(Error::EmptySide)
        ));
        assert!(matches!(
            stump_gain(&[1.0, 2.0], &[false, false]),
            Err(Error::EmptySide)
        ));
        assert!(matches!(
            gini_gain(&[0.0, 2.0], &[true, false]),
            Err(Error::NonBinary)
        ));
    }

    fn node() -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
        (2usize..50).prop_flat_map(|n| {
            (
                prop::collection::vec(-10.0f64..10.0, n),
                prop::collection::vec(any::<bool>(), n),
            )
                .prop_filter("both sides nonempty", |(_, m)| {
                    m.iter().any(|&b| b) && m.iter().any(|&b| !b)
                })
        })
    }

    proptest! {
        #[test]
        fn stump_identity((y, m) in node()) {
            let a = impurity_gain(&y, &m).unwrap();
            let b = stump_gain(&y, &m).unwrap();
            prop_assert!((a - b).abs() < 1e-10 * (1.0 + a.abs()));
            prop_assert!(a >= -1e-12);
        }

        #[test]
        fn gini_is_twice_variance_gain((y, m) in node()) {
            let y: Vec<f64> = y.iter().map(|&v| if v > 0.0 { 1.0 } else { 0.0 }).collect();
            let g = gini_gain(&y, &m).unwrap();
            let v = impurity_gain(&y, &m).unwrap();
            prop_assert!((g - 2.0 * v).abs() < 1e-10);
        }
    }
}

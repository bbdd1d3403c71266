//! Metrics, synthetic targets with known regression functions, Monte-Carlo
//! risk estimation and the repeated-partition benchmark protocol.

mod experiment;
mod synthetic;

pub use experiment::{
    benchmark, benchmark_raw, consistency_curve, l2_risk, median, BenchmarkResult, MethodScores,
    RiskReport,
};
pub use synthetic::{
    make_target, sample, BaseFn, Component, SyntheticTarget, TargetKind, TargetSpec,
};

use crate::error::{Error, Result};

/// Relative prediction error: `sum (yhat - y)^2 / sum (ybar_train - y)^2`.
pub fn rpe(predictions: &[f64], y_test: &[f64], y_train_mean: f64) -> Result<f64> {
    if predictions.len() != y_test.len() {
        return Err(Error::LengthMismatch(predictions.len(), y_test.len()));
    }
    if y_test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let num: f64 = predictions
        .iter()
        .zip(y_test)
        .map(|(p, y)| (p - y).powi(2))
        .sum();
    let den: f64 = y_test.iter().map(|y| (y_train_mean - y).powi(2)).sum();
    if den == 0.0 {
        return Err(Error::ZeroDenominator);
    }
    Ok(num / den)
}

/// Misclassification rate.
pub fn mr(predicted: &[u8], truth: &[u8]) -> Result<f64> {
    if predicted.len() != truth.len() {
        return Err(Error::LengthMismatch(predicted.len(), truth.len()));
    }
    if truth.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let wrong = predicted.iter().zip(truth).filter(|(a, b)| a != b).count();
    Ok(wrong as f64 / truth.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rpe_examples() {
        let y = [0.0, 2.0];
        assert_eq!(rpe(&[1.0, 1.0], &y, 1.0).unwrap(), 1.0);
        assert_eq!(rpe(&y, &y, 1.0).unwrap(), 0.0);
        assert_eq!(rpe(&[1.0, 1.0], &y, 0.0).unwrap(), 0.5);
        assert!(matches!(
            rpe(&[1.0], &[3.0], 3.0),
            Err(Error::ZeroDenominator)
        ));
    }

    #[test]
    fn mr_examples() {
        assert_eq!(mr(&[0, 1, 1, 0], &[0, 1, 1, 0]).unwrap(), 0.0);
        assert_eq!(mr(&[1, 0], &[0, 1]).unwrap(), 1.0);
        assert_eq!(mr(&[0, 1, 1, 1], &[0, 1, 1, 0]).unwrap(), 0.25);
        assert!(matches!(
            mr(&[0], &[0, 1]),
            Err(Error::LengthMismatch(1, 2))
        ));
    }
}

use std::fmt::Write as _;
use std::path::Path;

use rand::Rng;
use rayon::prelude::*;

use super::synthetic::{make_target, sample_stream, SyntheticTarget, TargetSpec};
use super::{mr, rpe};
use crate::data::{self, RawDataset, ScalingMode, Task};
use crate::error::{Error, Result};
use crate::model::{MethodConfig, Predictor};
use crate::rng::{self, pair_id};

/// Monte-Carlo estimate of `int |mhat - m|^2 dmu` with `mu` uniform on `[0,1]^p`.
pub fn l2_risk<P: Predictor + ?Sized>(
    model: &P,
    target: &SyntheticTarget,
    n_mc: usize,
    seed: u64,
) -> Result<f64> {
    if n_mc == 0 {
        return Err(Error::BadConfig("n_mc must be at least 1".into()));
    }
    let p = target.p;
    let mut r = rng::stream(seed, 0);
    let points: Vec<f64> = (0..n_mc * p).map(|_| r.random()).collect();
    let errors = points
        .par_chunks_exact(p)
        .map(|x| Ok((model.predict(x)? - target.eval(x)).powi(2)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(errors.iter().sum::<f64>() / n_mc as f64)
}

pub fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    if v.len() % 2 == 1 {
        v[m]
    } else {
        (v[m - 1] + v[m]) / 2.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RiskReport {
    pub method: String,
    pub n_values: Vec<usize>,
    /// `risks[i][r]`: repetition `r` at sample size `n_values[i]`.
    pub risks: Vec<Vec<f64>>,
    pub medians: Vec<f64>,
}

impl RiskReport {
    /// Columns `method,n,rep,metric,value`; one row per repetition, then the median rows.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,n,rep,metric,value\n");
        for (i, &n) in self.n_values.iter().enumerate() {
            for (r, v) in self.risks[i].iter().enumerate() {
                let _ = writeln!(out, "{},{n},{},l2_risk,{v}", self.method, r + 1);
            }
        }
        for (i, &n) in self.n_values.iter().enumerate() {
            let _ = writeln!(
                out,
                "{},{n},median,l2_risk,{}",
                self.method, self.medians[i]
            );
        }
        out
    }
}

/// Risk of `method` against a synthetic target as the sample size grows.
///
/// The target is built once from `seed`; sample `(i, r)` uses its own stream
/// and all fits are scored on one shared Monte-Carlo sample, so repeated runs
/// are identical whatever the thread count.
pub fn consistency_curve(
    spec: &TargetSpec,
    n_values: &[usize],
    method: &MethodConfig,
    repetitions: usize,
    n_mc: usize,
    seed: u64,
) -> Result<RiskReport> {
    if repetitions == 0 || n_values.is_empty() {
        return Err(Error::BadConfig(
            "need at least one sample size and one repetition".into(),
        ));
    }
    if n_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::BadConfig(
            "sample sizes must be strictly increasing".into(),
        ));
    }
    let target = make_target(spec, seed)?;
    let eval_seed = rng::stream(seed, u64::MAX).random::<u64>();
    let jobs: Vec<(usize, usize)> = (0..n_values.len())
        .flat_map(|i| (0..repetitions).map(move |r| (i, r)))
        .collect();
    let flat = jobs
        .par_iter()
        .map(|&(i, r)| {
            let mut stream = rng::stream(seed, pair_id(i as u64 + 1, r as u64));
            let data = sample_stream(&target, n_values[i], &mut stream)?;
            let fit_seed = stream.random::<u64>();
            let model = method.fit(&data, &data.all_indices(), fit_seed)?;
            l2_risk(&model, &target, n_mc, eval_seed)
        })
        .collect::<Result<Vec<f64>>>()?;
    let risks: Vec<Vec<f64>> = flat.chunks(repetitions).map(<[f64]>::to_vec).collect();
    Ok(RiskReport {
        method: method.method.name().to_string(),
        n_values: n_values.to_vec(),
        medians: risks.iter().map(|r| median(r)).collect(),
        risks,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MethodScores {
    pub method: String,
    /// One value per partition.
    pub values: Vec<f64>,
    pub mean: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchmarkResult {
    /// `rpe` or `mr`.
    pub metric: &'static str,
    pub methods: Vec<MethodScores>,
}

impl BenchmarkResult {
    pub fn mean_of(&self, method: &str) -> Option<f64> {
        self.methods
            .iter()
            .find(|m| m.method == method)
            .map(|m| m.mean)
    }

    /// Columns `method,partition,metric,value`; per-partition rows then one `mean` row per method.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("method,partition,metric,value\n");
        for m in &self.methods {
            for (r, v) in m.values.iter().enumerate() {
                let _ = writeln!(out, "{},{},{},{v}", m.method, r + 1, self.metric);
            }
        }
        for m in &self.methods {
            let _ = writeln!(out, "{},mean,{},{}", m.method, self.metric, m.mean);
        }
        out
    }
}

pub fn benchmark(
    path: impl AsRef<Path>,
    target_name: &str,
    task: Task,
    methods: &[MethodConfig],
    repetitions: usize,
    seed: u64,
    scaling: ScalingMode,
) -> Result<BenchmarkResult> {
    let raw = data::load_csv(path, target_name, task)?;
    benchmark_raw(&raw, methods, repetitions, seed, scaling)
}

/// Repeats: random partition, scale, fit every method on the training part,
/// score RPE (regression) or MR (classification) on the rest.
pub fn benchmark_raw(
    raw: &RawDataset,
    methods: &[MethodConfig],
    repetitions: usize,
    seed: u64,
    scaling: ScalingMode,
) -> Result<BenchmarkResult> {
    if repetitions == 0 || methods.is_empty() {
        return Err(Error::BadConfig(
            "need at least one repetition and one method".into(),
        ));
    }
    let whole_scaler = data::fit_minmax(raw);
    let per_rep = (1..=repetitions as u64)
        .into_par_iter()
        .map(|r| {
            let mut stream = rng::stream(seed, pair_id(r, 0));
            let part = data::partition_with(raw.n_samples(), &mut stream)?;
            let fit_seed = stream.random::<u64>();
            let scaler = match scaling {
                ScalingMode::TrainOnly => data::fit_minmax(&raw.select(&part.train)),
                ScalingMode::WholeData => whole_scaler.clone(),
            };
            let dataset = data::apply_scaler(&scaler, raw)?;
            let y_test: Vec<f64> = part.test.iter().map(|&i| dataset.target(i)).collect();
            let y_train_mean = part.train.iter().map(|&i| dataset.target(i)).sum::<f64>()
                / part.train.len() as f64;
            methods
                .iter()
                .map(|m| {
                    let model = m.fit(&dataset, &part.train, fit_seed)?;
                    match raw.task {
                        Task::Regression => {
                            let preds = part
                                .test
                                .iter()
                                .map(|&i| model.predict(dataset.row(i)))
                                .collect::<Result<Vec<_>>>()?;
                            rpe(&preds, &y_test, y_train_mean)
                        }
                        Task::Classification => {
                            let preds = part
                                .test
                                .iter()
                                .map(|&i| model.classify(dataset.row(i)))
                                .collect::<Result<Vec<_>>>()?;
                            let truth: Vec<u8> = y_test.iter().map(|&y| y as u8).collect();
                            mr(&preds, &truth)
                        }
                    }
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<Vec<f64>>>>()?;

    let methods = methods
        .iter()
        .enumerate()
        .map(|(k, m)| {
            let values: Vec<f64> = per_rep.iter().map(|row| row[k]).collect();
            MethodScores {
                method: m.method.name().to_string(),
                mean: values.iter().sum::<f64>() / values.len() as f64,
                values,
            }
        })
        .collect();
    Ok(BenchmarkResult {
        metric: match raw.task {
            Task::Regression => "rpe",
            Task::Classification => "mr",
        },
        methods,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eval::synthetic::{BaseFn, TargetKind};
    use crate::model::Method;
    use crate::tree::LeafBudget;

    fn linear_x1() -> SyntheticTarget {
        make_target(
            &TargetSpec {
                kind: TargetKind::RidgeSum,
                p: 2,
                terms: 1,
                q: 2,
                bases: vec![BaseFn::Linear],
                amplitude: 1.0,
                frequency: 1.0,
                intercept: 0.0,
                noise_sigma: 0.0,
                direction: Some(vec![1.0, 0.0]),
                task: Task::Regression,
            },
            0,
        )
        .unwrap()
    }

    #[test]
    fn risk_of_exact_and_zero_models() {
        let t = linear_x1();
        let exact = |x: &[f64]| x[0];
        assert_eq!(l2_risk(&exact, &t, 1000, 1).unwrap(), 0.0);
        let zero = |_: &[f64]| 0.0;
        let r = l2_risk(&zero, &t, 1_000_000, 2).unwrap();
        assert!((r - 1.0 / 3.0).abs() < 0.01, "{r}");
        assert!(l2_risk(&zero, &t, 0, 2).is_err());
    }

    #[test]
    fn monte_carlo_spread_shrinks_like_root_n() {
        let t = linear_x1();
        let zero = |_: &[f64]| 0.0;
        let spread = |n_mc: usize| {
            let v: Vec<f64> = (0..30)
                .map(|s| l2_risk(&zero, &t, n_mc, s).unwrap())
                .collect();
            let m = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
        };
        let ratio = spread(500) / spread(50_000);
        // sqrt(100) = 10; allow sampling noise in the spread estimates
        assert!(ratio > 5.0 && ratio < 20.0, "{ratio}");
    }

    #[test]
    fn medians() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn consistency_is_deterministic() {
        let spec = TargetSpec::diagonal_sine(2, 3.0, 0.1);
        let method = MethodConfig::new(Method::Odt);
        let a = consistency_curve(&spec, &[50, 100], &method, 2, 500, 3).unwrap();
        let b = consistency_curve(&spec, &[50, 100], &method, 2, 500, 3).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.risks.len(), 2);
        assert!(a.risks.iter().flatten().all(|&r| r >= 0.0));
        assert!(a
            .to_csv()
            .starts_with("method,n,rep,metric,value\nodt,50,1,l2_risk,"));
        assert!(consistency_curve(&spec, &[100, 50], &method, 1, 10, 0).is_err());
    }

    #[test]
    fn mean_baseline_scores_one() {
        let t = make_target(&TargetSpec::diagonal_sine(3, 4.0, 0.2), 1).unwrap();
        let d = sample(&t, 90, 5);
        let raw = RawDataset {
            features: d.features().to_vec(),
            targets: d.targets().to_vec(),
            feature_names: vec!["a".into(), "b".into(), "c".into()],
            target_name: "y".into(),
            task: Task::Regression,
        };
        let methods = [
            MethodConfig::new(Method::Mean),
            MethodConfig::new(Method::Odt).with_leaf_budget(LeafBudget::Fixed(8)),
        ];
        let res = benchmark_raw(&raw, &methods, 3, 4, ScalingMode::TrainOnly).unwrap();
        assert_eq!(res.metric, "rpe");
        for v in &res.methods[0].values {
            assert!((v - 1.0).abs() < 1e-12);
        }
        let again = benchmark_raw(&raw, &methods, 3, 4, ScalingMode::TrainOnly).unwrap();
        assert_eq!(res.to_csv(), again.to_csv());
        assert!(res.mean_of("odt").unwrap() < 1.0);
    }

    fn sample(t: &SyntheticTarget, n: usize, seed: u64) -> crate::data::Dataset {
        crate::eval::sample(t, n, seed).unwrap()
    }
}

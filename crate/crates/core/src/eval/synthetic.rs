use rand::seq::{index, SliceRandom};
use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BaseFn {
    /// `e^v / (1 + e^v)`
    Sigmoid,
    Sine,
    Quadratic,
    Linear,
}

impl BaseFn {
    #[inline]
    pub fn apply(self, v: f64) -> f64 {
        match self {
            BaseFn::Sigmoid => 1.0 / (1.0 + (-v).exp()),
            BaseFn::Sine => v.sin(),
            BaseFn::Quadratic => v * v,
            BaseFn::Linear => v,
        }
    }
}

impl std::str::FromStr for BaseFn {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "sigmoid" => Ok(BaseFn::Sigmoid),
            "sine" | "sin" => Ok(BaseFn::Sine),
            "quadratic" => Ok(BaseFn::Quadratic),
            "linear" => Ok(BaseFn::Linear),
            _ => Err(format!(
                "unknown base function `{s}` (expected sigmoid|sine|quadratic|linear)"
            )),
        }
    }
}

/// `amplitude * base(frequency * theta^T x_subset)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub subset: Vec<usize>,
    pub theta: Vec<f64>,
    pub base: BaseFn,
    pub amplitude: f64,
    pub frequency: f64,
}

impl Component {
    #[inline]
    pub fn value(&self, x: &[f64]) -> f64 {
        let v: f64 = self
            .subset
            .iter()
            .zip(&self.theta)
            .map(|(&j, &c)| c * x[j])
            .sum();
        self.amplitude * self.base.apply(self.frequency * v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetKind {
    /// Sum of ridge functions of the full input.
    RidgeSum,
    /// Sum of functions each touching a fixed set of `q` coordinates.
    ExtendedAdditive,
}

impl std::str::FromStr for TargetKind {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "ridge" | "ridge-sum" => Ok(TargetKind::RidgeSum),
            "additive" | "extended-additive" => Ok(TargetKind::ExtendedAdditive),
            _ => Err(format!(
                "unknown target kind `{s}` (expected ridge|additive)"
            )),
        }
    }
}

/// A known regression function `m` on `[0,1]^p` plus its noise model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticTarget {
    pub kind: TargetKind,
    pub p: usize,
    pub intercept: f64,
    pub components: Vec<Component>,
    pub noise_sigma: f64,
    pub task: Task,
}

impl SyntheticTarget {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.intercept + self.components.iter().map(|c| c.value(x)).sum::<f64>()
    }

    /// Coordinates that `m` depends on.
    pub fn active_coordinates(&self) -> Vec<usize> {
        let mut all: Vec<usize> = self
            .components
            .iter()
            .flat_map(|c| c.subset.iter().copied())
            .collect();
        all.sort_unstable();
        all.dedup();
        all
    }

    /// Irreducible misclassification rate `E min(m, 1 - m)` estimated on `n_mc`
    /// uniform points of stream `(seed, stream_id)`.
    pub fn bayes_rate(&self, n_mc: usize, seed: u64, stream_id: u64) -> f64 {
        let mut r = rng::stream(seed, stream_id);
        let mut x = vec![0.0; self.p];
        let mut total = 0.0;
        for _ in 0..n_mc {
            x.iter_mut().for_each(|v| *v = r.random());
            let m = self.eval(&x).clamp(0.0, 1.0);
            total += m.min(1.0 - m);
        }
        total / n_mc as f64
    }
}

/// Parameters from which [`make_target`] builds a [`SyntheticTarget`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetSpec {
    pub kind: TargetKind,
    pub p: usize,
    /// Number of components (J ridge terms or V additive blocks).
    pub terms: usize,
    /// Block size for the extended additive model.
    pub q: usize,
    /// Cycled over components.
    pub bases: Vec<BaseFn>,
    pub amplitude: f64,
    pub frequency: f64,
    pub intercept: f64,
    pub noise_sigma: f64,
    /// Fixed ridge direction over all `p` coordinates; drawn at random when absent.
    pub direction: Option<Vec<f64>>,
    pub task: Task,
}

impl TargetSpec {
    /// `sin(frequency * theta^T x)` along the normalized diagonal of `[0,1]^p`.
    pub fn diagonal_sine(p: usize, frequency: f64, noise_sigma: f64) -> Self {
        TargetSpec {
            kind: TargetKind::RidgeSum,
            p,
            terms: 1,
            q: p,
            bases: vec![BaseFn::Sine],
            amplitude: 1.0,
            frequency,
            intercept: 0.0,
            noise_sigma,
            direction: Some(vec![1.0; p]),
            task: Task::Regression,
        }
    }

    pub fn additive(
        p: usize,
        q: usize,
        terms: usize,
        base: BaseFn,
        frequency: f64,
        noise_sigma: f64,
    ) -> Self {
        TargetSpec {
            kind: TargetKind::ExtendedAdditive,
            p,
            terms,
            q,
            bases: vec![base],
            amplitude: 1.0,
            frequency,
            intercept: 0.0,
            noise_sigma,
            direction: None,
            task: Task::Regression,
        }
    }
}

fn unit_gaussian(dim: usize, r: &mut rng::Stream) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| r.sample(StandardNormal)).collect();
        let norm = v.iter().map(|c| c * c).sum::<f64>().sqrt();
        if norm > 1e-8 {
            return v.into_iter().map(|c| c / norm).collect();
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

pub fn make_target(spec: &TargetSpec, seed: u64) -> Result<SyntheticTarget> {
    if spec.p == 0 || spec.terms == 0 || spec.bases.is_empty() {
        return Err(Error::BadSpec(
            "need p >= 1, at least one term and one base function".into(),
        ));
    }
    if spec.noise_sigma.is_nan()
        || spec.noise_sigma < 0.0
        || !spec.amplitude.is_finite()
        || !spec.frequency.is_finite()
    {
        return Err(Error::BadSpec(
            "noise must be >= 0 and coefficients finite".into(),
        ));
    }
    let mut r = rng::stream(seed, 0);
    let base = |k: usize| spec.bases[k % spec.bases.len()];
    let components = match spec.kind {
        TargetKind::RidgeSum => {
            let fixed = match &spec.direction {
                Some(d) => {
                    let norm = d.iter().map(|c| c * c).sum::<f64>().sqrt();
                    if d.len() != spec.p || norm == 0.0 || !norm.is_finite() {
                        return Err(Error::BadSpec(
                            "direction must be a nonzero vector of length p".into(),
                        ));
                    }
                    Some(d.iter().map(|c| c / norm).collect::<Vec<_>>())
                }
                None => None,
            };
            (0..spec.terms)
                .map(|k| Component {
                    subset: (0..spec.p).collect(),
                    theta: fixed
                        .clone()
                        .unwrap_or_else(|| unit_gaussian(spec.p, &mut r)),
                    base: base(k),
                    amplitude: spec.amplitude,
                    frequency: spec.frequency,
                })
                .collect()
        }
        TargetKind::ExtendedAdditive => {
            if spec.q == 0 || spec.q > spec.p {
                return Err(Error::BadSpec(format!(
                    "block size q={} outside 1..={}",
                    spec.q, spec.p
                )));
            }
            if spec.terms as f64 > binomial(spec.p, spec.q) {
                return Err(Error::BadSpec(format!(
                    "{} blocks exceed the {} distinct subsets of size {}",
                    spec.terms,
                    binomial(spec.p, spec.q),
                    spec.q
                )));
            }
            let subsets = draw_blocks(spec.p, spec.q, spec.terms, &mut r);
            subsets
                .into_iter()
                .enumerate()
                .map(|(k, subset)| Component {
                    theta: unit_gaussian(subset.len(), &mut r),
                    subset,
                    base: base(k),
                    amplitude: spec.amplitude,
                    frequency: spec.frequency,
                })
                .collect()
        }
    };
    Ok(SyntheticTarget {
        kind: spec.kind,
        p: spec.p,
        intercept: spec.intercept,
        components,
        noise_sigma: spec.noise_sigma,
        task: spec.task,
    })
}

/// Distinct sorted index blocks; disjoint whenever `terms * q <= p`.
fn draw_blocks(p: usize, q: usize, terms: usize, r: &mut rng::Stream) -> Vec<Vec<usize>> {
    if terms * q <= p {
        let mut perm: Vec<usize> = (0..p).collect();
        perm.shuffle(r);
        return perm
            .chunks_exact(q)
            .take(terms)
            .map(|c| {
                let mut c = c.to_vec();
                c.sort_unstable();
                c
            })
            .collect();
    }
    let mut blocks: Vec<Vec<usize>> = Vec::with_capacity(terms);
    while blocks.len() < terms {
        let mut b = index::sample(r, p, q).into_vec();
        b.sort_unstable();
        if !blocks.contains(&b) {
            blocks.push(b);
        }
    }
    blocks
}

/// Draws `n` points uniform on `[0,1]^p` with responses from the target's noise model.
pub fn sample(target: &SyntheticTarget, n: usize, seed: u64) -> Result<Dataset> {
    sample_stream(target, n, &mut rng::stream(seed, 0))
}

pub(crate) fn sample_stream(
    target: &SyntheticTarget,
    n: usize,
    r: &mut rng::Stream,
) -> Result<Dataset> {
    let p = target.p;
    let features: Vec<f64> = (0..n * p).map(|_| r.random()).collect();
    let noise = Normal::new(0.0, target.noise_sigma).map_err(|e| Error::BadSpec(e.to_string()))?;
    let targets = features
        .chunks_exact(p)
        .map(|x| {
            let m = target.eval(x);
            match target.task {
                Task::Regression => {
                    if target.noise_sigma > 0.0 {
                        m + noise.sample(r)
                    } else {
                        m
                    }
                }
                Task::Classification => {
                    let coin = Bernoulli::new(m.clamp(0.0, 1.0)).expect("clamped probability");
                    f64::from(u8::from(coin.sample(r)))
                }
            }
        })
        .collect();
    Dataset::new(features, targets, p, target.task)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_component() {
        let spec = TargetSpec {
            kind: TargetKind::RidgeSum,
            p: 3,
            terms: 1,
            q: 3,
            bases: vec![BaseFn::Linear],
            amplitude: 1.0,
            frequency: 1.0,
            intercept: 0.0,
            noise_sigma: 0.0,
            direction: Some(vec![1.0, 0.0, 0.0]),
            task: Task::Regression,
        };
        let t = make_target(&spec, 4).unwrap();
        assert_eq!(t.eval(&[0.3, 0.9, 0.1]), 0.3);
        let d = sample(&t, 50, 1).unwrap();
        for i in 0..50 {
            assert_eq!(d.target(i), d.value(i, 0));
        }
    }

    #[test]
    fn additive_blocks_are_pairs() {
        let spec = TargetSpec::additive(4, 2, 2, BaseFn::Sine, 2.0, 0.0);
        let t = make_target(&spec, 9).unwrap();
        assert_eq!(t.components.len(), 2);
        assert!(t.components.iter().all(|c| c.subset.len() == 2));
        assert!(t.active_coordinates().len() <= 4);
        for c in &t.components {
            let norm: f64 = c.theta.iter().map(|v| v * v).sum();
            assert!((norm - 1.0).abs() < 1e-12);
        }
        // overlapping blocks once they cannot be disjoint
        let t = make_target(&TargetSpec::additive(4, 2, 5, BaseFn::Sine, 1.0, 0.0), 1).unwrap();
        let mut subsets: Vec<_> = t.components.iter().map(|c| c.subset.clone()).collect();
        subsets.dedup();
        assert_eq!(subsets.len(), 5);
        assert!(make_target(&TargetSpec::additive(4, 2, 7, BaseFn::Sine, 1.0, 0.0), 1).is_err());
    }

    #[test]
    fn diagonal_sine_matches_definition() {
        let t = make_target(&TargetSpec::diagonal_sine(5, 4.0, 0.1), 0).unwrap();
        let x = [0.1, 0.2, 0.3, 0.4, 0.5];
        let expected = (4.0 * 1.5 / 5f64.sqrt()).sin();
        assert!((t.eval(&x) - expected).abs() < 1e-14);
    }

    #[test]
    fn classification_samples_are_binary() {
        let mut spec = TargetSpec::diagonal_sine(2, 4.0, 0.0);
        spec.amplitude = 0.4;
        spec.intercept = 0.5;
        spec.task = Task::Classification;
        let t = make_target(&spec, 0).unwrap();
        let d = sample(&t, 500, 2).unwrap();
        assert!(d.targets().iter().all(|&y| y == 0.0 || y == 1.0));
        let b = t.bayes_rate(20000, 1, 0);
        assert!(b > 0.1 && b < 0.5);
    }

    #[test]
    fn bad_specs() {
        let mut spec = TargetSpec::diagonal_sine(3, 1.0, 0.0);
        spec.direction = Some(vec![1.0]);
        assert!(matches!(make_target(&spec, 0), Err(Error::BadSpec(_))));
        spec.direction = None;
        spec.noise_sigma = -1.0;
        assert!(matches!(make_target(&spec, 0), Err(Error::BadSpec(_))));
    }
}

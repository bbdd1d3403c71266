//! Choosing one oblique cut for a node.

pub mod criterion;
pub mod direction;
pub mod threshold;

use std::collections::HashSet;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::rng::Stream;

pub use criterion::{gini_gain, impurity_gain, stump_gain, Criterion};
pub use direction::fit_direction;
pub use threshold::{best_threshold, Threshold};

/// The cut `theta^T x_S <= threshold`. Points on the plane go left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitPlane {
    pub subset: Vec<usize>,
    pub theta: Vec<f64>,
    pub threshold: f64,
}

impl SplitPlane {
    pub fn axis(feature: usize, threshold: f64) -> Self {
        SplitPlane {
            subset: vec![feature],
            theta: vec![1.0],
            threshold,
        }
    }

    #[inline]
    pub fn project(&self, x: &[f64]) -> f64 {
        self.subset
            .iter()
            .zip(&self.theta)
            .map(|(&j, &c)| c * x[j])
            .sum()
    }

    #[inline]
    pub fn goes_left(&self, x: &[f64]) -> bool {
        self.project(x) <= self.threshold
    }

    /// Same partition with left and right swapped: `(-theta)^T x <= -s` selects
    /// the old right side up to points lying exactly on the plane.
    pub fn flipped(&self) -> Self {
        SplitPlane {
            subset: self.subset.clone(),
            theta: self.theta.iter().map(|c| -c).collect(),
            threshold: -self.threshold,
        }
    }
}

/// How many coordinates each candidate direction may combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QRule {
    /// Uniform on `1..=min(floor(sqrt(n)), p)` with `n` the tree's training size.
    Practical,
    /// Uniform on `1..=p`.
    Theory,
    Fixed(usize),
    /// No random candidates; only the exhaustive single-feature search.
    AxisAligned,
}

impl QRule {
    pub fn max_q(self, p: usize, n_root: usize) -> usize {
        match self {
            QRule::Practical => ((n_root as f64).sqrt().floor() as usize).clamp(1, p),
            QRule::Theory => p,
            QRule::Fixed(q) => q.clamp(1, p),
            QRule::AxisAligned => 1,
        }
    }

    pub fn draw_q(self, p: usize, n_root: usize, rng: &mut Stream) -> usize {
        match self {
            QRule::Practical | QRule::Theory => rng.random_range(1..=self.max_q(p, n_root)),
            QRule::Fixed(_) | QRule::AxisAligned => self.max_q(p, n_root),
        }
    }
}

impl std::fmt::Display for QRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            QRule::Practical => write!(f, "practical"),
            QRule::Theory => write!(f, "theory"),
            QRule::Fixed(q) => write!(f, "fixed:{q}"),
            QRule::AxisAligned => write!(f, "axis"),
        }
    }
}

impl std::str::FromStr for QRule {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "practical" => Ok(QRule::Practical),
            "theory" => Ok(QRule::Theory),
            "axis" | "axis-aligned" => Ok(QRule::AxisAligned),
            other => {
                let q = other.strip_prefix("fixed:").unwrap_or(other);
                match q.parse::<usize>() {
                    Ok(q) if q >= 1 => Ok(QRule::Fixed(q)),
                    _ => Err(format!(
                        "unknown q rule `{other}` (expected practical|theory|axis|fixed:<q>)"
                    )),
                }
            }
        }
    }
}

/// Draws a subset size per `rule`, then a uniformly random subset of that size.
/// Returned indices are sorted.
pub fn draw_subset(p: usize, n_root: usize, rule: QRule, rng: &mut Stream) -> Vec<usize> {
    let q = rule.draw_q(p, n_root, rng);
    let mut subset = index::sample(rng, p, q).into_vec();
    subset.sort_unstable();
    subset
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitConfig {
    pub n_candidates: usize,
    pub q_rule: QRule,
    pub ridge_lambda: f64,
    pub include_cart_candidate: bool,
    pub min_gain: f64,
    pub irls_steps: usize,
}

impl Default for SplitConfig {
    fn default() -> Self {
        SplitConfig {
            n_candidates: 10,
            q_rule: QRule::Practical,
            ridge_lambda: 1e-6,
            include_cart_candidate: true,
            min_gain: 0.0,
            irls_steps: 5,
        }
    }
}

impl SplitConfig {
    pub fn validate(&self, p: usize) -> Result<()> {
        if self.n_candidates == 0
            && self.q_rule != QRule::AxisAligned
            && !self.include_cart_candidate
        {
            return Err(Error::BadConfig("n_candidates must be at least 1".into()));
        }
        if let QRule::Fixed(q) = self.q_rule {
            if q == 0 || q > p {
                return Err(Error::BadConfig(format!("fixed q={q} outside 1..={p}")));
            }
        }
        if self.ridge_lambda.is_nan() || self.ridge_lambda < 0.0 || !self.min_gain.is_finite() {
            return Err(Error::BadConfig(
                "ridge_lambda and min_gain must be finite, lambda >= 0".into(),
            ));
        }
        Ok(())
    }
}

/// Samples falling in one node, with cached summary statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeData {
    pub indices: Vec<usize>,
    pub mean: f64,
    /// Sum of squared deviations from `mean`.
    pub sse: f64,
}

impl NodeData {
    pub fn new(data: &Dataset, indices: Vec<usize>) -> Self {
        let n = indices.len() as f64;
        let mean = indices.iter().map(|&i| data.target(i)).sum::<f64>() / n;
        let sse = indices
            .iter()
            .map(|&i| {
                let d = data.target(i) - mean;
                d * d
            })
            .sum();
        NodeData { indices, mean, sse }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Number of samples with target 1 (classification).
    pub fn positives(&self, data: &Dataset) -> usize {
        self.indices
            .iter()
            .filter(|&&i| data.target(i) == 1.0)
            .count()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitCandidate {
    pub plane: SplitPlane,
    /// Criterion gain per parent sample (variance or Gini).
    pub gain: f64,
    pub left_count: usize,
    pub right_count: usize,
}

/// Generates the candidate cuts for a node and returns the best one, or `None`
/// when the node cannot be split (fewer than two samples, all feature rows
/// identical, or no candidate reaching `min_gain`).
///
/// Candidates are evaluated in generation order and the earliest wins ties.
/// With `include_cart_candidate` the exhaustive axis-aligned search is
/// appended last, so the result is never worse than plain CART on that node.
pub fn propose_and_select(
    node: &NodeData,
    data: &Dataset,
    config: &SplitConfig,
    n_root: usize,
    rng: &mut Stream,
) -> Option<SplitCandidate> {
    let n = node.len();
    if n < 2 || identical_rows(node, data) {
        return None;
    }
    let p = data.n_features();
    let task = data.task();
    let criterion = Criterion::for_task(task);
    let y: Vec<f64> = node.indices.iter().map(|&i| data.target(i)).collect();

    let mut scratch = Scratch::with_capacity(n);
    let mut best: Option<SplitCandidate> = None;
    let mut offer = |cand: SplitCandidate| {
        if best.as_ref().is_none_or(|b| cand.gain > b.gain) {
            best = Some(cand);
        }
    };

    if config.q_rule != QRule::AxisAligned {
        let mut seen: HashSet<Vec<usize>> = HashSet::new();
        for _ in 0..config.n_candidates {
            let subset = draw_subset(p, n_root, config.q_rule, rng);
            // the direction fit is deterministic, so a repeated subset repeats the candidate
            if !seen.insert(subset.clone()) {
                continue;
            }
            let q = subset.len();
            scratch.sub.clear();
            for &i in &node.indices {
                let row = data.row(i);
                scratch.sub.extend(subset.iter().map(|&j| row[j]));
            }
            let theta = fit_direction(
                &scratch.sub,
                q,
                &y,
                task,
                config.ridge_lambda,
                config.irls_steps,
            );
            let plane = SplitPlane {
                subset,
                theta,
                threshold: 0.0,
            };
            scratch.z.clear();
            scratch
                .z
                .extend(node.indices.iter().map(|&i| plane.project(data.row(i))));
            if let Some(c) = scan(plane, &scratch.z, &y, criterion, &mut scratch.pairs) {
                offer(c);
            }
        }
    }

    if config.include_cart_candidate || config.q_rule == QRule::AxisAligned {
        let mut axis_best: Option<SplitCandidate> = None;
        for j in 0..p {
            scratch.z.clear();
            scratch
                .z
                .extend(node.indices.iter().map(|&i| data.value(i, j)));
            if let Some(c) = scan(
                SplitPlane::axis(j, 0.0),
                &scratch.z,
                &y,
                criterion,
                &mut scratch.pairs,
            ) {
                if axis_best.as_ref().is_none_or(|b| c.gain > b.gain) {
                    axis_best = Some(c);
                }
            }
        }
        if let Some(c) = axis_best {
            offer(c);
        }
    }

    best.filter(|b| b.gain >= config.min_gain)
}

/// Exhaustive axis-aligned search only; the CART baseline for a node.
pub fn best_axis_split(node: &NodeData, data: &Dataset) -> Option<SplitCandidate> {
    let config = SplitConfig {
        q_rule: QRule::AxisAligned,
        min_gain: f64::NEG_INFINITY,
        ..SplitConfig::default()
    };
    let mut unused = crate::rng::stream(0, 0);
    propose_and_select(node, data, &config, node.len(), &mut unused)
}

struct Scratch {
    sub: Vec<f64>,
    z: Vec<f64>,
    pairs: Vec<(f64, f64)>,
}

impl Scratch {
    fn with_capacity(n: usize) -> Self {
        Scratch {
            sub: Vec::new(),
            z: Vec::with_capacity(n),
            pairs: Vec::with_capacity(n),
        }
    }
}

fn scan(
    mut plane: SplitPlane,
    z: &[f64],
    y: &[f64],
    criterion: Criterion,
    pairs: &mut Vec<(f64, f64)>,
) -> Option<SplitCandidate> {
    let t = threshold::best_threshold_with(z, y, criterion, pairs).ok()?;
    plane.threshold = t.threshold;
    Some(SplitCandidate {
        plane,
        gain: t.gain,
        left_count: t.left_count,
        right_count: z.len() - t.left_count,
    })
}

fn identical_rows(node: &NodeData, data: &Dataset) -> bool {
    let first = data.row(node.indices[0]);
    node.indices[1..].iter().all(|&i| data.row(i) == first)
}

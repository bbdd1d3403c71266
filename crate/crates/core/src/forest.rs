//! Oblique random forests: `B` randomized trees averaged (regression) or
//! voted (classification).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::rng;
use crate::tree::{grow, GrowConfig, ObliqueTree, PruneConfig};

pub use crate::split::draw_subset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Aggregation {
    /// Mean for regression, majority vote for classification (ties to 0).
    #[default]
    Vote,
    /// Mean of tree outputs, thresholded at 0.5 for classification.
    MeanThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ForestConfig {
    pub trees: usize,
    pub grow: GrowConfig,
    pub prune: Option<PruneConfig>,
    pub bootstrap: bool,
    pub aggregation: Aggregation,
    pub seed: u64,
}

impl Default for ForestConfig {
    fn default() -> Self {
        ForestConfig {
            trees: 100,
            grow: GrowConfig::default(),
            prune: None,
            bootstrap: false,
            aggregation: Aggregation::Vote,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Forest {
    pub task: Task,
    pub aggregation: Aggregation,
    pub trees: Vec<ObliqueTree>,
}

/// Fits tree `b` (1-based) on its own stream `(seed, b)`. Trees run in
/// parallel on the current rayon pool; the result does not depend on the
/// schedule.
pub fn fit_forest(data: &Dataset, train: &[usize], config: &ForestConfig) -> Result<Forest> {
    if config.trees == 0 {
        return Err(Error::BadConfig("a forest needs at least one tree".into()));
    }
    let trees = (1..=config.trees as u64)
        .into_par_iter()
        .map(|b| fit_member(data, train, config, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(Forest {
        task: data.task(),
        aggregation: config.aggregation,
        trees,
    })
}

/// Tree `b` of the forest described by `config`.
pub fn fit_member(
    data: &Dataset,
    train: &[usize],
    config: &ForestConfig,
    b: u64,
) -> Result<ObliqueTree> {
    let mut rng = rng::stream(config.seed, b);
    let sample: Vec<usize> = if config.bootstrap {
        (0..train.len())
            .map(|_| train[rng.random_range(0..train.len())])
            .collect()
    } else {
        train.to_vec()
    };
    let tree = grow(data, &sample, &config.grow, true, &mut rng)?;
    Ok(match &config.prune {
        Some(prune) => tree.prune(prune),
        None => tree,
    })
}

impl Forest {
    pub fn n_features(&self) -> usize {
        self.trees[0].n_features
    }

    fn tree_outputs(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.trees.iter().map(|t| t.predict(x)).collect()
    }

    /// Fraction of trees voting for class 1 (classification).
    pub fn vote_fraction(&self, x: &[f64]) -> Result<f64> {
        let votes = self.tree_outputs(x)?.iter().filter(|&&m| m >= 0.5).count();
        Ok(votes as f64 / self.trees.len() as f64)
    }

    /// Regression: mean of tree predictions. Classification: the class as 0.0 or 1.0.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        let outputs = self.tree_outputs(x)?;
        let mean = outputs.iter().sum::<f64>() / outputs.len() as f64;
        Ok(match (self.task, self.aggregation) {
            (Task::Regression, _) => mean,
            (Task::Classification, Aggregation::Vote) => {
                let votes = outputs.iter().filter(|&&m| m >= 0.5).count();
                f64::from(u8::from(2 * votes > outputs.len()))
            }
            (Task::Classification, Aggregation::MeanThreshold) => f64::from(u8::from(mean >= 0.5)),
        })
    }

    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        if self.task != Task::Classification {
            return Err(Error::WrongTask);
        }
        Ok(self.predict(x)? as u8)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::split::QRule;
    use crate::tree::grow_seeded;
    use crate::tree::LeafBudget;

    fn sample(n: usize, p: usize, seed: u64, task: Task) -> Dataset {
        let mut r = rng::stream(seed, 1000);
        let x: Vec<f64> = (0..n * p).map(|_| r.random()).collect();
        let y = (0..n)
            .map(|i| {
                let s: f64 = x[i * p..(i + 1) * p].iter().sum::<f64>() / p as f64;
                match task {
                    Task::Regression => (4.0 * s).sin(),
                    Task::Classification => f64::from(u8::from(s > 0.5)),
                }
            })
            .collect();
        Dataset::new(x, y, p, task).unwrap()
    }

    fn config(trees: usize, rule: QRule) -> ForestConfig {
        let mut c = ForestConfig {
            trees,
            seed: 11,
            ..ForestConfig::default()
        };
        c.grow.split.q_rule = rule;
        c.grow.leaf_budget = LeafBudget::Fixed(20);
        c
    }

    #[test]
    fn single_tree_forest_is_that_tree() {
        let data = sample(100, 3, 1, Task::Regression);
        let cfg = config(1, QRule::Theory);
        let forest = fit_forest(&data, &data.all_indices(), &cfg).unwrap();
        let mut rng = rng::stream(11, 1);
        let tree = grow(&data, &data.all_indices(), &cfg.grow, true, &mut rng).unwrap();
        assert_eq!(forest.trees[0], tree);
        for i in 0..10 {
            assert_eq!(
                forest.predict(data.row(i)).unwrap(),
                tree.predict(data.row(i)).unwrap()
            );
        }
    }

    #[test]
    fn deterministic_tree_equals_fixed_p_forest_member() {
        let data = sample(80, 3, 2, Task::Regression);
        let cfg = config(1, QRule::Fixed(3));
        let forest = fit_forest(&data, &data.all_indices(), &cfg).unwrap();
        let odt = grow_seeded(&data, &data.all_indices(), &cfg.grow, false).unwrap();
        for i in 0..80 {
            assert_eq!(
                forest.predict(data.row(i)).unwrap(),
                odt.predict(data.row(i)).unwrap()
            );
        }
    }

    #[test]
    fn constant_targets() {
        let mut data = sample(50, 2, 3, Task::Regression);
        data = Dataset::new(data.features().to_vec(), vec![2.5; 50], 2, Task::Regression).unwrap();
        let forest = fit_forest(&data, &data.all_indices(), &config(5, QRule::Practical)).unwrap();
        assert_eq!(forest.predict(&[0.2, 0.7]).unwrap(), 2.5);
    }

    #[test]
    fn fixed_one_uses_single_coordinates() {
        let data = sample(100, 4, 4, Task::Regression);
        let forest = fit_forest(&data, &data.all_indices(), &config(4, QRule::Fixed(1))).unwrap();
        assert!(forest
            .trees
            .iter()
            .flat_map(|t| t.planes())
            .all(|p| p.subset.len() == 1));
    }

    #[test]
    fn thread_count_does_not_matter() {
        let data = sample(120, 3, 5, Task::Classification);
        let cfg = config(6, QRule::Theory);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap();
        let a = one
            .install(|| fit_forest(&data, &data.all_indices(), &cfg))
            .unwrap();
        let b = four
            .install(|| fit_forest(&data, &data.all_indices(), &cfg))
            .unwrap();
        assert_eq!(a, b);
        assert!(a
            .trees
            .iter()
            .all(|t| t.leaves().all(|(_, n)| (0.0..=1.0).contains(&n.mean))));
    }

    #[test]
    fn voting_rules() {
        let leaf = |mean: f64| ObliqueTree {
            task: Task::Classification,
            n_features: 1,
            n_train: 1,
            nodes: vec![crate::tree::Node {
                mean,
                count: 1,
                sse: 0.0,
                positives: 0,
                layer: 0,
                kind: crate::tree::NodeKind::Leaf,
            }],
            trace: vec![],
        };
        let forest = |means: &[f64]| Forest {
            task: Task::Classification,
            aggregation: Aggregation::Vote,
            trees: means.iter().map(|&m| leaf(m)).collect(),
        };
        assert_eq!(forest(&[1.0, 1.0, 0.0]).classify(&[0.5]).unwrap(), 1);
        assert_eq!(forest(&[1.0, 0.0]).classify(&[0.5]).unwrap(), 0);
        assert_eq!(forest(&[1.0, 0.0]).vote_fraction(&[0.5]).unwrap(), 0.5);
        let mut mean = forest(&[1.0, 0.0]);
        mean.aggregation = Aggregation::MeanThreshold;
        assert_eq!(mean.classify(&[0.5]).unwrap(), 1);
        let mut reg = forest(&[1.0, 2.0, 3.0]);
        reg.task = Task::Regression;
        assert_eq!(reg.predict(&[0.5]).unwrap(), 2.0);
    }

    #[test]
    fn theory_rule_sizes_are_uniform() {
        let mut r = rng::stream(8, 0);
        let mut counts = [0usize; 3];
        for _ in 0..30000 {
            counts[draw_subset(3, 100, QRule::Theory, &mut r).len() - 1] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30000.0 - 1.0 / 3.0).abs() < 0.02, "{counts:?}");
        }
    }
}

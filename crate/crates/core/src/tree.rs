//! Breadth-first growth under a leaf budget, prediction, truncation and
//! cost-complexity pruning.
//!
//! Growth processes one queue per layer in insertion order. A node that
//! cannot be split is carried to the next layer unchanged; every successful
//! split adds one leaf, and growth stops as soon as the budget is reached,
//! possibly in the middle of a layer. Because the split chosen for a node never
//! depends on the budget, the first `k` splits of the trace describe exactly
//! the tree that a budget of `k + 1` leaves would have produced.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Task};
use crate::error::{Error, Result};
use crate::rng::{self, Stream};
use crate::split::{propose_and_select, NodeData, QRule, SplitConfig, SplitPlane};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LeafBudget {
    /// `ceil(n^(4/5))`.
    #[default]
    Auto,
    Fixed(usize),
}

impl LeafBudget {
    pub fn resolve(self, n: usize) -> usize {
        match self {
            LeafBudget::Auto => ((n as f64).powf(0.8).ceil() as usize).clamp(1, n.max(1)),
            LeafBudget::Fixed(t) => t,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct GrowConfig {
    pub leaf_budget: LeafBudget,
    pub split: SplitConfig,
    pub seed: u64,
}

impl GrowConfig {
    pub fn with_leaves(t_n: usize) -> Self {
        GrowConfig {
            leaf_budget: LeafBudget::Fixed(t_n),
            ..GrowConfig::default()
        }
    }
}

/// Penalty per leaf. `None` picks `n^(-1/2) * var(y)` for regression and
/// `n^(-1/2)` for classification, from the tree's own training sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PruneConfig {
    pub alpha: Option<f64>,
}

impl PruneConfig {
    pub fn with_alpha(alpha: f64) -> Self {
        PruneConfig { alpha: Some(alpha) }
    }

    pub fn resolve(&self, tree: &ObliqueTree) -> f64 {
        self.alpha.unwrap_or_else(|| {
            let n = tree.n_train as f64;
            match tree.task {
                Task::Regression => tree.training_variance() / n.sqrt(),
                Task::Classification => 1.0 / n.sqrt(),
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum NodeKind {
    Leaf,
    Split {
        plane: SplitPlane,
        left: usize,
        right: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Node {
    /// Mean training target; the prediction when this node is a leaf.
    pub mean: f64,
    pub count: usize,
    /// Training squared error around `mean`.
    pub sse: f64,
    /// Training points with label 1 (classification only).
    pub positives: usize,
    /// Layer at which the node was split; for leaves, the layer that created them.
    pub layer: usize,
    pub kind: NodeKind,
}

impl Node {
    /// Training misclassifications if this node votes per the `>= 0.5` rule.
    pub fn errors(&self) -> usize {
        if self.mean >= 0.5 {
            self.count - self.positives
        } else {
            self.positives
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SplitEvent {
    pub node: usize,
    pub plane: SplitPlane,
    /// Criterion gain per sample of the split node.
    pub gain: f64,
    /// Training SSE of the whole tree after this split.
    pub sse_after: f64,
    /// Training misclassifications of the whole tree after this split.
    pub errors_after: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObliqueTree {
    pub task: Task,
    pub n_features: usize,
    pub n_train: usize,
    /// Split `k` of the trace creates nodes `2k + 1` (left) and `2k + 2` (right).
    pub nodes: Vec<Node>,
    pub trace: Vec<SplitEvent>,
}

/// Grows a tree on `train` with the given leaf budget.
///
/// With `randomized` off every candidate may combine all coordinates
/// (`q_rule` is forced to `fixed(p)`) unless the rule is axis-aligned.
pub fn grow(
    data: &Dataset,
    train: &[usize],
    config: &GrowConfig,
    randomized: bool,
    rng: &mut Stream,
) -> Result<ObliqueTree> {
    let n = train.len();
    if n == 0 {
        return Err(Error::EmptyDataset);
    }
    let budget = config.leaf_budget.resolve(n);
    if budget > n {
        return Err(Error::BudgetExceedsData { budget, n });
    }
    if budget == 0 {
        return Err(Error::BadConfig("leaf budget must be at least 1".into()));
    }
    let p = data.n_features();
    let mut split_config = config.split.clone();
    if !randomized && split_config.q_rule != QRule::AxisAligned {
        split_config.q_rule = QRule::Fixed(p);
    }
    split_config.validate(p)?;

    let mut builder = Builder {
        data,
        nodes: Vec::new(),
        samples: Vec::new(),
    };
    builder.push_node(NodeData::new(data, train.to_vec()), 0);
    let mut trace: Vec<SplitEvent> = Vec::new();
    let mut sse = builder.nodes[0].sse;
    let mut errors = builder.nodes[0].errors();

    let mut layer = 0;
    let mut current: VecDeque<usize> = VecDeque::from([0]);
    let mut next: VecDeque<usize> = VecDeque::new();
    let mut split_this_layer = false;
    let mut leaves = 1;
    while leaves < budget {
        let Some(id) = current.pop_front() else {
            if next.is_empty() || !split_this_layer {
                break;
            }
            layer += 1;
            std::mem::swap(&mut current, &mut next);
            split_this_layer = false;
            continue;
        };
        let node = NodeData {
            indices: std::mem::take(&mut builder.samples[id]),
            mean: builder.nodes[id].mean,
            sse: builder.nodes[id].sse,
        };
        let Some(cand) = propose_and_select(&node, data, &split_config, n, rng) else {
            builder.samples[id] = node.indices;
            next.push_back(id);
            continue;
        };
        let (left_idx, right_idx): (Vec<usize>, Vec<usize>) = node
            .indices
            .iter()
            .partition(|&&i| cand.plane.goes_left(data.row(i)));
        debug_assert_eq!(left_idx.len(), cand.left_count);
        let left = builder.push_node(NodeData::new(data, left_idx), layer + 1);
        let right = builder.push_node(NodeData::new(data, right_idx), layer + 1);

        builder.nodes[id].layer = layer;
        let parent = &builder.nodes[id];
        sse += builder.nodes[left].sse + builder.nodes[right].sse - parent.sse;
        errors =
            errors + builder.nodes[left].errors() + builder.nodes[right].errors() - parent.errors();
        builder.nodes[id].kind = NodeKind::Split {
            plane: cand.plane.clone(),
            left,
            right,
        };
        trace.push(SplitEvent {
            node: id,
            plane: cand.plane,
            gain: cand.gain,
            sse_after: sse.max(0.0),
            errors_after: errors,
        });
        next.push_back(left);
        next.push_back(right);
        leaves += 1;
        split_this_layer = true;
    }

    Ok(ObliqueTree {
        task: data.task(),
        n_features: p,
        n_train: n,
        nodes: builder.nodes,
        trace,
    })
}

/// [`grow`] with the stream derived from `config.seed`.
pub fn grow_seeded(
    data: &Dataset,
    train: &[usize],
    config: &GrowConfig,
    randomized: bool,
) -> Result<ObliqueTree> {
    grow(
        data,
        train,
        config,
        randomized,
        &mut rng::stream(config.seed, 0),
    )
}

struct Builder<'a> {
    data: &'a Dataset,
    nodes: Vec<Node>,
    samples: Vec<Vec<usize>>,
}

impl Builder<'_> {
    fn push_node(&mut self, node: NodeData, layer: usize) -> usize {
        let positives = match self.data.task() {
            Task::Classification => node.positives(self.data),
            Task::Regression => 0,
        };
        self.nodes.push(Node {
            mean: node.mean,
            count: node.len(),
            sse: node.sse,
            positives,
            layer,
            kind: NodeKind::Leaf,
        });
        self.samples.push(node.indices);
        self.nodes.len() - 1
    }
}

impl ObliqueTree {
    pub fn leaf_count(&self) -> usize {
        self.trace.len() + 1
    }

    pub fn internal_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.is_leaf()).count()
    }

    pub fn leaves(&self) -> impl Iterator<Item = (usize, &Node)> {
        self.nodes.iter().enumerate().filter(|(_, n)| n.is_leaf())
    }

    pub fn planes(&self) -> impl Iterator<Item = &SplitPlane> {
        self.nodes.iter().filter_map(|n| match &n.kind {
            NodeKind::Split { plane, .. } => Some(plane),
            NodeKind::Leaf => None,
        })
    }

    /// Deepest layer index reached by any node.
    pub fn depth(&self) -> usize {
        self.nodes.iter().map(|n| n.layer).max().unwrap_or(0)
    }

    pub fn root_sse(&self) -> f64 {
        self.nodes[0].sse
    }

    /// Training SSE after `splits` splits of the trace.
    pub fn sse_after(&self, splits: usize) -> f64 {
        if splits == 0 {
            self.root_sse()
        } else {
            self.trace[splits - 1].sse_after
        }
    }

    pub fn errors_after(&self, splits: usize) -> usize {
        if splits == 0 {
            self.nodes[0].errors()
        } else {
            self.trace[splits - 1].errors_after
        }
    }

    pub fn training_sse(&self) -> f64 {
        self.sse_after(self.trace.len())
    }

    /// Population variance of the training targets.
    pub fn training_variance(&self) -> f64 {
        self.root_sse() / self.n_train as f64
    }

    pub fn leaf_index(&self, x: &[f64]) -> Result<usize> {
        if x.len() != self.n_features {
            return Err(Error::DimensionMismatch {
                expected: self.n_features,
                found: x.len(),
            });
        }
        let mut id = 0;
        while let NodeKind::Split { plane, left, right } = &self.nodes[id].kind {
            id = if plane.goes_left(x) { *left } else { *right };
        }
        Ok(id)
    }

    /// Mean training target of the leaf containing `x`.
    pub fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self.nodes[self.leaf_index(x)?].mean)
    }

    /// Class 1 when the leaf mean is at least 0.5.
    pub fn classify(&self, x: &[f64]) -> Result<u8> {
        if self.task != Task::Classification {
            return Err(Error::WrongTask);
        }
        Ok(u8::from(self.predict(x)? >= 0.5))
    }

    /// The tree after its first `tau - 1` splits.
    pub fn truncate_to_leaves(&self, tau: usize) -> Result<ObliqueTree> {
        let leaves = self.leaf_count();
        if tau == 0 || tau > leaves {
            return Err(Error::BadTau { tau, leaves });
        }
        let keep = tau - 1;
        let mut nodes: Vec<Node> = self.nodes[..2 * keep + 1].to_vec();
        for id in 0..nodes.len() {
            if let NodeKind::Split { left, .. } = nodes[id].kind {
                if (left - 1) / 2 >= keep {
                    nodes[id].kind = NodeKind::Leaf;
                    nodes[id].layer = match id {
                        0 => 0,
                        _ => nodes[self.trace[(id - 1) / 2].node].layer + 1,
                    };
                }
            }
        }
        Ok(ObliqueTree {
            task: self.task,
            n_features: self.n_features,
            n_train: self.n_train,
            nodes,
            trace: self.trace[..keep].to_vec(),
        })
    }

    /// Penalized training loss for every leaf count `1..=leaf_count`.
    pub fn pruning_objectives(&self, alpha: f64) -> Vec<f64> {
        let n = self.n_train as f64;
        (0..self.leaf_count())
            .map(|k| {
                let loss = match self.task {
                    Task::Regression => self.sse_after(k) / n,
                    Task::Classification => self.errors_after(k) as f64 / n,
                };
                loss + alpha * (k + 1) as f64
            })
            .collect()
    }

    /// Leaf count minimizing the penalized loss; ties go to the smaller tree.
    pub fn optimal_leaves(&self, alpha: f64) -> usize {
        argmin_first(&self.pruning_objectives(alpha)) + 1
    }

    pub fn prune(&self, config: &PruneConfig) -> ObliqueTree {
        let tau = self.optimal_leaves(config.resolve(self));
        self.truncate_to_leaves(tau)
            .expect("optimal leaf count is in range")
    }
}

pub(crate) fn argmin_first(values: &[f64]) -> usize {
    let mut best = 0;
    for (k, &v) in values.iter().enumerate().skip(1) {
        if v < values[best] {
            best = k;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_regression(n: usize, p: usize, seed: u64) -> Dataset {
        let mut rng = rng::stream(seed, 7);
        let x: Vec<f64> = (0..n * p).map(|_| rng.random()).collect();
        let y = (0..n)
            .map(|i| (3.0 * (x[i * p] + x[i * p + 1 % p])).sin() + 0.1 * rng.random::<f64>())
            .collect();
        Dataset::new(x, y, p, Task::Regression).unwrap()
    }

    #[test]
    fn budget_of_one_gives_root() {
        let data = random_regression(30, 3, 1);
        let tree = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(1),
            false,
        )
        .unwrap();
        assert_eq!(tree.leaf_count(), 1);
        let mean = data.targets().iter().sum::<f64>() / 30.0;
        assert!((tree.predict(&[0.3, 0.2, 0.9]).unwrap() - mean).abs() < 1e-12);
    }

    #[test]
    fn budget_above_n_is_rejected() {
        let data = random_regression(5, 2, 1);
        assert!(matches!(
            grow_seeded(
                &data,
                &data.all_indices(),
                &GrowConfig::with_leaves(6),
                false
            ),
            Err(Error::BudgetExceedsData { budget: 6, n: 5 })
        ));
    }

    #[test]
    fn isolating_every_point_zeroes_the_loss() {
        let x = vec![0.1, 0.9, 0.4, 0.4, 0.8, 0.2, 0.6, 0.7];
        let data = Dataset::new(x, vec![1.0, 5.0, 2.0, 7.0], 2, Task::Regression).unwrap();
        let tree = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(4),
            false,
        )
        .unwrap();
        assert_eq!(tree.leaf_count(), 4);
        assert!(tree.training_sse().abs() < 1e-12);
        for i in 0..4 {
            assert_eq!(tree.predict(data.row(i)).unwrap(), data.target(i));
        }
    }

    #[test]
    fn structure_invariants() {
        let data = random_regression(200, 4, 3);
        let config = GrowConfig {
            leaf_budget: LeafBudget::Auto,
            ..GrowConfig::default()
        };
        let tree = grow_seeded(&data, &data.all_indices(), &config, true).unwrap();
        assert_eq!(tree.leaf_count(), LeafBudget::Auto.resolve(200));
        assert_eq!(tree.leaves().count(), tree.internal_count() + 1);
        for (k, ev) in tree.trace.iter().enumerate() {
            let NodeKind::Split { left, right, .. } = tree.nodes[ev.node].kind else {
                panic!("trace node is a leaf");
            };
            assert_eq!((left, right), (2 * k + 1, 2 * k + 2));
            assert_eq!(tree.nodes[left].layer, tree.nodes[ev.node].layer + 1);
            let drop = tree.sse_after(k) - ev.sse_after;
            let expected = tree.nodes[ev.node].count as f64 * ev.gain;
            assert!((drop - expected).abs() <= 1e-8 * tree.root_sse().max(1.0));
        }
        // every training point lands in exactly one leaf, counts add up
        let mut counts = vec![0; tree.nodes.len()];
        for i in 0..200 {
            counts[tree.leaf_index(data.row(i)).unwrap()] += 1;
        }
        for (id, node) in tree.leaves() {
            assert_eq!(counts[id], node.count);
        }
    }

    #[test]
    fn truncation_matches_smaller_budget() {
        let data = random_regression(120, 3, 4);
        let full = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(40),
            true,
        )
        .unwrap();
        let small = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(17),
            true,
        )
        .unwrap();
        assert_eq!(full.truncate_to_leaves(17).unwrap(), small);
        assert_eq!(full.truncate_to_leaves(40).unwrap(), full);
        assert_eq!(full.truncate_to_leaves(1).unwrap().nodes.len(), 1);
        assert!(matches!(
            full.truncate_to_leaves(0),
            Err(Error::BadTau { .. })
        ));
        assert!(matches!(
            full.truncate_to_leaves(41),
            Err(Error::BadTau { .. })
        ));
        let sse: Vec<f64> = (1..=40)
            .map(|t| full.truncate_to_leaves(t).unwrap().training_sse())
            .collect();
        assert!(sse.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn prune_extremes() {
        let data = random_regression(150, 3, 5);
        let tree = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(30),
            false,
        )
        .unwrap();
        assert_eq!(tree.prune(&PruneConfig::with_alpha(0.0)).leaf_count(), 30);
        let var = tree.training_variance();
        assert_eq!(tree.prune(&PruneConfig::with_alpha(var)).leaf_count(), 1);
        let auto = tree.prune(&PruneConfig::default());
        assert!(auto.leaf_count() <= 30);
    }

    #[test]
    fn argmin_hand_case() {
        let losses = [1.0, 0.2, 0.15];
        let objectives: Vec<f64> = losses
            .iter()
            .enumerate()
            .map(|(k, l)| l + 0.1 * (k + 1) as f64)
            .collect();
        assert_eq!(argmin_first(&objectives) + 1, 2);
        assert_eq!(argmin_first(&[0.5, 0.5, 0.7]), 0);
    }

    #[test]
    fn boundary_points_route_left() {
        let data = Dataset::new(
            vec![0.2, 0.4, 0.6, 0.8],
            vec![0.0, 0.0, 1.0, 1.0],
            1,
            Task::Classification,
        )
        .unwrap();
        let tree = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(2),
            false,
        )
        .unwrap();
        let NodeKind::Split { plane, .. } = &tree.nodes[0].kind else {
            panic!()
        };
        assert_eq!(plane.threshold, 0.5);
        assert_eq!(tree.predict(&[0.5]).unwrap(), 0.0);
        assert_eq!(tree.classify(&[0.5]).unwrap(), 0);
        assert_eq!(tree.classify(&[0.51]).unwrap(), 1);
    }

    #[test]
    fn classify_needs_classification_tree() {
        let data = random_regression(10, 2, 1);
        let tree = grow_seeded(
            &data,
            &data.all_indices(),
            &GrowConfig::with_leaves(2),
            false,
        )
        .unwrap();
        assert!(matches!(tree.classify(&[0.1, 0.1]), Err(Error::WrongTask)));
        assert!(matches!(
            tree.predict(&[0.1]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn half_mean_votes_one() {
        let node = Node {
            mean: 0.5,
            count: 4,
            sse: 1.0,
            positives: 2,
            layer: 0,
            kind: NodeKind::Leaf,
        };
        let tree = ObliqueTree {
            task: Task::Classification,
            n_features: 1,
            n_train: 4,
            nodes: vec![node.clone()],
            trace: vec![],
        };
        assert_eq!(tree.classify(&[0.3]).unwrap(), 1);
        let mut low = tree.clone();
        low.nodes[0].mean = 0.49;
        assert_eq!(low.classify(&[0.3]).unwrap(), 0);
    }
}

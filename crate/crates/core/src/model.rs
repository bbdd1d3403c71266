//! Method selection, fitted models and the persisted model document.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, ScalingMode, ScalingTransform, Task};
use crate::error::{Error, Result};
use crate::forest::{fit_forest, Aggregation, Forest, ForestConfig};
use crate::rng;
use crate::split::{QRule, SplitConfig};
use crate::tree::{grow, GrowConfig, LeafBudget, ObliqueTree, PruneConfig};

pub const FORMAT_VERSION: u32 = 1;

/// Anything that maps a point of the unit cube to a response.
pub trait Predictor: Sync {
    /// Regression estimate, or the estimated probability-like score for classification.
    fn predict(&self, x: &[f64]) -> Result<f64>;

    fn classify(&self, x: &[f64]) -> Result<u8> {
        Ok(u8::from(self.predict(x)? >= 0.5))
    }
}

impl Predictor for ObliqueTree {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        ObliqueTree::predict(self, x)
    }
}

impl Predictor for Forest {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        match self.task {
            Task::Regression => Forest::predict(self, x),
            Task::Classification => self.vote_fraction(x),
        }
    }

    fn classify(&self, x: &[f64]) -> Result<u8> {
        Forest::classify(self, x)
    }
}

impl<F> Predictor for F
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    fn predict(&self, x: &[f64]) -> Result<f64> {
        Ok(self(x))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    /// Predicts the training mean everywhere.
    Mean,
    /// Axis-aligned splits only, exhaustive over features.
    Cart,
    /// Deterministic oblique tree over all coordinates.
    Odt,
    PrunedOdt,
    /// Oblique random forest.
    Odrf,
    PrunedOdrf,
}

impl Method {
    pub const ALL: [Method; 6] = [
        Method::Mean,
        Method::Cart,
        Method::Odt,
        Method::PrunedOdt,
        Method::Odrf,
        Method::PrunedOdrf,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Mean => "mean",
            Method::Cart => "cart",
            Method::Odt => "odt",
            Method::PrunedOdt => "pruned-odt",
            Method::Odrf => "odrf",
            Method::PrunedOdrf => "pruned-odrf",
        }
    }

    pub fn is_forest(self) -> bool {
        matches!(self, Method::Odrf | Method::PrunedOdrf)
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let s = if s == "mean-baseline" { "mean" } else { s };
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| {
                let names: Vec<_> = Method::ALL.iter().map(|m| m.name()).collect();
                format!("unknown method `{s}` (expected one of {})", names.join("|"))
            })
    }
}

/// Everything needed to fit one method, with the documented defaults.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodConfig {
    pub method: Method,
    pub trees: usize,
    pub leaf_budget: LeafBudget,
    pub split: SplitConfig,
    /// Pruning penalty; `None` uses the data-driven default.
    pub alpha: Option<f64>,
    pub bootstrap: bool,
    pub aggregation: Aggregation,
}

impl MethodConfig {
    pub fn new(method: Method) -> Self {
        MethodConfig {
            method,
            trees: 100,
            leaf_budget: LeafBudget::Auto,
            split: SplitConfig::default(),
            alpha: None,
            bootstrap: false,
            aggregation: Aggregation::Vote,
        }
    }

    pub fn with_trees(mut self, trees: usize) -> Self {
        self.trees = trees;
        self
    }

    pub fn with_q_rule(mut self, rule: QRule) -> Self {
        self.split.q_rule = rule;
        self
    }

    pub fn with_leaf_budget(mut self, budget: LeafBudget) -> Self {
        self.leaf_budget = budget;
        self
    }

    pub fn with_alpha(mut self, alpha: Option<f64>) -> Self {
        self.alpha = alpha;
        self
    }

    fn grow_config(&self, seed: u64) -> GrowConfig {
        let mut split = self.split.clone();
        if self.method == Method::Cart {
            split.q_rule = QRule::AxisAligned;
        }
        GrowConfig {
            leaf_budget: self.leaf_budget,
            split,
            seed,
        }
    }

    fn forest_config(&self, seed: u64) -> ForestConfig {
        ForestConfig {
            trees: self.trees,
            grow: self.grow_config(seed),
            prune: (self.method == Method::PrunedOdrf).then_some(PruneConfig { alpha: self.alpha }),
            bootstrap: self.bootstrap,
            aggregation: self.aggregation,
            seed,
        }
    }

    /// Fits on the `train` rows. Single trees use stream `(seed, 0)`; forest
    /// tree `b` uses `(seed, b)`.
    pub fn fit(&self, data: &Dataset, train: &[usize], seed: u64) -> Result<FittedModel> {
        if train.is_empty() {
            return Err(Error::EmptyDataset);
        }
        Ok(match self.method {
            Method::Mean => FittedModel::Mean {
                task: data.task(),
                value: train.iter().map(|&i| data.target(i)).sum::<f64>() / train.len() as f64,
            },
            Method::Cart | Method::Odt | Method::PrunedOdt => {
                let config = self.grow_config(seed);
                let tree = grow(data, train, &config, false, &mut rng::stream(seed, 0))?;
                FittedModel::Tree(if self.method == Method::PrunedOdt {
                    tree.prune(&PruneConfig { alpha: self.alpha })
                } else {
                    tree
                })
            }
            Method::Odrf | Method::PrunedOdrf => {
                FittedModel::Forest(fit_forest(data, train, &self.forest_config(seed))?)
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Mean { task: Task, value: f64 },
    Tree(ObliqueTree),
    Forest(Forest),
}

impl FittedModel {
    pub fn trees(&self) -> &[ObliqueTree] {
        match self {
            FittedModel::Mean { .. } => &[],
            FittedModel::Tree(t) => std::slice::from_ref(t),
            FittedModel::Forest(f) => &f.trees,
        }
    }

    pub fn task(&self) -> Task {
        match self {
            FittedModel::Mean { task, .. } => *task,
            FittedModel::Tree(t) => t.task,
            FittedModel::Forest(f) => f.task,
        }
    }
}

impl Predictor for FittedModel {
    fn predict(&self, x: &[f64]) -> Result<f64> {
        match self {
            FittedModel::Mean { value, .. } => Ok(*value),
            FittedModel::Tree(t) => Predictor::predict(t, x),
            FittedModel::Forest(f) => Predictor::predict(f, x),
        }
    }

    fn classify(&self, x: &[f64]) -> Result<u8> {
        match self {
            FittedModel::Forest(f) => f.classify(x),
            _ => Ok(u8::from(self.predict(x)? >= 0.5)),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Tree,
    Forest,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingInfo {
    pub mode: ScalingMode,
    pub feature_names: Vec<String>,
    pub target_name: String,
    pub mins: Vec<f64>,
    pub ranges: Vec<f64>,
}

/// Versioned JSON document holding a fitted tree or forest together with the
/// scaler and a full echo of the parameters that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub format_version: u32,
    pub task: Task,
    pub kind: ModelKind,
    pub seed: u64,
    pub params: MethodConfig,
    pub scaling: ScalingInfo,
    pub aggregation: Aggregation,
    pub trees: Vec<ObliqueTree>,
}

impl ModelDocument {
    pub fn new(
        model: &FittedModel,
        params: &MethodConfig,
        seed: u64,
        scaler: &ScalingTransform,
        mode: ScalingMode,
        feature_names: Vec<String>,
        target_name: String,
    ) -> Result<Self> {
        let (kind, aggregation) = match model {
            FittedModel::Mean { .. } => {
                return Err(Error::BadConfig(
                    "the mean baseline has no model document".into(),
                ))
            }
            FittedModel::Tree(_) => (ModelKind::Tree, Aggregation::Vote),
            FittedModel::Forest(f) => (ModelKind::Forest, f.aggregation),
        };
        Ok(ModelDocument {
            format_version: FORMAT_VERSION,
            task: model.task(),
            kind,
            seed,
            params: params.clone(),
            scaling: ScalingInfo {
                mode,
                feature_names,
                target_name,
                mins: scaler.mins.clone(),
                ranges: scaler.ranges.clone(),
            },
            aggregation,
            trees: model.trees().to_vec(),
        })
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Header {
            format_version: u32,
        }
        let header: Header = serde_json::from_str(text)?;
        if header.format_version != FORMAT_VERSION {
            return Err(Error::VersionMismatch {
                expected: FORMAT_VERSION,
                found: header.format_version,
            });
        }
        let doc: ModelDocument = serde_json::from_str(text)?;
        if doc.trees.is_empty() || (doc.kind == ModelKind::Tree && doc.trees.len() != 1) {
            return Err(Error::SchemaMismatch(format!(
                "{:?} document with {} trees",
                doc.kind,
                doc.trees.len()
            )));
        }
        let p = doc.scaling.feature_names.len();
        if doc.scaling.mins.len() != p
            || doc.scaling.ranges.len() != p
            || doc.trees.iter().any(|t| t.n_features != p)
        {
            return Err(Error::SchemaMismatch(
                "feature dimension disagrees across the document".into(),
            ));
        }
        Ok(doc)
    }

    pub fn scaler(&self) -> ScalingTransform {
        ScalingTransform {
            mins: self.scaling.mins.clone(),
            ranges: self.scaling.ranges.clone(),
        }
    }

    pub fn model(&self) -> FittedModel {
        match self.kind {
            ModelKind::Tree => FittedModel::Tree(self.trees[0].clone()),
            ModelKind::Forest => FittedModel::Forest(Forest {
                task: self.task,
                aggregation: self.aggregation,
                trees: self.trees.clone(),
            }),
        }
    }
}

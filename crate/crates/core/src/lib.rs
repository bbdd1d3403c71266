//! Oblique decision trees (ODT) and oblique random forests (ODRF).
//!
//! Trees are grown breadth-first under a leaf budget. Each internal node cuts
//! the sample with a hyperplane `theta^T x_S <= s` over a coordinate subset `S`,
//! chosen as the best of several candidate directions scored by impurity gain.
//! Forests average (or vote over) trees whose subsets are drawn at random.
//!
//! ```
//! use odrf_core::data::{Dataset, Task};
//! use odrf_core::tree::{grow, GrowConfig};
//! use odrf_core::rng::stream;
//!
//! let x = vec![0.0, 0.2, 0.5, 0.9];
//! let y = vec![0.0, 0.0, 1.0, 1.0];
//! let data = Dataset::new(x, y, 1, Task::Regression).unwrap();
//! let config = GrowConfig::with_leaves(2);
//! let tree = grow(&data, &[0, 1, 2, 3], &config, false, &mut stream(7, 0)).unwrap();
//! assert_eq!(tree.leaf_count(), 2);
//! assert_eq!(tree.predict(&[0.1]).unwrap(), 0.0);
//! ```

pub mod data;
pub mod error;
pub mod eval;
pub mod forest;
pub mod model;
pub mod rng;
pub mod split;
pub mod tree;

pub use data::{Dataset, Partition, RawDataset, ScalingMode, ScalingTransform, Task};
pub use error::{Error, Result};
pub use forest::{Aggregation, Forest, ForestConfig};
pub use model::{FittedModel, Method, MethodConfig, ModelDocument, Predictor};
pub use split::{QRule, SplitCandidate, SplitConfig, SplitPlane};
pub use tree::{GrowConfig, LeafBudget, ObliqueTree, PruneConfig};

//! Hinge regression trees.
//!
//! An oblique regression tree whose internal nodes are learned by fitting a
//! two-piece hinge `max(x̃ᵀθ₁, x̃ᵀθ₂)` (or `min`) to the node's data. The
//! hinge is optimized by alternating between a partition step and a damped
//! Newton step, which inside a fixed partition is exactly a move toward the
//! per-side least-squares solution. Leaves hold affine models, so the fitted
//! tree is a continuous-per-region piecewise-linear function.
//!
//! Module map:
//!
//! - [`data`]: augmented design matrices and coefficient vectors.
//! - [`linalg`]: ridge / OLS solves with an unregularized bias, SPD solves.
//! - [`split`]: node-level hinge optimization and the median fallback split.
//! - [`tree`]: recursive construction, prediction and the model file format.
//! - [`datasets`]: synthetic benchmark functions, train/test splits and CSV.
//! - [`eval`]: metrics, repeated experiments and the step-size ablation.

pub mod config;
pub mod data;
pub mod datasets;
pub mod eval;
pub mod linalg;
pub mod seed;
pub mod split;
pub mod tree;

pub use config::{ConfigError, HrtConfig};
pub use data::{CoefVector, DataError, DesignMatrix};
pub use split::{HingeKind, SplitOutcome, SplitParams, StepPolicy};
pub use tree::{FitError, FitReport, HrtModel, Task, TreeNode};

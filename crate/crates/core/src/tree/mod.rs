//! Hinge regression trees: recursive construction and prediction.

mod build;
mod format;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::config::{ConfigError, HrtConfig};
use crate::data::{CoefVector, DataError, DesignMatrix};
use crate::split::{SplitOutcome, SplitParams};

pub use build::{fit, fit_classifier, fit_with, Parallelism};
pub use format::{load, save, ModelFileError, FORMAT_HEADER};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FitError {
    #[error("training set is empty")]
    EmptyTrainingSet,
    #[error("training set has no features")]
    NoFeatures,
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("classification targets must be 0 or 1 (row {row} is {value})")]
    NonBinaryTarget { row: usize, value: f64 },
}

/// What the targets mean, which decides how predictions are read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Task {
    #[default]
    Regression,
    Classification,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Regression => "regression",
            Task::Classification => "classification",
        }
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "regression" => Ok(Task::Regression),
            "classification" => Ok(Task::Classification),
            other => Err(format!("unknown model kind `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TreeNode {
    Leaf {
        theta: CoefVector,
    },
    Internal {
        split: SplitParams,
        left: Box<TreeNode>,
        right: Box<TreeNode>,
        fallback_used: bool,
    },
}

impl TreeNode {
    /// Longest root-to-leaf edge count.
    pub fn depth(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.depth().max(right.depth()),
        }
    }

    pub fn n_leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Internal { left, right, .. } => left.n_leaves() + right.n_leaves(),
        }
    }

    pub fn n_internal(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Internal { left, right, .. } => 1 + left.n_internal() + right.n_internal(),
        }
    }

    /// The leaf reached by an augmented row.
    pub fn leaf_for(&self, row: &[f64]) -> &CoefVector {
        let mut node = self;
        loop {
            match node {
                TreeNode::Leaf { theta } => return theta,
                TreeNode::Internal {
                    split, left, right, ..
                } => {
                    node = if split.routes_left(row) { left } else { right };
                }
            }
        }
    }
}

/// One node optimization recorded during `fit`.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeTrace {
    /// Breadth-first (heap) index of the node: root 0, children `2i+1`, `2i+2`.
    pub index: u64,
    pub depth: usize,
    pub n_rows: usize,
    /// Outcome of the min-vs-max selection at this node.
    pub outcome: SplitOutcome,
    /// The median fallback replaced the optimized hinge.
    pub fallback_used: bool,
    /// The node became internal (both children had enough rows).
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitReport {
    pub n_leaves: usize,
    pub depth: usize,
    pub n_splits: usize,
    pub n_fallbacks: usize,
    /// Mean node-optimization iterations over all traced nodes.
    pub avg_iterations: f64,
    pub fit_seconds: f64,
    pub per_node_traces: Vec<NodeTrace>,
}

impl FitReport {
    /// `100·fallbacks/splits`, or 0 without splits.
    pub fn fallback_rate_pct(&self) -> f64 {
        if self.n_splits == 0 {
            0.0
        } else {
            100.0 * self.n_fallbacks as f64 / self.n_splits as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct HrtModel {
    pub root: TreeNode,
    pub dim: usize,
    pub task: Task,
    pub cfg: HrtConfig,
    pub report: FitReport,
}

impl HrtModel {
    /// `ŷ(x) = x̃ᵀθ_leaf` at the leaf `x` routes to.
    pub fn predict(&self, x: &[f64]) -> Result<f64, DataError> {
        if x.len() != self.dim {
            return Err(DataError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        let row = crate::data::augment(x);
        Ok(self.root.leaf_for(&row).dot(&row))
    }

    /// Predictions for every row of `m`.
    pub fn predict_matrix(&self, m: &DesignMatrix) -> Result<Vec<f64>, DataError> {
        if m.dim() != self.dim {
            return Err(DataError::DimensionMismatch {
                expected: self.dim,
                actual: m.dim(),
            });
        }
        Ok((0..m.len())
            .map(|j| {
                let row = m.row(j);
                self.root.leaf_for(row).dot(row)
            })
            .collect())
    }

    /// Clipped score and label: `prob = clamp(ŷ, 0, 1)`, label 1 iff
    /// `prob ≥ 0.5`.
    pub fn predict_class(&self, x: &[f64]) -> Result<(f64, u8), DataError> {
        Ok(classify_score(self.predict(x)?))
    }

    /// Leaf coefficients for `x`.
    pub fn leaf(&self, x: &[f64]) -> Result<&CoefVector, DataError> {
        if x.len() != self.dim {
            return Err(DataError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        Ok(self.root.leaf_for(&crate::data::augment(x)))
    }

    pub fn depth(&self) -> usize {
        self.root.depth()
    }

    pub fn n_leaves(&self) -> usize {
        self.root.n_leaves()
    }
}

pub fn classify_score(score: f64) -> (f64, u8) {
    let prob = score.clamp(0.0, 1.0);
    (prob, u8::from(prob >= 0.5))
}

//! Recursive tree construction.

use std::time::Instant;

use crate::config::HrtConfig;
use crate::data::{CoefVector, DesignMatrix};
use crate::linalg::{rmse, solve_ridge};
use crate::seed::{self, stream};
use crate::split::{fallback_split, select_split, SplitParams};

use super::{FitError, FitReport, HrtModel, NodeTrace, Task, TreeNode};

/// Whether sibling subtrees may be built on the current rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Parallelism {
    #[default]
    Serial,
    Subtrees,
}

/// Builds a regression tree.
pub fn fit(train: &DesignMatrix, cfg: &HrtConfig) -> Result<HrtModel, FitError> {
    fit_with(train, cfg, Parallelism::Serial)
}

/// Builds a tree on 0/1 targets; predictions are read through
/// [`HrtModel::predict_class`].
pub fn fit_classifier(train: &DesignMatrix, cfg: &HrtConfig) -> Result<HrtModel, FitError> {
    if let Some((row, &value)) = train
        .targets()
        .iter()
        .enumerate()
        .find(|(_, &y)| y != 0.0 && y != 1.0)
    {
        return Err(FitError::NonBinaryTarget { row, value });
    }
    let mut model = fit(train, cfg)?;
    model.task = Task::Classification;
    Ok(model)
}

pub fn fit_with(
    train: &DesignMatrix,
    cfg: &HrtConfig,
    parallelism: Parallelism,
) -> Result<HrtModel, FitError> {
    cfg.validate()?;
    if train.is_empty() {
        return Err(FitError::EmptyTrainingSet);
    }
    if train.dim() == 0 {
        return Err(FitError::NoFeatures);
    }
    let start = Instant::now();
    let builder = Builder { cfg, parallelism };
    let (root, mut traces) = builder.build(train.clone(), 0, 0, cfg.seed);
    let fit_seconds = start.elapsed().as_secs_f64();

    traces.sort_by_key(|t| t.index);
    let n_splits = root.n_internal();
    let n_fallbacks = traces
        .iter()
        .filter(|t| t.accepted && t.fallback_used)
        .count();
    let avg_iterations = if traces.is_empty() {
        0.0
    } else {
        traces
            .iter()
            .map(|t| t.outcome.iterations as f64)
            .sum::<f64>()
            / traces.len() as f64
    };
    let report = FitReport {
        n_leaves: root.n_leaves(),
        depth: root.depth(),
        n_splits,
        n_fallbacks,
        avg_iterations,
        fit_seconds,
        per_node_traces: traces,
    };
    Ok(HrtModel {
        root,
        dim: train.dim(),
        task: Task::Regression,
        cfg: cfg.clone(),
        report,
    })
}

struct Builder<'a> {
    cfg: &'a HrtConfig,
    parallelism: Parallelism,
}

impl Builder<'_> {
    fn build(
        &self,
        node: DesignMatrix,
        depth: usize,
        index: u64,
        node_seed: u64,
    ) -> (TreeNode, Vec<NodeTrace>) {
        let cfg = self.cfg;
        let theta_leaf = leaf_fit(&node, cfg.ridge_alpha);
        let leaf_rmse = rmse(&node, &theta_leaf).unwrap_or(f64::INFINITY);
        let leaf = || TreeNode::Leaf {
            theta: theta_leaf.clone(),
        };

        if depth >= cfg.max_depth
            || node.len() < cfg.min_samples
            || leaf_rmse < cfg.rmse_threshold
            || node.len() < 2
        {
            return (leaf(), Vec::new());
        }

        let Ok(mut outcome) = select_split(&node, &cfg.with_seed(node_seed)) else {
            return (leaf(), Vec::new());
        };

        let split: Option<SplitParams> = if outcome.converged {
            Some(outcome.params.clone())
        } else {
            outcome.used_fallback = true;
            fallback_split(&node, seed::derive(node_seed, stream::FALLBACK)).ok()
        };
        let mut trace = NodeTrace {
            index,
            depth,
            n_rows: node.len(),
            fallback_used: outcome.used_fallback,
            outcome,
            accepted: false,
        };
        let Some(split) = split else {
            return (leaf(), vec![trace]);
        };

        let (left_rows, right_rows): (Vec<usize>, Vec<usize>) =
            (0..node.len()).partition(|&j| split.routes_left(node.row(j)));
        if left_rows.len() < cfg.min_samples.max(1) || right_rows.len() < cfg.min_samples.max(1) {
            return (leaf(), vec![trace]);
        }
        trace.accepted = true;

        let left_data = node.subset(&left_rows);
        let right_data = node.subset(&right_rows);
        drop(node);
        let left_seed = seed::derive(node_seed, stream::LEFT);
        let right_seed = seed::derive(node_seed, stream::RIGHT);
        let left_index = index.saturating_mul(2).saturating_add(1);
        let right_index = index.saturating_mul(2).saturating_add(2);

        let ((left, mut left_traces), (right, right_traces)) = match self.parallelism {
            Parallelism::Serial => (
                self.build(left_data, depth + 1, left_index, left_seed),
                self.build(right_data, depth + 1, right_index, right_seed),
            ),
            Parallelism::Subtrees => rayon::join(
                || self.build(left_data, depth + 1, left_index, left_seed),
                || self.build(right_data, depth + 1, right_index, right_seed),
            ),
        };

        let fallback_used = trace.fallback_used;
        let mut traces = vec![trace];
        traces.append(&mut left_traces);
        traces.extend(right_traces);
        (
            TreeNode::Internal {
                split,
                left: Box::new(left),
                right: Box::new(right),
                fallback_used,
            },
            traces,
        )
    }
}

/// Ridge leaf; a constant mean predictor if the solve fails.
fn leaf_fit(node: &DesignMatrix, alpha: f64) -> CoefVector {
    solve_ridge(node, alpha)
        .ok()
        .filter(CoefVector::is_finite)
        .unwrap_or_else(|| CoefVector::constant(node.dim(), node.mean_target()))
}

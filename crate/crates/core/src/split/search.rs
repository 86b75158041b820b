//! The alternating fit / re-partition loop and min-vs-max selection.

use crate::config::HrtConfig;
use crate::data::DesignMatrix;

use super::init::initialize_params;
use super::newton::{backtrack, objective_unchecked, partition_unchecked, BlockFits};
use super::{HingeKind, SplitError, SplitOutcome, SplitParams, StepPolicy};

/// Optimizes a hinge of the given kind on one node.
///
/// Each iteration fits ridge least squares on both sides of the current
/// partition, moves the parameters by the step policy, and re-partitions.
/// The loop stops when
///
/// - the summed parameter change `‖Δθ₁‖₂ + ‖Δθ₂‖₂` drops below `epsilon`;
/// - under a fixed step, the partition stayed the same for two consecutive
///   iterations, in which case one unit step (a full OLS refresh on that
///   partition) finishes the run. If the refresh would move rows across
///   the hinge and raise the objective, the run ends on the current
///   iterate instead;
/// - `t_max` iterations have run (not converged);
/// - a step cannot be taken: an empty side, a failed block solve, or no
///   descending trial under the line search (not converged).
pub fn find_optimal_split(
    node: &DesignMatrix,
    kind: HingeKind,
    cfg: &HrtConfig,
) -> Result<SplitOutcome, SplitError> {
    let init = initialize_params(node, cfg.ridge_alpha, cfg.seed)?;
    Ok(optimize(node, init.for_kind(kind).clone(), cfg))
}

/// Runs both hinge kinds from the same initialization and keeps the one
/// with the lower node RMSE; an exact tie keeps `Max`.
pub fn select_split(node: &DesignMatrix, cfg: &HrtConfig) -> Result<SplitOutcome, SplitError> {
    let init = initialize_params(node, cfg.ridge_alpha, cfg.seed)?;
    let max = optimize(node, init.max, cfg);
    let min = optimize(node, init.min, cfg);
    Ok(if min.final_rmse < max.final_rmse {
        min
    } else {
        max
    })
}

/// Unchanged iterations after which a fixed-step run takes one unit step.
const STABLE_ITERATIONS: usize = 2;

fn node_rmse(node: &DesignMatrix, objective: f64) -> f64 {
    (2.0 * objective / node.len() as f64).sqrt()
}

pub(crate) fn optimize(node: &DesignMatrix, start: SplitParams, cfg: &HrtConfig) -> SplitOutcome {
    let alpha = cfg.ridge_alpha;
    let mut params = start;
    let mut part = partition_unchecked(node, &params);
    let mut objective = objective_unchecked(node, &params);
    let mut trace = vec![objective];
    let mut iterations = 0;
    let mut converged = false;
    // Consecutive iterations that left the partition unchanged.
    let mut unchanged = 0usize;

    while iterations < cfg.t_max {
        let fits = match BlockFits::compute(node, &part, alpha) {
            Ok(f) => f,
            Err(_) => break,
        };
        let dir = fits.direction(&params);

        let (next, next_part, next_objective, refresh) = match cfg.step_policy {
            StepPolicy::Fixed { mu } => {
                let refresh = unchanged >= STABLE_ITERATIONS;
                let next = fits.step(&params, &dir, if refresh { 1.0 } else { mu });
                let next_part = partition_unchecked(node, &next);
                if next_part.has_empty_side() {
                    break;
                }
                let v = objective_unchecked(node, &next);
                (next, next_part, v, refresh)
            }
            StepPolicy::Auto {
                mu0,
                beta,
                max_backtracks,
            } => {
                if mu0 * pair_norm(&dir, params.theta1.len()) < cfg.epsilon {
                    converged = true;
                    break;
                }
                match backtrack(
                    node,
                    &params,
                    &fits,
                    &dir,
                    objective,
                    mu0,
                    beta,
                    max_backtracks,
                ) {
                    Some(t) => (t.params, t.partition, t.objective, false),
                    None => break,
                }
            }
        };

        // A refresh that moves rows and raises the objective is discarded;
        // the current iterate already matches its own stable partition.
        if refresh && next_part != part && next_objective > objective {
            converged = true;
            break;
        }

        let delta =
            next.theta1.l2_distance(&params.theta1) + next.theta2.l2_distance(&params.theta2);
        params = next;
        objective = next_objective;
        trace.push(objective);
        iterations += 1;

        if delta < cfg.epsilon || refresh {
            converged = true;
            break;
        }
        unchanged = if next_part == part { unchanged + 1 } else { 0 };
        part = next_part;
    }

    SplitOutcome {
        params,
        converged,
        used_fallback: false,
        iterations,
        objective_trace: trace,
        final_rmse: node_rmse(node, objective),
    }
}

/// `‖d₁‖₂ + ‖d₂‖₂` for a stacked direction with blocks of width `w`.
fn pair_norm(dir: &[f64], w: usize) -> f64 {
    let norm = |s: &[f64]| s.iter().map(|v| v * v).sum::<f64>().sqrt();
    norm(&dir[..w]) + norm(&dir[w..])
}

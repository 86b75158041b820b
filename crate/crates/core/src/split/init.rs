//! Starting parameters for the node optimization.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::data::{CoefVector, DesignMatrix};
use crate::linalg::solve_ridge;
use crate::seed;

use super::newton::fit_block;
use super::{HingeKind, SplitError, SplitParams};

/// Pairs closer than this (∞-norm) are re-perturbed.
pub const DIVERSITY_TOL: f64 = 1e-8;
const PERTURB_SCALE: f64 = 1e-2;
const CORNER_OFFSET: f64 = 1e-3;

/// Initial parameters for each hinge kind.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialPair {
    pub max: SplitParams,
    pub min: SplitParams,
    /// Whether the median-split fits had to be replaced by perturbed copies
    /// of a global fit.
    pub degenerate: bool,
}

impl InitialPair {
    pub fn for_kind(&self, kind: HingeKind) -> &SplitParams {
        match kind {
            HingeKind::Max => &self.max,
            HingeKind::Min => &self.min,
        }
    }
}

/// Data-driven starting point.
///
/// 1. Split at the median of the feature with the largest range.
/// 2. Ridge-fit each half (each needs at least two rows) to get `θ₁`, `θ₂`.
/// 3. If that is impossible, perturb a global ridge fit twice.
/// 4. If the pair is still nearly identical, perturb again and, as a last
///    resort, offset the first coefficient of `θ₁`.
///
/// The random draws come only from `rng_seed`.
pub fn initialize_params(
    node: &DesignMatrix,
    alpha: f64,
    rng_seed: u64,
) -> Result<InitialPair, SplitError> {
    let n = node.len();
    if n < 2 {
        return Err(SplitError::TooFewSamples { n });
    }
    let mut rng = seed::rng(rng_seed);

    let (mut theta1, mut theta2, degenerate) = match median_fits(node, alpha) {
        Some((t1, t2)) => (t1, t2, false),
        None => {
            let global = solve_ridge(node, alpha)
                .ok()
                .filter(CoefVector::is_finite)
                .unwrap_or_else(|| CoefVector::constant(node.dim(), node.mean_target()));
            let t1 = perturb(&global, &mut rng);
            let t2 = perturb(&global, &mut rng);
            (t1, t2, true)
        }
    };

    if theta1.max_abs_diff(&theta2) < DIVERSITY_TOL {
        theta2 = perturb(&theta2, &mut rng);
        if theta1.max_abs_diff(&theta2) < DIVERSITY_TOL {
            theta1.as_mut_slice()[0] += CORNER_OFFSET;
        }
    }

    let max = SplitParams::new(theta1.clone(), theta2.clone(), HingeKind::Max)?;
    let min = SplitParams::new(theta1, theta2, HingeKind::Min)?;
    Ok(InitialPair {
        max,
        min,
        degenerate,
    })
}

/// Step 1–2: fits on the two halves of a median split along the widest
/// feature, or `None` when either half is too small or a fit fails.
fn median_fits(node: &DesignMatrix, alpha: f64) -> Option<(CoefVector, CoefVector)> {
    let (feature, range) = widest_feature(node)?;
    if range <= 0.0 {
        return None;
    }
    let pivot = median(&node.column(feature));
    let (lower, upper): (Vec<usize>, Vec<usize>) =
        (0..node.len()).partition(|&j| node.row(j)[feature] <= pivot);
    if lower.len() < 2 || upper.len() < 2 {
        return None;
    }
    let t1 = fit_block(node, &lower, alpha, 1).ok()?;
    let t2 = fit_block(node, &upper, alpha, 2).ok()?;
    Some((t1, t2))
}

/// Index and range of the feature with the largest `max − min`; the lowest
/// index wins ties.
pub(crate) fn widest_feature(node: &DesignMatrix) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for k in 0..node.dim() {
        let r = feature_range(node, k);
        if best.is_none_or(|(_, br)| r > br) {
            best = Some((k, r));
        }
    }
    best
}

pub(crate) fn feature_range(node: &DesignMatrix, k: usize) -> f64 {
    let (lo, hi) = (0..node.len())
        .map(|j| node.row(j)[k])
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

/// Median; the mean of the two middle values for even lengths.
pub(crate) fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn perturb<R: Rng>(theta: &CoefVector, rng: &mut R) -> CoefVector {
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    CoefVector::new(
        theta
            .as_slice()
            .iter()
            .map(|&c| c + PERTURB_SCALE * (1.0 + c.abs()) * unit.sample(rng))
            .collect(),
    )
}

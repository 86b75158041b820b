//! Axis-aligned median split used when the hinge optimization fails.

use rand::Rng;

use crate::data::{CoefVector, DesignMatrix};
use crate::seed;

use super::init::{feature_range, median};
use super::{HingeKind, SplitError, SplitParams};

/// Median split on a feature drawn uniformly at random.
///
/// A constant feature is re-drawn uniformly among the non-constant ones.
pub fn fallback_split(node: &DesignMatrix, rng_seed: u64) -> Result<SplitParams, SplitError> {
    let n = node.len();
    if n < 2 {
        return Err(SplitError::TooFewSamples { n });
    }
    let d = node.dim();
    if d == 0 {
        return Err(SplitError::Unsplittable);
    }
    let mut rng = seed::rng(rng_seed);
    let mut k = rng.random_range(0..d);
    if feature_range(node, k) <= 0.0 {
        let candidates: Vec<usize> = (0..d).filter(|&j| feature_range(node, j) > 0.0).collect();
        if candidates.is_empty() {
            return Err(SplitError::Unsplittable);
        }
        k = candidates[rng.random_range(0..candidates.len())];
    }
    fallback_split_on(node, k)
}

/// Median split on feature `k`, encoded as a `Max` hinge whose routing test
/// `x̃ᵀθ₁ ≥ x̃ᵀθ₂` is exactly `x_k ≥ m_k`: `θ₁ = e_k` with bias `−m_k` and
/// `θ₂ = 0`. Every product against `θ₂` is zero and `θ₁` contributes only
/// `x_k − m_k`, so the comparison is the exact floating-point sign test.
pub fn fallback_split_on(node: &DesignMatrix, k: usize) -> Result<SplitParams, SplitError> {
    let n = node.len();
    if n < 2 {
        return Err(SplitError::TooFewSamples { n });
    }
    let d = node.dim();
    if k >= d {
        return Err(SplitError::DimensionMismatch {
            expected: d,
            actual: k,
        });
    }
    if feature_range(node, k) <= 0.0 {
        return Err(SplitError::Unsplittable);
    }
    let m = median(&node.column(k));
    let mut theta1 = CoefVector::zeros(d + 1);
    theta1.as_mut_slice()[k] = 1.0;
    theta1.as_mut_slice()[d] = -m;
    SplitParams::new(theta1, CoefVector::zeros(d + 1), HingeKind::Max)
}

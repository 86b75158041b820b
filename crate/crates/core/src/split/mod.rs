//! Learning one oblique split.
//!
//! A split is a hinge `h(x) = max(x̃ᵀθ₁, x̃ᵀθ₂)` (or `min`). The node objective
//! `V(θ) = ½Σ(yⱼ − h(xⱼ))²` is piecewise quadratic: once the partition
//! `S₁ = {rows where θ₁ is the active piece}` is fixed, `V` is a sum of two
//! independent least-squares problems, its Gauss–Newton Hessian is exact and
//! block diagonal, and the Newton direction is simply `θ_OLS − θ`.
//!
//! [`find_optimal_split`] alternates damped Newton steps with re-partitioning,
//! [`select_split`] runs both hinge kinds and keeps the lower node RMSE, and
//! [`fallback_split`] provides the axis-aligned median split used when the
//! optimization does not converge.

mod fallback;
mod init;
mod newton;
mod search;

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::data::{CoefVector, DesignMatrix};
use crate::linalg::LinalgError;

pub use fallback::{fallback_split, fallback_split_on};
pub use init::{initialize_params, InitialPair, DIVERSITY_TOL};
pub use newton::{gradient_v, hessian_v, newton_direction, newton_step, objective_v, partition};
pub use search::{find_optimal_split, select_split};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SplitError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("node has {n} rows; at least 2 are required")]
    TooFewSamples { n: usize },
    #[error("partition side {side} is empty")]
    EmptyPartitionSide { side: u8 },
    #[error("block least-squares solve failed: {0}")]
    DegenerateBlock(LinalgError),
    #[error("no step size produced a strictly smaller node RMSE")]
    NoDescent,
    #[error("every feature is constant on this node")]
    Unsplittable,
    #[error("split parameters contain non-finite values")]
    NonFinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HingeKind {
    Max,
    Min,
}

impl HingeKind {
    /// Whether a row with piece scores `(s1, s2)` belongs to `S₁`. Ties go
    /// to `S₁` for both kinds.
    #[inline]
    pub fn in_first(self, s1: f64, s2: f64) -> bool {
        match self {
            HingeKind::Max => s1 >= s2,
            HingeKind::Min => s1 <= s2,
        }
    }

    /// The hinge value: the score of whichever piece is active.
    #[inline]
    pub fn apply(self, s1: f64, s2: f64) -> f64 {
        if self.in_first(s1, s2) {
            s1
        } else {
            s2
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            HingeKind::Max => "max",
            HingeKind::Min => "min",
        }
    }
}

impl fmt::Display for HingeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HingeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "max" => Ok(HingeKind::Max),
            "min" => Ok(HingeKind::Min),
            other => Err(format!("unknown hinge kind `{other}`")),
        }
    }
}

/// `max(x, 0)`.
#[inline]
pub fn relu(x: f64) -> f64 {
    if x > 0.0 {
        x
    } else {
        0.0
    }
}

/// Two affine pieces and the hinge kind combining them.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitParams {
    pub theta1: CoefVector,
    pub theta2: CoefVector,
    pub kind: HingeKind,
}

impl SplitParams {
    pub fn new(
        theta1: CoefVector,
        theta2: CoefVector,
        kind: HingeKind,
    ) -> Result<Self, SplitError> {
        if theta1.len() != theta2.len() || theta1.is_empty() {
            return Err(SplitError::DimensionMismatch {
                expected: theta1.len(),
                actual: theta2.len(),
            });
        }
        if !theta1.is_finite() || !theta2.is_finite() {
            return Err(SplitError::NonFinite);
        }
        Ok(SplitParams {
            theta1,
            theta2,
            kind,
        })
    }

    /// Feature count `d`.
    pub fn dim(&self) -> usize {
        self.theta1.dim()
    }

    #[inline]
    pub fn scores(&self, row: &[f64]) -> (f64, f64) {
        (self.theta1.dot(row), self.theta2.dot(row))
    }

    /// Membership of an augmented row in `S₁` under this hinge kind.
    #[inline]
    pub fn in_first(&self, row: &[f64]) -> bool {
        let (s1, s2) = self.scores(row);
        self.kind.in_first(s1, s2)
    }

    #[inline]
    pub fn hinge(&self, row: &[f64]) -> f64 {
        let (s1, s2) = self.scores(row);
        self.kind.apply(s1, s2)
    }

    /// Tree routing: left iff `x̃ᵀθ₁ ≥ x̃ᵀθ₂`, independent of the kind.
    #[inline]
    pub fn routes_left(&self, row: &[f64]) -> bool {
        let (s1, s2) = self.scores(row);
        s1 >= s2
    }

    /// `[θ₁; θ₂]` as one vector of length `2(d+1)`.
    pub fn stacked(&self) -> Vec<f64> {
        let mut v = self.theta1.as_slice().to_vec();
        v.extend_from_slice(self.theta2.as_slice());
        v
    }

    fn check_width(&self, node: &DesignMatrix) -> Result<(), SplitError> {
        if self.theta1.len() != node.width() || self.theta2.len() != node.width() {
            return Err(SplitError::DimensionMismatch {
                expected: node.width(),
                actual: self.theta1.len().max(self.theta2.len()),
            });
        }
        Ok(())
    }
}

/// Row indices of a node split into `S₁` and its complement `S₂`.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Partition {
    pub s1: Vec<usize>,
    pub s2: Vec<usize>,
}

impl Partition {
    pub fn has_empty_side(&self) -> bool {
        self.s1.is_empty() || self.s2.is_empty()
    }

    pub fn len(&self) -> usize {
        self.s1.len() + self.s2.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// How far each Newton step moves toward the per-side least-squares fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepPolicy {
    /// `θ ← θ + μ(θ_OLS − θ)` unconditionally.
    Fixed { mu: f64 },
    /// Trial steps `μ₀βᵗ` until the node RMSE strictly decreases.
    Auto {
        mu0: f64,
        beta: f64,
        max_backtracks: usize,
    },
}

impl StepPolicy {
    pub fn default_auto() -> Self {
        StepPolicy::Auto {
            mu0: 1.0,
            beta: 0.5,
            max_backtracks: 20,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match *self {
            StepPolicy::Fixed { mu } => {
                if !(mu > 0.0 && mu <= 1.0) {
                    return Err(format!("fixed step {mu} is outside (0, 1]"));
                }
            }
            StepPolicy::Auto {
                mu0,
                beta,
                max_backtracks,
            } => {
                if !(mu0 > 0.0 && mu0.is_finite()) {
                    return Err(format!("initial step {mu0} must be positive"));
                }
                if !(beta > 0.0 && beta < 1.0) {
                    return Err(format!("backtracking factor {beta} is outside (0, 1)"));
                }
                if max_backtracks < 1 {
                    return Err("max_backtracks must be at least 1".into());
                }
            }
        }
        Ok(())
    }

    /// Short label used in reports: the step size, or `auto`.
    pub fn label(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for StepPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StepPolicy::Fixed { mu } => write!(f, "{mu}"),
            StepPolicy::Auto { .. } => f.write_str("auto"),
        }
    }
}

impl FromStr for StepPolicy {
    type Err = String;

    /// Accepts `auto` or a decimal in `(0, 1]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(StepPolicy::default_auto());
        }
        let mu: f64 = s
            .parse()
            .map_err(|_| format!("step `{s}` is neither `auto` nor a number"))?;
        let policy = StepPolicy::Fixed { mu };
        policy.validate()?;
        Ok(policy)
    }
}

/// Result of optimizing one node.
#[derive(Debug, Clone, PartialEq)]
pub struct SplitOutcome {
    pub params: SplitParams,
    pub converged: bool,
    pub used_fallback: bool,
    pub iterations: usize,
    /// `V(θ)` at the start and after every accepted iteration.
    pub objective_trace: Vec<f64>,
    /// `√(2V/N)` at the returned parameters.
    pub final_rmse: f64,
}

impl SplitOutcome {
    pub fn kind(&self) -> HingeKind {
        self.params.kind
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn step_policy_parsing() {
        assert_eq!(
            "auto".parse::<StepPolicy>().unwrap(),
            StepPolicy::default_auto()
        );
        assert_eq!(
            "0.01".parse::<StepPolicy>().unwrap(),
            StepPolicy::Fixed { mu: 0.01 }
        );
        assert_eq!(
            "1".parse::<StepPolicy>().unwrap(),
            StepPolicy::Fixed { mu: 1.0 }
        );
        assert!("0".parse::<StepPolicy>().is_err());
        assert!("1.5".parse::<StepPolicy>().is_err());
        assert!("NaN".parse::<StepPolicy>().is_err());
        assert!("fast".parse::<StepPolicy>().is_err());
    }

    #[test]
    fn step_labels_round_trip() {
        for label in ["auto", "0.5", "0.01", "1"] {
            let p: StepPolicy = label.parse().unwrap();
            assert_eq!(p.label(), label);
        }
    }

    #[test]
    fn tie_rule_puts_ties_in_first_side() {
        assert!(HingeKind::Max.in_first(1.0, 1.0));
        assert!(HingeKind::Min.in_first(1.0, 1.0));
        assert!(!HingeKind::Max.in_first(0.0, 1.0));
        assert!(!HingeKind::Min.in_first(1.0, 0.0));
    }

    #[test]
    fn params_reject_mismatch_and_nan() {
        let a = CoefVector::new(vec![1.0, 0.0]);
        assert!(SplitParams::new(a.clone(), CoefVector::zeros(3), HingeKind::Max).is_err());
        assert_eq!(
            SplitParams::new(a, CoefVector::new(vec![f64::NAN, 0.0]), HingeKind::Max),
            Err(SplitError::NonFinite)
        );
    }
}

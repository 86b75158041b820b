//! Node objective, its derivatives, and the damped Newton step.

use crate::data::{CoefVector, DesignMatrix};
use crate::linalg::{NormalEquations, JITTER_SCALE};

use super::{Partition, SplitError, SplitParams, StepPolicy};

/// Splits the node rows by which piece is active. Ties land in `S₁`.
pub fn partition(node: &DesignMatrix, p: &SplitParams) -> Result<Partition, SplitError> {
    p.check_width(node)?;
    Ok(partition_unchecked(node, p))
}

pub(crate) fn partition_unchecked(node: &DesignMatrix, p: &SplitParams) -> Partition {
    let mut part = Partition::default();
    for j in 0..node.len() {
        if p.in_first(node.row(j)) {
            part.s1.push(j);
        } else {
            part.s2.push(j);
        }
    }
    part
}

/// `V(θ) = ½Σⱼ(yⱼ − h(xⱼ, θ))²`.
pub fn objective_v(node: &DesignMatrix, p: &SplitParams) -> Result<f64, SplitError> {
    p.check_width(node)?;
    Ok(objective_unchecked(node, p))
}

pub(crate) fn objective_unchecked(node: &DesignMatrix, p: &SplitParams) -> f64 {
    0.5 * node
        .iter()
        .map(|(row, y)| {
            let r = y - p.hinge(row);
            r * r
        })
        .sum::<f64>()
}

/// Stacked gradient `∇V = −[Σ_{S₁} x̃(y − x̃ᵀθ₁); Σ_{S₂} x̃(y − x̃ᵀθ₂)]` over
/// the partition induced by `p`. Rows exactly on the boundary count on the
/// `S₁` side.
pub fn gradient_v(node: &DesignMatrix, p: &SplitParams) -> Result<Vec<f64>, SplitError> {
    p.check_width(node)?;
    let w = node.width();
    let mut g = vec![0.0; 2 * w];
    for (row, y) in node.iter() {
        let (s1, s2) = p.scores(row);
        let (offset, r) = if p.kind.in_first(s1, s2) {
            (0, y - s1)
        } else {
            (w, y - s2)
        };
        for (gi, xi) in g[offset..offset + w].iter_mut().zip(row) {
            *gi -= xi * r;
        }
    }
    Ok(g)
}

/// Block-diagonal Hessian `diag(X₁ᵀX₁, X₂ᵀX₂)` of `V` on the induced
/// partition, as a row-major `2(d+1) × 2(d+1)` matrix.
pub fn hessian_v(node: &DesignMatrix, p: &SplitParams) -> Result<Vec<f64>, SplitError> {
    let part = partition(node, p)?;
    let w = node.width();
    let n = 2 * w;
    let mut h = vec![0.0; n * n];
    for (block, rows) in [&part.s1, &part.s2].into_iter().enumerate() {
        let g = NormalEquations::from_rows(node, rows).gram();
        let off = block * w;
        for i in 0..w {
            for k in 0..w {
                h[(off + i) * n + off + k] = g[i * w + k];
            }
        }
    }
    Ok(h)
}

/// Per-side ridge fit. Sides with fewer rows than coefficients get a
/// minimum ridge of `1e-8·trace(XᵀX)` so the block stays solvable.
pub(crate) fn fit_block(
    node: &DesignMatrix,
    rows: &[usize],
    alpha: f64,
    side: u8,
) -> Result<CoefVector, SplitError> {
    if rows.is_empty() {
        return Err(SplitError::EmptyPartitionSide { side });
    }
    let ne = NormalEquations::from_rows(node, rows);
    let alpha_eff = if rows.len() < node.width() {
        alpha.max(JITTER_SCALE * ne.trace())
    } else {
        alpha
    };
    ne.solve_ridge(alpha_eff)
        .map_err(SplitError::DegenerateBlock)
}

/// Per-side least-squares targets of one Newton step.
#[derive(Debug, Clone)]
pub(crate) struct BlockFits {
    pub ols1: CoefVector,
    pub ols2: CoefVector,
}

impl BlockFits {
    pub fn compute(node: &DesignMatrix, part: &Partition, alpha: f64) -> Result<Self, SplitError> {
        if part.s1.is_empty() {
            return Err(SplitError::EmptyPartitionSide { side: 1 });
        }
        if part.s2.is_empty() {
            return Err(SplitError::EmptyPartitionSide { side: 2 });
        }
        Ok(BlockFits {
            ols1: fit_block(node, &part.s1, alpha, 1)?,
            ols2: fit_block(node, &part.s2, alpha, 2)?,
        })
    }

    /// `[θ_OLS,1 − θ₁; θ_OLS,2 − θ₂]`.
    pub fn direction(&self, p: &SplitParams) -> Vec<f64> {
        let mut d: Vec<f64> = self
            .ols1
            .as_slice()
            .iter()
            .zip(p.theta1.as_slice())
            .map(|(o, t)| o - t)
            .collect();
        d.extend(
            self.ols2
                .as_slice()
                .iter()
                .zip(p.theta2.as_slice())
                .map(|(o, t)| o - t),
        );
        d
    }

    /// `θ + μ(θ_OLS − θ)`; a unit step returns the fits themselves.
    pub fn step(&self, p: &SplitParams, direction: &[f64], mu: f64) -> SplitParams {
        if mu == 1.0 {
            return SplitParams {
                theta1: self.ols1.clone(),
                theta2: self.ols2.clone(),
                kind: p.kind,
            };
        }
        let w = p.theta1.len();
        SplitParams {
            theta1: p.theta1.axpy(mu, &direction[..w]),
            theta2: p.theta2.axpy(mu, &direction[w..]),
            kind: p.kind,
        }
    }
}

/// Newton direction `θ_OLS − θ` on the partition induced by `p`. For
/// `alpha = 0` this equals `−H⁻¹∇V`.
pub fn newton_direction(
    node: &DesignMatrix,
    p: &SplitParams,
    alpha: f64,
) -> Result<Vec<f64>, SplitError> {
    let part = partition(node, p)?;
    Ok(BlockFits::compute(node, &part, alpha)?.direction(p))
}

/// One damped Newton step from `p`.
///
/// `Fixed(μ)` always moves by `μ·direction`. `Auto` tries `μ₀βᵗ` for
/// `t = 0..=max_backtracks` and returns the first trial that keeps both
/// sides nonempty and strictly lowers the node objective.
pub fn newton_step(
    node: &DesignMatrix,
    p: &SplitParams,
    policy: StepPolicy,
    alpha: f64,
) -> Result<(SplitParams, f64), SplitError> {
    let part = partition(node, p)?;
    let fits = BlockFits::compute(node, &part, alpha)?;
    let dir = fits.direction(p);
    match policy {
        StepPolicy::Fixed { mu } => Ok((fits.step(p, &dir, mu), mu)),
        StepPolicy::Auto {
            mu0,
            beta,
            max_backtracks,
        } => {
            let current = objective_unchecked(node, p);
            backtrack(node, p, &fits, &dir, current, mu0, beta, max_backtracks)
                .map(|t| (t.params, t.mu))
                .ok_or(SplitError::NoDescent)
        }
    }
}

pub(crate) struct Trial {
    pub params: SplitParams,
    pub mu: f64,
    pub objective: f64,
    pub partition: Partition,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn backtrack(
    node: &DesignMatrix,
    p: &SplitParams,
    fits: &BlockFits,
    dir: &[f64],
    current: f64,
    mu0: f64,
    beta: f64,
    max_backtracks: usize,
) -> Option<Trial> {
    let mut mu = mu0;
    for _ in 0..=max_backtracks {
        let params = fits.step(p, dir, mu);
        let part = partition_unchecked(node, &params);
        if !part.has_empty_side() {
            let objective = objective_unchecked(node, &params);
            if objective < current {
                return Some(Trial {
                    params,
                    mu,
                    objective,
                    partition: part,
                });
            }
        }
        mu *= beta;
    }
    None
}

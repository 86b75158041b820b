//! Dense least squares on augmented design matrices.
//!
//! Ridge solves minimize `½Σ(yⱼ − x̃ⱼᵀθ)² + (α/2)Σ_{i<d} θᵢ²`: the bias (last
//! coordinate) is never penalized. Systems are formed as normal equations
//! and factored with Cholesky. The matrices involved are `(d+1)×(d+1)`, so
//! everything here is plain `Vec<f64>` in row-major order.

use thiserror::Error;

use crate::data::{CoefVector, DesignMatrix};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("matrix is not positive definite (pivot {pivot} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
    #[error("regularized normal matrix is singular even after jitter")]
    SingularSystem,
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("least-squares system has no rows")]
    NoRows,
}

/// Cholesky pivots at or below this fraction of the largest diagonal entry
/// are treated as zero.
const PIVOT_RTOL: f64 = 1e-12;

/// Jitter scale relative to `trace(XᵀX)/(d+1)` used on the retry.
pub const JITTER_SCALE: f64 = 1e-8;

/// Solves `A x = b` for symmetric positive definite `A` (row-major, `n×n`
/// with `n = b.len()`). Only the lower triangle of `A` is read.
pub fn spd_solve(a: &[f64], b: &[f64]) -> Result<Vec<f64>, LinalgError> {
    let n = b.len();
    if a.len() != n * n {
        return Err(LinalgError::DimensionMismatch {
            expected: n * n,
            actual: a.len(),
        });
    }
    let l = cholesky(a, n)?;
    Ok(cholesky_solve(&l, n, b))
}

/// Lower-triangular Cholesky factor `L` with `A = L Lᵀ`.
fn cholesky(a: &[f64], n: usize) -> Result<Vec<f64>, LinalgError> {
    let max_diag = (0..n).map(|i| a[i * n + i].abs()).fold(0.0, f64::max);
    let floor = PIVOT_RTOL * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d.is_nan() || d <= floor {
            return Err(LinalgError::NotPositiveDefinite {
                column: j,
                pivot: d,
            });
        }
        let djj = d.sqrt();
        l[j * n + j] = djj;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / djj;
        }
    }
    Ok(l)
}

fn cholesky_solve(l: &[f64], n: usize, b: &[f64]) -> Vec<f64> {
    // L z = b
    let mut z = b.to_vec();
    for i in 0..n {
        let mut s = z[i];
        for k in 0..i {
            s -= l[i * n + k] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    // Lᵀ x = z
    for i in (0..n).rev() {
        let mut s = z[i];
        for k in i + 1..n {
            s -= l[k * n + i] * z[k];
        }
        z[i] = s / l[i * n + i];
    }
    z
}

/// Accumulated `XᵀX`, `Xᵀy` over a set of augmented rows.
#[derive(Debug, Clone)]
pub struct NormalEquations {
    width: usize,
    gram: Vec<f64>,
    rhs: Vec<f64>,
    count: usize,
}

impl NormalEquations {
    pub fn new(width: usize) -> Self {
        NormalEquations {
            width,
            gram: vec![0.0; width * width],
            rhs: vec![0.0; width],
            count: 0,
        }
    }

    pub fn from_matrix(m: &DesignMatrix) -> Self {
        let mut ne = NormalEquations::new(m.width());
        for (row, y) in m.iter() {
            ne.add(row, y);
        }
        ne
    }

    pub fn from_rows(m: &DesignMatrix, indices: &[usize]) -> Self {
        let mut ne = NormalEquations::new(m.width());
        for &j in indices {
            ne.add(m.row(j), m.target(j));
        }
        ne
    }

    /// Adds one augmented row. Only the lower triangle is accumulated.
    pub fn add(&mut self, row: &[f64], y: f64) {
        let w = self.width;
        for i in 0..w {
            let ri = row[i];
            if ri == 0.0 {
                continue;
            }
            let base = i * w;
            for (k, &rk) in row[..=i].iter().enumerate() {
                self.gram[base + k] += ri * rk;
            }
            self.rhs[i] += ri * y;
        }
        self.count += 1;
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn trace(&self) -> f64 {
        (0..self.width).map(|i| self.gram[i * self.width + i]).sum()
    }

    /// Full symmetric `XᵀX` (both triangles filled).
    pub fn gram(&self) -> Vec<f64> {
        let w = self.width;
        let mut g = self.gram.clone();
        for i in 0..w {
            for k in 0..i {
                g[k * w + i] = g[i * w + k];
            }
        }
        g
    }

    pub fn rhs(&self) -> &[f64] {
        &self.rhs
    }

    /// Ridge solution with unregularized bias.
    ///
    /// On a failed factorization the solve is retried once with
    /// `1e-8·trace(XᵀX)/(d+1)` added to every non-bias diagonal entry.
    pub fn solve_ridge(&self, alpha: f64) -> Result<CoefVector, LinalgError> {
        if self.count == 0 {
            return Err(LinalgError::NoRows);
        }
        match self.solve_with_penalty(alpha) {
            Ok(theta) => Ok(theta),
            Err(LinalgError::NotPositiveDefinite { .. }) => {
                let jitter = JITTER_SCALE * self.trace() / self.width as f64;
                self.solve_with_penalty(alpha + jitter)
                    .map_err(|_| LinalgError::SingularSystem)
            }
            Err(e) => Err(e),
        }
    }

    fn solve_with_penalty(&self, penalty: f64) -> Result<CoefVector, LinalgError> {
        let w = self.width;
        let mut a = self.gram.clone();
        for i in 0..w - 1 {
            a[i * w + i] += penalty;
        }
        let l = cholesky(&a, w)?;
        let theta = cholesky_solve(&l, w, &self.rhs);
        if theta.iter().all(|v| v.is_finite()) {
            Ok(CoefVector::new(theta))
        } else {
            Err(LinalgError::NotPositiveDefinite {
                column: 0,
                pivot: f64::NAN,
            })
        }
    }
}

/// Ridge fit over all rows of `m`. With `alpha = 0` and full-rank `XᵀX`
/// this is ordinary least squares.
pub fn solve_ridge(m: &DesignMatrix, alpha: f64) -> Result<CoefVector, LinalgError> {
    NormalEquations::from_matrix(m).solve_ridge(alpha)
}

/// Ridge fit over the listed rows of `m`.
pub fn solve_ridge_rows(
    m: &DesignMatrix,
    indices: &[usize],
    alpha: f64,
) -> Result<CoefVector, LinalgError> {
    NormalEquations::from_rows(m, indices).solve_ridge(alpha)
}

/// `½Σⱼ(yⱼ − x̃ⱼᵀθ)²`.
pub fn objective_sse(m: &DesignMatrix, theta: &CoefVector) -> Result<f64, LinalgError> {
    check_width(m, theta)?;
    Ok(0.5
        * m.iter()
            .map(|(row, y)| {
                let r = y - theta.dot(row);
                r * r
            })
            .sum::<f64>())
}

/// `½Σ_{j∈indices}(yⱼ − x̃ⱼᵀθ)²`.
pub fn objective_sse_rows(
    m: &DesignMatrix,
    indices: &[usize],
    theta: &CoefVector,
) -> Result<f64, LinalgError> {
    check_width(m, theta)?;
    Ok(0.5
        * indices
            .iter()
            .map(|&j| {
                let r = m.target(j) - theta.dot(m.row(j));
                r * r
            })
            .sum::<f64>())
}

/// Root-mean-square residual of an affine fit: `√(2·SSE/N)`.
pub fn rmse(m: &DesignMatrix, theta: &CoefVector) -> Result<f64, LinalgError> {
    if m.is_empty() {
        return Ok(0.0);
    }
    Ok((2.0 * objective_sse(m, theta)? / m.len() as f64).sqrt())
}

fn check_width(m: &DesignMatrix, theta: &CoefVector) -> Result<(), LinalgError> {
    if theta.len() != m.width() {
        return Err(LinalgError::DimensionMismatch {
            expected: m.width(),
            actual: theta.len(),
        });
    }
    Ok(())
}

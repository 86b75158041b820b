//! Augmented design matrices and coefficient vectors.
//!
//! Every row is stored augmented, `x̃ = [x₁, …, x_d, 1]`, so the bias lives
//! inside the coefficient vector as its last entry.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("targets length {targets} does not match {rows} rows")]
    LengthMismatch { rows: usize, targets: usize },
    #[error("non-finite value at row {row}")]
    NonFinite { row: usize },
}

/// Coefficients for one affine piece: one weight per feature, bias last.
#[derive(Clone, PartialEq)]
pub struct CoefVector(Vec<f64>);

impl CoefVector {
    pub fn new(values: Vec<f64>) -> Self {
        CoefVector(values)
    }

    pub fn zeros(len: usize) -> Self {
        CoefVector(vec![0.0; len])
    }

    /// A constant predictor `c` over `dim` features.
    pub fn constant(dim: usize, c: f64) -> Self {
        let mut v = vec![0.0; dim + 1];
        v[dim] = c;
        CoefVector(v)
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.0.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Number of features (length minus the bias slot).
    #[inline]
    pub fn dim(&self) -> usize {
        self.0.len().saturating_sub(1)
    }

    #[inline]
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }

    pub fn bias(&self) -> f64 {
        self.0[self.0.len() - 1]
    }

    /// Weights without the bias entry.
    pub fn weights(&self) -> &[f64] {
        &self.0[..self.0.len() - 1]
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    /// `x̃ᵀθ` for an augmented row.
    #[inline]
    pub fn dot(&self, row: &[f64]) -> f64 {
        dot(&self.0, row)
    }

    /// `θ + scale·direction`, componentwise.
    pub fn axpy(&self, scale: f64, direction: &[f64]) -> CoefVector {
        CoefVector(
            self.0
                .iter()
                .zip(direction)
                .map(|(t, p)| t + scale * p)
                .collect(),
        )
    }

    pub fn max_abs_diff(&self, other: &CoefVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn l2_distance(&self, other: &CoefVector) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    }
}

impl fmt::Debug for CoefVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list().entries(&self.0).finish()
    }
}

impl From<Vec<f64>> for CoefVector {
    fn from(v: Vec<f64>) -> Self {
        CoefVector(v)
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Augments a raw feature vector with the trailing constant 1.
pub fn augment(x: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(x.len() + 1);
    v.extend_from_slice(x);
    v.push(1.0);
    v
}

/// `N` augmented rows of width `d+1` plus their targets.
#[derive(Clone, PartialEq)]
pub struct DesignMatrix {
    dim: usize,
    rows: Vec<f64>,
    targets: Vec<f64>,
}

impl DesignMatrix {
    /// An empty matrix over `dim` features.
    pub fn new(dim: usize) -> Self {
        DesignMatrix {
            dim,
            rows: Vec::new(),
            targets: Vec::new(),
        }
    }

    pub fn with_capacity(dim: usize, n: usize) -> Self {
        DesignMatrix {
            dim,
            rows: Vec::with_capacity(n * (dim + 1)),
            targets: Vec::with_capacity(n),
        }
    }

    /// Builds from row-major raw features (`N·dim` values, no bias column).
    pub fn from_flat(dim: usize, features: &[f64], targets: Vec<f64>) -> Result<Self, DataError> {
        let n = targets.len();
        if features.len() != n * dim {
            return Err(DataError::LengthMismatch {
                rows: features.len().checked_div(dim).unwrap_or(0),
                targets: n,
            });
        }
        let mut m = DesignMatrix::with_capacity(dim, n);
        for (j, &y) in targets.iter().enumerate() {
            m.push(&features[j * dim..(j + 1) * dim], y)?;
        }
        Ok(m)
    }

    pub fn from_rows(features: &[Vec<f64>], targets: &[f64]) -> Result<Self, DataError> {
        if features.len() != targets.len() {
            return Err(DataError::LengthMismatch {
                rows: features.len(),
                targets: targets.len(),
            });
        }
        let dim = features.first().map_or(0, Vec::len);
        let mut m = DesignMatrix::with_capacity(dim, features.len());
        for (x, &y) in features.iter().zip(targets) {
            m.push(x, y)?;
        }
        Ok(m)
    }

    /// Appends one sample; `x` holds raw features only.
    pub fn push(&mut self, x: &[f64], y: f64) -> Result<(), DataError> {
        if x.len() != self.dim {
            return Err(DataError::DimensionMismatch {
                expected: self.dim,
                actual: x.len(),
            });
        }
        if !y.is_finite() || x.iter().any(|v| !v.is_finite()) {
            return Err(DataError::NonFinite {
                row: self.targets.len(),
            });
        }
        self.rows.extend_from_slice(x);
        self.rows.push(1.0);
        self.targets.push(y);
        Ok(())
    }

    /// Feature count `d` (not counting the bias column).
    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.dim + 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    /// Augmented row `x̃ⱼ`.
    #[inline]
    pub fn row(&self, j: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.rows[j * w..(j + 1) * w]
    }

    /// Raw features of row `j`.
    #[inline]
    pub fn features(&self, j: usize) -> &[f64] {
        let w = self.dim + 1;
        &self.rows[j * w..j * w + self.dim]
    }

    #[inline]
    pub fn target(&self, j: usize) -> f64 {
        self.targets[j]
    }

    #[inline]
    pub fn targets(&self) -> &[f64] {
        &self.targets
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.rows
            .chunks_exact(self.dim + 1)
            .zip(self.targets.iter().copied())
    }

    /// Copies the listed rows, in the listed order.
    pub fn subset(&self, indices: &[usize]) -> DesignMatrix {
        let w = self.dim + 1;
        let mut rows = Vec::with_capacity(indices.len() * w);
        let mut targets = Vec::with_capacity(indices.len());
        for &j in indices {
            rows.extend_from_slice(self.row(j));
            targets.push(self.targets[j]);
        }
        DesignMatrix {
            dim: self.dim,
            rows,
            targets,
        }
    }

    /// Column `k` of the raw features.
    pub fn column(&self, k: usize) -> Vec<f64> {
        (0..self.len()).map(|j| self.row(j)[k]).collect()
    }

    pub fn mean_target(&self) -> f64 {
        if self.is_empty() {
            0.0
        } else {
            self.targets.iter().sum::<f64>() / self.len() as f64
        }
    }
}

impl fmt::Debug for DesignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DesignMatrix")
            .field("dim", &self.dim)
            .field("n", &self.len())
            .finish()
    }
}

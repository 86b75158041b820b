//! Independent oracles shared by the integration tests.

#![allow(dead_code)]

use hrt_core::data::augment;
use hrt_core::{CoefVector, DesignMatrix, HingeKind, SplitParams, TreeNode};
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn exact(v: f64) -> BigRational {
    BigRational::from_float(v).expect("finite")
}

/// Solves `a x = b` (row-major `n × n`) exactly by Gaussian elimination
/// over the rationals, rounding only the final answer.
pub fn rational_solve(a: &[f64], b: &[f64]) -> Vec<f64> {
    let a: Vec<BigRational> = a.iter().map(|&v| exact(v)).collect();
    let b: Vec<BigRational> = b.iter().map(|&v| exact(v)).collect();
    rational_solve_exact(a, b)
        .iter()
        .map(|v| v.to_f64().unwrap())
        .collect()
}

pub fn rational_solve_exact(mut a: Vec<BigRational>, mut b: Vec<BigRational>) -> Vec<BigRational> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !a[r * n + col].is_zero())
            .expect("singular system");
        if pivot != col {
            for k in 0..n {
                a.swap(pivot * n + k, col * n + k);
            }
            b.swap(pivot, col);
        }
        for r in 0..n {
            if r == col || a[r * n + col].is_zero() {
                continue;
            }
            let f = &a[r * n + col] / &a[col * n + col];
            for k in col..n {
                let t = &f * &a[col * n + k];
                a[r * n + k] -= t;
            }
            let t = &f * &b[col];
            b[r] -= t;
        }
    }
    (0..n).map(|i| &b[i] / &a[i * n + i]).collect()
}

/// `(XᵀX + αI₀)⁻¹Xᵀy` over the given rows, assembled and solved exactly;
/// the bias (last) coefficient is not penalized.
pub fn ridge_oracle(m: &DesignMatrix, rows: &[usize], alpha: f64) -> Vec<f64> {
    let w = m.width();
    let mut a = vec![BigRational::zero(); w * w];
    let mut b = vec![BigRational::zero(); w];
    for &j in rows {
        let x: Vec<BigRational> = m.row(j).iter().map(|&v| exact(v)).collect();
        let y = exact(m.target(j));
        for i in 0..w {
            for k in 0..w {
                a[i * w + k] += &x[i] * &x[k];
            }
            b[i] += &x[i] * &y;
        }
    }
    let alpha = exact(alpha);
    for i in 0..w - 1 {
        a[i * w + i] += &alpha;
    }
    rational_solve_exact(a, b)
        .iter()
        .map(|v| v.to_f64().unwrap())
        .collect()
}

pub fn all_rows(m: &DesignMatrix) -> Vec<usize> {
    (0..m.len()).collect()
}

/// `½Σ(y − h)²` with the hinge written out per row.
pub fn objective_oracle(m: &DesignMatrix, p: &SplitParams) -> f64 {
    let mut total = 0.0;
    for j in 0..m.len() {
        let x = m.row(j);
        let s1: f64 = x.iter().zip(p.theta1.as_slice()).map(|(a, b)| a * b).sum();
        let s2: f64 = x.iter().zip(p.theta2.as_slice()).map(|(a, b)| a * b).sum();
        let h = match p.kind {
            HingeKind::Max => {
                if s1 >= s2 {
                    s1
                } else {
                    s2
                }
            }
            HingeKind::Min => {
                if s1 <= s2 {
                    s1
                } else {
                    s2
                }
            }
        };
        let r = m.target(j) - h;
        total += r * r;
    }
    0.5 * total
}

/// Recursive tree walk on raw (unaugmented) inputs.
pub fn naive_predict(node: &TreeNode, x: &[f64]) -> f64 {
    let affine = |theta: &CoefVector| {
        let c = theta.as_slice();
        let mut s = 0.0;
        for (xi, ci) in x.iter().zip(c) {
            s += xi * ci;
        }
        s + c[c.len() - 1]
    };
    match node {
        TreeNode::Leaf { theta } => affine(theta),
        TreeNode::Internal {
            split, left, right, ..
        } => {
            if affine(&split.theta1) >= affine(&split.theta2) {
                naive_predict(left, x)
            } else {
                naive_predict(right, x)
            }
        }
    }
}

/// 1-D least squares line over `(x, y)` pairs; returns the residual sum
/// of squares.
fn line_sse(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    points
        .iter()
        .map(|p| {
            let r = p.1 - (my + slope * (p.0 - mx));
            r * r
        })
        .sum()
}

/// Best `½SSE` over all `N − 1` sorted threshold partitions with a separate
/// least squares line on each side.
pub fn best_threshold_objective(xs: &[f64], ys: &[f64]) -> f64 {
    best_threshold(xs, ys).1
}

/// Size of the lower side and `½SSE` of the best sorted threshold partition.
pub fn best_threshold(xs: &[f64], ys: &[f64]) -> (usize, f64) {
    let mut pts: Vec<(f64, f64)> = xs.iter().copied().zip(ys.iter().copied()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    (1..pts.len())
        .map(|k| (k, 0.5 * (line_sse(&pts[..k]) + line_sse(&pts[k..]))))
        .fold(
            (0, f64::INFINITY),
            |best, c| if c.1 < best.1 { c } else { best },
        )
}

pub fn uniform_rows<R: Rng>(rng: &mut R, n: usize, d: usize, lo: f64, hi: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.random_range(lo..hi)).collect())
        .collect()
}

pub fn random_coefs<R: Rng>(rng: &mut R, len: usize, scale: f64) -> CoefVector {
    CoefVector::new((0..len).map(|_| rng.random_range(-scale..scale)).collect())
}

pub fn dot_raw(theta: &CoefVector, x: &[f64]) -> f64 {
    theta.dot(&augment(x))
}

/// A random tree of exactly the given depth on `d` features.
pub fn random_tree<R: Rng>(rng: &mut R, depth: usize, d: usize) -> TreeNode {
    if depth == 0 {
        return TreeNode::Leaf {
            theta: random_coefs(rng, d + 1, 5.0),
        };
    }
    let kind = if rng.random_bool(0.5) {
        HingeKind::Max
    } else {
        HingeKind::Min
    };
    let split = SplitParams::new(
        random_coefs(rng, d + 1, 2.0),
        random_coefs(rng, d + 1, 2.0),
        kind,
    )
    .unwrap();
    TreeNode::Internal {
        split,
        left: Box::new(random_tree(rng, depth - 1, d)),
        right: Box::new(random_tree(rng, depth - 1, d)),
        fallback_used: rng.random_bool(0.2),
    }
}

pub fn matrix(rows: &[Vec<f64>], ys: &[f64]) -> DesignMatrix {
    DesignMatrix::from_rows(rows, ys).unwrap()
}

//! Test-only oracles. Nothing here calls into the crate's numerical paths.

#![allow(dead_code, clippy::needless_range_loop)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tensvd::{DenseTensor, Matrix};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_tensor(rng: &mut impl Rng, dims: &[usize]) -> DenseTensor {
    let n: usize = dims.iter().product();
    let data = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
    DenseTensor::new(dims.to_vec(), data).unwrap()
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> Matrix {
    let data = (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect();
    Matrix::from_col_major(rows, cols, data).unwrap()
}

/// Row-major nested vectors, indexing by hand.
pub fn to_rows(m: &Matrix) -> Vec<Vec<f64>> {
    (0..m.rows())
        .map(|i| (0..m.cols()).map(|j| m.get(i, j)).collect())
        .collect()
}

/// Multi-index → flat offset, first index fastest.
pub fn offset(dims: &[usize], idx: &[usize]) -> usize {
    let mut off = 0;
    let mut stride = 1;
    for (i, d) in idx.iter().zip(dims) {
        off += i * stride;
        stride *= d;
    }
    off
}

/// Every multi-index of `dims`, first index fastest.
pub fn indices(dims: &[usize]) -> Vec<Vec<usize>> {
    let n: usize = dims.iter().product();
    let mut out = Vec::with_capacity(n);
    let mut idx = vec![0; dims.len()];
    for _ in 0..n {
        out.push(idx.clone());
        for k in 0..dims.len() {
            idx[k] += 1;
            if idx[k] < dims[k] {
                break;
            }
            idx[k] = 0;
        }
    }
    out
}

/// Singular values of a dense row-major matrix by one-sided Jacobi rotations
/// on the columns of its transpose-or-self (whichever is taller).
pub fn jacobi_singular_values(a: &[Vec<f64>]) -> Vec<f64> {
    let (u, s) = jacobi_svd(a);
    let _ = u;
    s
}

/// One-sided Jacobi SVD. Returns `(U, σ)` with `U` as columns (row-major
/// `rows × rank`) for the original matrix and `σ` descending.
pub fn jacobi_svd(a: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let rows = a.len();
    let cols = a[0].len();
    // Work on columns of Aᵀ (length `cols`, one per row of A): orthogonalising
    // them yields A = U Σ Vᵀ with U accumulated from the rotations.
    let mut w: Vec<Vec<f64>> = a.to_vec(); // rows vectors of length cols
    let mut u: Vec<Vec<f64>> = (0..rows)
        .map(|i| (0..rows).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    for _sweep in 0..100 {
        let mut off = 0.0f64;
        for p in 0..rows {
            for q in p + 1..rows {
                let alpha: f64 = w[p].iter().map(|v| v * v).sum();
                let beta: f64 = w[q].iter().map(|v| v * v).sum();
                let gamma: f64 = w[p].iter().zip(&w[q]).map(|(x, y)| x * y).sum();
                if gamma.abs() <= 1e-300 {
                    continue;
                }
                off = off.max(gamma.abs() / (alpha * beta).sqrt());
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for k in 0..cols {
                    let (x, y) = (w[p][k], w[q][k]);
                    w[p][k] = c * x - s * y;
                    w[q][k] = s * x + c * y;
                }
                for row in u.iter_mut() {
                    let (x, y) = (row[p], row[q]);
                    row[p] = c * x - s * y;
                    row[q] = s * x + c * y;
                }
            }
        }
        if off < 1e-15 {
            break;
        }
    }
    let norms: Vec<f64> = w
        .iter()
        .map(|v| v.iter().map(|x| x * x).sum::<f64>().sqrt())
        .collect();
    let mut order: Vec<usize> = (0..rows).collect();
    order.sort_by(|&a, &b| norms[b].total_cmp(&norms[a]));
    let sigma = order.iter().map(|&i| norms[i]).collect();
    let u_sorted = (0..rows)
        .map(|r| order.iter().map(|&i| u[r][i]).collect())
        .collect();
    (u_sorted, sigma)
}

/// Largest principal angle (radians) between the column spans of two
/// orthonormal `n × k` bases given as row-major rows.
pub fn max_principal_angle(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let k = a[0].len();
    // M = Aᵀ B (k × k); cosines of principal angles are its singular values.
    let m: Vec<Vec<f64>> = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| a.iter().zip(b).map(|(ra, rb)| ra[i] * rb[j]).sum())
                .collect()
        })
        .collect();
    let s = jacobi_singular_values(&m);
    let smallest = s.iter().copied().fold(f64::INFINITY, f64::min).min(1.0);
    smallest.acos()
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn max_rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let scale = a.iter().map(|v| v.abs()).fold(0.0f64, f64::max).max(1e-300);
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
        / scale
}

//! Leading left singular vectors through the Gram matrix.
//!
//! For a short-and-wide unfolding `X` (`I_n ≪ ∏_{k≠n} I_k`) the eigenvectors of
//! `X Xᵀ` are the left singular vectors of `X`, and the eigenvalues are the squared
//! singular values. Forming `X Xᵀ` costs one GEMM and leaves only an `I_n × I_n`
//! symmetric eigenproblem. The price is a squared condition number, which is fine
//! for compression but not for rank decisions; [`singular_values`] uses a direct
//! SVD for those.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::tensor::{gemm, symmetrize, GemmOperand, Matrix};

/// Leading eigenpairs of a Gram matrix.
#[derive(Debug, Clone)]
pub struct SpectralResult {
    /// `rows × k`, orthonormal columns.
    pub vectors: Matrix,
    /// Descending, clamped at zero. These are squared singular values.
    pub values: Vec<f64>,
}

impl SpectralResult {
    pub fn singular_values(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.sqrt()).collect()
    }
}

/// `m · mᵀ`.
pub fn gram_matrix(m: &Matrix) -> Matrix {
    let rows = m.rows();
    let mut g = Matrix::zeros(rows, rows);
    gemm(
        rows,
        m.cols(),
        rows,
        GemmOperand::new(m.data(), 1, rows),
        GemmOperand::new(m.data(), rows, 1),
        0.0,
        g.data_mut(),
        rows,
    );
    symmetrize(&mut g);
    g
}

/// Top-`k` left singular vectors of `m` via the eigendecomposition of `m mᵀ`.
pub fn leading_left_singular_vectors(m: &Matrix, k: usize) -> Result<SpectralResult> {
    if k == 0 || k > m.rows() {
        return Err(Error::VectorCountOutOfRange {
            requested: k,
            rows: m.rows(),
        });
    }
    leading_eigenvectors(&gram_matrix(m), k)
}

/// Top-`k` eigenpairs of a symmetric positive semidefinite matrix.
///
/// Columns are sign-fixed so that each column's largest-magnitude entry is
/// positive; eigenvalues below zero (round-off) are clamped.
pub fn leading_eigenvectors(gram: &Matrix, k: usize) -> Result<SpectralResult> {
    let n = gram.rows();
    if gram.cols() != n {
        return Err(Error::DimensionMismatch(format!(
            "eigendecomposition of a non-square {}x{} matrix",
            n,
            gram.cols()
        )));
    }
    if k == 0 || k > n {
        return Err(Error::VectorCountOutOfRange {
            requested: k,
            rows: n,
        });
    }
    let eig = SymmetricEigen::new(DMatrix::from_column_slice(n, n, gram.data()));
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });

    let mut vectors = Matrix::zeros(n, k);
    let mut values = Vec::with_capacity(k);
    for (dst, &src) in order.iter().take(k).enumerate() {
        values.push(eig.eigenvalues[src].max(0.0));
        let col = vectors.column_mut(dst);
        col.copy_from_slice(eig.eigenvectors.column(src).as_slice());
        fix_sign(col);
    }
    Ok(SpectralResult { vectors, values })
}

/// Top-`k` left singular vectors from a thin SVD of `m` itself.
///
/// Slower than the Gram route for wide matrices, but it does not square the
/// condition number. `values` still holds squared singular values.
pub fn direct_left_singular_vectors(m: &Matrix, k: usize) -> Result<SpectralResult> {
    let rows = m.rows();
    if k == 0 || k > rows {
        return Err(Error::VectorCountOutOfRange { requested: k, rows });
    }
    let dm = DMatrix::from_column_slice(rows, m.cols(), m.data());
    let svd = dm.svd(true, false);
    let u = svd.u.expect("left vectors requested");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });

    // A thin SVD of a tall-narrow matrix has fewer than `rows` vectors; the
    // remainder is completed to an orthonormal basis.
    let mut vectors = Matrix::zeros(rows, k);
    let mut values = Vec::with_capacity(k);
    let mut filled = 0;
    for &src in order.iter().take(k) {
        let s = svd.singular_values[src];
        values.push(s * s);
        let col = vectors.column_mut(filled);
        col.copy_from_slice(u.column(src).as_slice());
        fix_sign(col);
        filled += 1;
    }
    complete_basis(&mut vectors, filled);
    values.resize(k, 0.0);
    Ok(SpectralResult { vectors, values })
}

/// Singular values of `m`, descending, from a direct SVD.
pub fn singular_values(m: &Matrix) -> Vec<f64> {
    if m.rows() == 0 || m.cols() == 0 {
        return Vec::new();
    }
    let dm = DMatrix::from_column_slice(m.rows(), m.cols(), m.data());
    let mut sv: Vec<f64> = dm.singular_values().iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

fn fix_sign(col: &mut [f64]) {
    let mut pivot = 0.0f64;
    for &v in col.iter() {
        if v.abs() > pivot.abs() {
            pivot = v;
        }
    }
    if pivot < 0.0 {
        col.iter_mut().for_each(|v| *v = -*v);
    }
}

/// Fills columns `filled..` with unit vectors orthogonal to everything before them
/// (Gram–Schmidt over the canonical basis).
fn complete_basis(vectors: &mut Matrix, mut filled: usize) {
    let rows = vectors.rows();
    let mut e = 0;
    while filled < vectors.cols() && e < rows {
        let mut cand = vec![0.0; rows];
        cand[e] = 1.0;
        e += 1;
        for _ in 0..2 {
            for c in 0..filled {
                let col = vectors.column(c);
                let dot: f64 = col.iter().zip(&cand).map(|(a, b)| a * b).sum();
                for (x, y) in cand.iter_mut().zip(col) {
                    *x -= dot * y;
                }
            }
        }
        let norm = cand.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        let dst = vectors.column_mut(filled);
        for (d, v) in dst.iter_mut().zip(&cand) {
            *d = v / norm;
        }
        fix_sign(dst);
        filled += 1;
    }
}

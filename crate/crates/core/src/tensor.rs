//! Dense column-major tensors and the multilinear primitives built on them.
//!
//! Element `(i_1, …, i_N)` lives at flat offset `i_1 + i_2·I_1 + i_3·I_1·I_2 + …`
//! (first index fastest). Unfoldings follow the Kolda–Bader column order, so the
//! mode-`n` unfolding of a column-major tensor is just a strided view of the same
//! buffer. Modes are zero-based throughout the API.

use std::fmt;

use crate::error::{Error, Result};

/// Dense real matrix, column-major.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i + i * n] = 1.0;
        }
        m
    }

    pub fn from_col_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::BufferLength {
                dims: vec![rows, cols],
                len: data.len(),
                expected: rows * cols,
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from row slices; convenient in tests.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != ncols) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            for (j, &v) in row.iter().enumerate() {
                m.data[i + j * nrows] = v;
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row + col * self.rows]
    }

    #[inline]
    pub fn set(&mut self, row: usize, col: usize, value: f64) {
        self.data[row + col * self.rows] = value;
    }

    pub fn column(&self, col: usize) -> &[f64] {
        &self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn column_mut(&mut self, col: usize) -> &mut [f64] {
        &mut self.data[col * self.rows..(col + 1) * self.rows]
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::zeros(self.cols, self.rows);
        for j in 0..self.cols {
            for i in 0..self.rows {
                t.data[j + i * self.cols] = self.data[i + j * self.rows];
            }
        }
        t
    }

    /// Keeps the first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Matrix {
        let k = k.min(self.cols);
        Matrix {
            rows: self.rows,
            cols: k,
            data: self.data[..self.rows * k].to_vec(),
        }
    }

    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        gemm(
            self.rows,
            self.cols,
            other.cols,
            GemmOperand::new(&self.data, 1, self.rows),
            GemmOperand::new(&other.data, 1, other.rows),
            0.0,
            &mut out.data,
            self.rows,
        );
        Ok(out)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Largest absolute deviation of `selfᵀ·self` from the identity.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in 0..self.cols {
            for b in 0..=a {
                let dot: f64 = self
                    .column(a)
                    .iter()
                    .zip(self.column(b))
                    .map(|(x, y)| x * y)
                    .sum();
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((dot - target).abs());
            }
        }
        worst
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<f64> = (0..self.cols.min(8)).map(|j| self.get(i, j)).collect();
            writeln!(f, "  {row:?}")?;
        }
        write!(f, "]")
    }
}

/// A strided read-only operand for [`gemm`].
#[derive(Clone, Copy)]
pub(crate) struct GemmOperand<'a> {
    data: &'a [f64],
    row_stride: usize,
    col_stride: usize,
}

impl<'a> GemmOperand<'a> {
    pub(crate) fn new(data: &'a [f64], row_stride: usize, col_stride: usize) -> Self {
        Self {
            data,
            row_stride,
            col_stride,
        }
    }
}

/// `c (m×n, column-major with leading dimension ldc) = a·b + beta·c`.
#[allow(clippy::too_many_arguments)]
pub(crate) fn gemm(
    m: usize,
    k: usize,
    n: usize,
    a: GemmOperand<'_>,
    b: GemmOperand<'_>,
    beta: f64,
    c: &mut [f64],
    ldc: usize,
) {
    if m == 0 || n == 0 {
        return;
    }
    if k == 0 {
        for v in c.iter_mut() {
            *v *= beta;
        }
        return;
    }
    // Bounds that matrixmultiply relies on but cannot check itself.
    let last = |op: &GemmOperand<'_>, r: usize, cl: usize| {
        (r - 1) * op.row_stride + (cl - 1) * op.col_stride
    };
    assert!(
        last(&a, m, k) < a.data.len(),
        "gemm: operand a out of bounds"
    );
    assert!(
        last(&b, k, n) < b.data.len(),
        "gemm: operand b out of bounds"
    );
    assert!(
        (m - 1) + (n - 1) * ldc < c.len(),
        "gemm: output out of bounds"
    );
    // SAFETY: all three operands were bounds-checked above for the given strides.
    unsafe {
        matrixmultiply::dgemm(
            m,
            k,
            n,
            1.0,
            a.data.as_ptr(),
            a.row_stride as isize,
            a.col_stride as isize,
            b.data.as_ptr(),
            b.row_stride as isize,
            b.col_stride as isize,
            beta,
            c.as_mut_ptr(),
            1,
            ldc as isize,
        );
    }
}

/// N-order real tensor with a column-major element buffer.
#[derive(Clone, PartialEq)]
pub struct DenseTensor {
    dims: Vec<usize>,
    data: Vec<f64>,
}

impl DenseTensor {
    pub fn new(dims: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let expected = checked_volume(&dims)?;
        if data.len() != expected {
            return Err(Error::BufferLength {
                dims,
                len: data.len(),
                expected,
            });
        }
        Ok(Self { dims, data })
    }

    pub fn zeros(dims: Vec<usize>) -> Result<Self> {
        let n = checked_volume(&dims)?;
        Ok(Self {
            dims,
            data: vec![0.0; n],
        })
    }

    /// Builds a tensor by evaluating `f` at every multi-index.
    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> f64) -> Result<Self> {
        let n = checked_volume(&dims)?;
        let mut data = Vec::with_capacity(n);
        let mut idx = vec![0usize; dims.len()];
        for _ in 0..n {
            data.push(f(&idx));
            for (k, d) in dims.iter().enumerate() {
                idx[k] += 1;
                if idx[k] < *d {
                    break;
                }
                idx[k] = 0;
            }
        }
        Ok(Self { dims, data })
    }

    #[inline]
    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    #[inline]
    pub fn order(&self) -> usize {
        self.dims.len()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.data.len()
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    #[inline]
    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn linear_index(&self, index: &[usize]) -> usize {
        debug_assert_eq!(index.len(), self.dims.len());
        let mut offset = 0;
        let mut stride = 1;
        for (i, d) in index.iter().zip(&self.dims) {
            debug_assert!(i < d);
            offset += i * stride;
            stride *= d;
        }
        offset
    }

    pub fn get(&self, index: &[usize]) -> f64 {
        self.data[self.linear_index(index)]
    }

    pub fn set(&mut self, index: &[usize], value: f64) {
        let at = self.linear_index(index);
        self.data[at] = value;
    }

    /// Same buffer, different shape. The element count must match.
    pub fn reshaped(self, dims: Vec<usize>) -> Result<Self> {
        DenseTensor::new(dims, self.data)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.squared_norm().sqrt()
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    pub fn inner_product(&self, other: &DenseTensor) -> Result<f64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!(
                "inner product of {:?} and {:?}",
                self.dims, other.dims
            )));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum())
    }

    pub fn max_value(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    fn check_mode(&self, mode: usize) -> Result<()> {
        if mode >= self.order() {
            return Err(Error::InvalidMode {
                mode,
                order: self.order(),
            });
        }
        Ok(())
    }

    /// Splits the shape around `mode` into `(left, dim, right)` volumes.
    pub(crate) fn mode_split(&self, mode: usize) -> (usize, usize, usize) {
        let left = self.dims[..mode].iter().product();
        let right = self.dims[mode + 1..].iter().product();
        (left, self.dims[mode], right)
    }

    /// Mode-`n` unfolding: `I_n × ∏_{k≠n} I_k`, fibers as columns.
    pub fn unfold(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, dim, right) = self.mode_split(mode);
        if left == 1 {
            return Matrix::from_col_major(dim, right, self.data.clone());
        }
        let mut out = Matrix::zeros(dim, left * right);
        for r in 0..right {
            for i in 0..dim {
                let src = &self.data[(r * dim + i) * left..(r * dim + i + 1) * left];
                for (l, &v) in src.iter().enumerate() {
                    out.data[i + (l + r * left) * dim] = v;
                }
            }
        }
        Ok(out)
    }

    /// Inverse of [`DenseTensor::unfold`].
    pub fn fold(matrix: &Matrix, mode: usize, dims: &[usize]) -> Result<DenseTensor> {
        let mut out = DenseTensor::zeros(dims.to_vec())?;
        out.check_mode(mode)?;
        let (left, dim, right) = out.mode_split(mode);
        if matrix.rows != dim || matrix.cols != left * right {
            return Err(Error::DimensionMismatch(format!(
                "cannot fold a {}x{} matrix along mode {mode} into {dims:?}",
                matrix.rows, matrix.cols
            )));
        }
        for r in 0..right {
            for i in 0..dim {
                let dst = &mut out.data[(r * dim + i) * left..(r * dim + i + 1) * left];
                for (l, v) in dst.iter_mut().enumerate() {
                    *v = matrix.data[i + (l + r * left) * dim];
                }
            }
        }
        Ok(out)
    }

    /// `self ×_mode u`: every mode-`mode` fiber is multiplied by `u`.
    pub fn mode_n_product(&self, u: &Matrix, mode: usize) -> Result<DenseTensor> {
        self.check_mode(mode)?;
        let (left, dim, right) = self.mode_split(mode);
        if u.cols != dim {
            return Err(Error::DimensionMismatch(format!(
                "mode-{mode} product needs {dim} matrix columns, got {}",
                u.cols
            )));
        }
        let out_dim = u.rows;
        let mut dims = self.dims.clone();
        dims[mode] = out_dim;
        let mut out = vec![0.0; left * out_dim * right];
        if left == 1 {
            // Y (out_dim × right) = U · X (dim × right)
            gemm(
                out_dim,
                dim,
                right,
                GemmOperand::new(&u.data, 1, u.rows),
                GemmOperand::new(&self.data, 1, dim),
                0.0,
                &mut out,
                out_dim,
            );
        } else {
            // Per slab: Y_r (left × out_dim) = X_r (left × dim) · Uᵀ
            let ut = GemmOperand::new(&u.data, u.rows, 1);
            for r in 0..right {
                let src = &self.data[r * left * dim..(r + 1) * left * dim];
                let dst = &mut out[r * left * out_dim..(r + 1) * left * out_dim];
                gemm(
                    left,
                    dim,
                    out_dim,
                    GemmOperand::new(src, 1, left),
                    ut,
                    0.0,
                    dst,
                    left,
                );
            }
        }
        DenseTensor::new(dims, out)
    }

    /// `X_(n) X_(n)ᵀ` computed straight from the buffer, without materialising
    /// the unfolding. Equal to `gram_matrix(&self.unfold(mode)?)`.
    pub fn mode_gram(&self, mode: usize) -> Result<Matrix> {
        self.check_mode(mode)?;
        let (left, dim, right) = self.mode_split(mode);
        let mut g = Matrix::zeros(dim, dim);
        if left == 1 {
            gemm(
                dim,
                right,
                dim,
                GemmOperand::new(&self.data, 1, dim),
                GemmOperand::new(&self.data, dim, 1),
                0.0,
                &mut g.data,
                dim,
            );
        } else {
            for r in 0..right {
                let slab = &self.data[r * left * dim..(r + 1) * left * dim];
                // X_rᵀ X_r with X_r = slab as (left × dim)
                gemm(
                    dim,
                    left,
                    dim,
                    GemmOperand::new(slab, left, 1),
                    GemmOperand::new(slab, 1, left),
                    1.0,
                    &mut g.data,
                    dim,
                );
            }
        }
        symmetrize(&mut g);
        Ok(g)
    }

    /// Per-mode numerical ranks of the unfoldings.
    ///
    /// A singular value counts when it exceeds `max(dims)·ε·σ_max` of its unfolding.
    pub fn multilinear_rank(&self) -> Vec<usize> {
        let scale = *self.dims.iter().max().unwrap_or(&1) as f64 * f64::EPSILON;
        (0..self.order())
            .map(|mode| {
                let unfolding = self.unfold(mode).expect("mode in range");
                let sv = crate::svd::singular_values(&unfolding);
                let top = sv.first().copied().unwrap_or(0.0);
                if top == 0.0 {
                    return 0;
                }
                sv.iter().filter(|&&s| s > scale * top).count()
            })
            .collect()
    }
}

impl fmt::Debug for DenseTensor {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head = &self.data[..self.data.len().min(8)];
        write!(f, "DenseTensor {:?} {:?}", self.dims, head)?;
        if self.data.len() > 8 {
            write!(f, " …")?;
        }
        Ok(())
    }
}

pub(crate) fn symmetrize(g: &mut Matrix) {
    let n = g.rows;
    for j in 0..n {
        for i in 0..j {
            let avg = 0.5 * (g.data[i + j * n] + g.data[j + i * n]);
            g.data[i + j * n] = avg;
            g.data[j + i * n] = avg;
        }
    }
}

/// Element count of a shape; rejects empty shapes, zero dims and overflow.
pub fn checked_volume(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() {
        return Err(Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "order must be at least 1".into(),
        });
    }
    let mut n: usize = 1;
    for &d in dims {
        if d == 0 {
            return Err(Error::InvalidShape {
                dims: dims.to_vec(),
                reason: "every dimension must be positive".into(),
            });
        }
        n = n.checked_mul(d).ok_or_else(|| Error::InvalidShape {
            dims: dims.to_vec(),
            reason: "element count overflows".into(),
        })?;
    }
    Ok(n)
}

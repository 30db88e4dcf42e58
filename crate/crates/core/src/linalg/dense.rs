use std::fmt;
use std::ops::{Index, IndexMut};
use std::sync::OnceLock;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::cholesky::Cholesky;
use crate::par;

/// Relative asymmetry accepted (and then symmetrized away) by [`DenseSymMatrix::new`].
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Dense row-major matrix of finite reals.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "DenseMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows.min(8) {
            let row: Vec<String> = self.row(i).iter().take(8).map(|v| format!("{v:.6}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl DenseMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(dim_mismatch(
                format!("{} entries ({rows}x{cols})", rows * cols),
                format!("{} entries", data.len()),
            ));
        }
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    /// Build from row slices (convenient for literals).
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(dim_mismatch(format!("{cols} columns"), format!("{} columns", r.len())));
            }
            data.extend_from_slice(r);
        }
        Self::new(rows.len(), cols, data)
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { 1.0 } else { 0.0 })
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { 0.0 })
    }

    /// Wrap data without the finiteness scan; only for results computed internally.
    pub(crate) fn from_raw(rows: usize, cols: usize, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), rows * cols);
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub(crate) fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut out = vec![0.0; self.data.len()];
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                out[j * self.rows + i] = *v;
            }
        }
        Self::from_raw(self.cols, self.rows, out)
    }

    /// Matrix product. Rows of the result are computed independently; zero entries of
    /// `self` are skipped, which makes products with 0/1 maps and stencils cheap.
    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.cols != other.rows {
            return Err(dim_mismatch(
                format!("inner dimension {}", self.cols),
                format!("{}", other.rows),
            ));
        }
        let (m, p) = (self.rows, other.cols);
        let mut out = vec![0.0; m * p];
        if p > 0 {
            par::for_each_chunk_mut(&mut out, p, |i, out_row| {
                for (k, &a) in self.row(i).iter().enumerate() {
                    if a != 0.0 {
                        axpy(a, other.row(k), out_row);
                    }
                }
            });
        }
        Ok(Self::from_raw(m, p, out))
    }

    /// `selfᵀ · other`.
    pub fn transpose_matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.transpose().matmul(other)
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.cols {
            return Err(dim_mismatch(self.cols, x.len()));
        }
        Ok((0..self.rows).map(|i| dot(self.row(i), x)).collect())
    }

    /// `selfᵀ · y`.
    pub fn matvec_transpose(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.rows {
            return Err(dim_mismatch(self.rows, y.len()));
        }
        let mut out = vec![0.0; self.cols];
        for (i, &yi) in y.iter().enumerate() {
            if yi != 0.0 {
                axpy(yi, self.row(i), &mut out);
            }
        }
        Ok(out)
    }

    pub fn scaled(&self, t: f64) -> DenseMatrix {
        Self::from_raw(self.rows, self.cols, self.data.iter().map(|v| v * t).collect())
    }

    pub fn sub(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    pub fn add(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        self.check_same_shape(other)?;
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        Ok(Self::from_raw(self.rows, self.cols, data))
    }

    fn check_same_shape(&self, other: &DenseMatrix) -> Result<()> {
        if self.shape() != other.shape() {
            return Err(dim_mismatch(
                format!("{}x{}", self.rows, self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        Ok(())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &DenseMatrix) -> f64 {
        assert_eq!(self.shape(), other.shape(), "max_abs_diff shape mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// `‖self − I‖_max`.
    pub fn distance_to_identity(&self) -> f64 {
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for (j, v) in self.row(i).iter().enumerate() {
                let target = if i == j { 1.0 } else { 0.0 };
                m = m.max((v - target).abs());
            }
        }
        m
    }

    /// Largest `|a_ij − a_ji|`.
    pub fn asymmetry(&self) -> f64 {
        assert!(self.is_square());
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// Rows restricted to `indices`, all columns kept.
    pub fn select_rows(&self, indices: &[usize]) -> DenseMatrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Self::from_raw(indices.len(), self.cols, data)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

/// Symmetric matrix with a lazily computed, cached Cholesky factor.
///
/// The factor doubles as the positive-definiteness proof: once `cholesky()` has
/// succeeded every pivot was strictly positive.
#[derive(Clone)]
pub struct DenseSymMatrix {
    inner: DenseMatrix,
    spd_proof: OnceLock<std::result::Result<Cholesky, Error>>,
}

impl fmt::Debug for DenseSymMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseSymMatrix({:?})", self.inner)
    }
}

impl PartialEq for DenseSymMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.inner == other.inner
    }
}

impl DenseSymMatrix {
    /// Accepts `m` when `‖m − mᵀ‖_max ≤ 1e−12·‖m‖_max`, storing `(m + mᵀ)/2`.
    pub fn new(m: DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(dim_mismatch("square matrix", format!("{}x{}", m.rows, m.cols)));
        }
        let asymmetry = m.asymmetry();
        let allowed = SYMMETRY_TOL * m.max_abs();
        if asymmetry > allowed {
            return Err(Error::NotSymmetric { asymmetry, allowed });
        }
        Ok(Self::symmetrized(m))
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        Self::new(DenseMatrix::from_rows(rows)?)
    }

    /// Symmetric part of a matrix that is symmetric in exact arithmetic
    /// (products such as `Xᵀ·B·X`), discarding round-off asymmetry.
    pub fn symmetrized(mut m: DenseMatrix) -> Self {
        debug_assert!(m.is_square());
        let n = m.rows;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (m[(i, j)] + m[(j, i)]);
                m[(i, j)] = v;
                m[(j, i)] = v;
            }
        }
        Self {
            inner: m,
            spd_proof: OnceLock::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::symmetrized(DenseMatrix::identity(n))
    }

    pub fn from_diagonal(diag: &[f64]) -> Result<Self> {
        if let Some(k) = diag.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k, col: k });
        }
        Ok(Self::symmetrized(DenseMatrix::from_diagonal(diag)))
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.inner.rows
    }

    pub fn as_matrix(&self) -> &DenseMatrix {
        &self.inner
    }

    pub fn into_matrix(self) -> DenseMatrix {
        self.inner
    }

    /// Cached Cholesky factorization; the error is cached as well.
    pub fn cholesky(&self) -> Result<&Cholesky> {
        self.spd_proof
            .get_or_init(|| Cholesky::factor(&self.inner))
            .as_ref()
            .map_err(Clone::clone)
    }

    pub fn is_spd(&self) -> bool {
        self.cholesky().is_ok()
    }

    /// True when a factorization has already been attempted and succeeded.
    pub fn has_spd_proof(&self) -> bool {
        matches!(self.spd_proof.get(), Some(Ok(_)))
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.inner.matvec(x)
    }

    /// `xᵀ·M·x`.
    pub fn quad_form(&self, x: &[f64]) -> Result<f64> {
        Ok(dot(&self.matvec(x)?, x))
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        solve_spd(self, rhs)
    }

    pub fn scaled(&self, t: f64) -> DenseSymMatrix {
        Self::symmetrized(self.inner.scaled(t))
    }

    /// Principal submatrix on `indices` (sorted or not; order is preserved).
    pub fn principal_submatrix(&self, indices: &[usize]) -> DenseSymMatrix {
        let k = indices.len();
        let data = indices
            .iter()
            .flat_map(|&i| indices.iter().map(move |&j| (i, j)))
            .map(|(i, j)| self.inner[(i, j)])
            .collect();
        Self::symmetrized(DenseMatrix::from_raw(k, k, data))
    }

    /// Explicit inverse through the cached factor.
    pub fn inverse(&self) -> Result<DenseSymMatrix> {
        let chol = self.cholesky()?;
        Ok(Self::symmetrized(
            chol.solve_matrix(&DenseMatrix::identity(self.dim()))?,
        ))
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.max_abs()
    }
}

impl Index<(usize, usize)> for DenseSymMatrix {
    type Output = f64;

    #[inline]
    fn index(&self, idx: (usize, usize)) -> &f64 {
        &self.inner[idx]
    }
}

/// Solve `m·x = rhs` for symmetric positive definite `m`.
pub fn solve_spd(m: &DenseSymMatrix, rhs: &[f64]) -> Result<Vec<f64>> {
    if rhs.len() != m.dim() {
        return Err(dim_mismatch(m.dim(), rhs.len()));
    }
    m.cholesky()?.solve(rhs)
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    // four accumulators let the compiler vectorize without reassociation flags
    let mut acc = [0.0; 4];
    let chunks = a.len() / 4;
    for c in 0..chunks {
        let k = 4 * c;
        acc[0] += a[k] * b[k];
        acc[1] += a[k + 1] * b[k + 1];
        acc[2] += a[k + 2] * b[k + 2];
        acc[3] += a[k + 3] * b[k + 3];
    }
    let mut s = (acc[0] + acc[1]) + (acc[2] + acc[3]);
    for k in 4 * chunks..a.len() {
        s += a[k] * b[k];
    }
    s
}

/// `y += alpha·x`.
#[inline]
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

pub fn max_abs(x: &[f64]) -> f64 {
    x.iter().fold(0.0, |m, v| m.max(v.abs()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_ragged_and_non_finite() {
        assert!(DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_err());
        assert!(matches!(
            DenseMatrix::new(1, 2, vec![1.0, f64::NAN]),
            Err(Error::NonFinite { row: 0, col: 1 })
        ));
        assert!(DenseMatrix::new(2, 2, vec![1.0; 3]).is_err());
    }

    #[test]
    fn symmetry_gate() {
        let tiny = DenseMatrix::from_rows(&[[2.0, 1.0], [1.0 + 1e-14, 2.0]]).unwrap();
        let s = DenseSymMatrix::new(tiny).unwrap();
        assert_eq!(s[(0, 1)], s[(1, 0)]);

        let skew = DenseMatrix::from_rows(&[[2.0, 1.0], [1.1, 2.0]]).unwrap();
        assert!(matches!(DenseSymMatrix::new(skew), Err(Error::NotSymmetric { .. })));

        let rect = DenseMatrix::zeros(2, 3);
        assert!(matches!(
            DenseSymMatrix::new(rect),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn matmul_and_transpose() {
        let a = DenseMatrix::from_rows(&[[1.0, 2.0, 0.0], [0.0, 1.0, 3.0]]).unwrap();
        let b = DenseMatrix::from_rows(&[[1.0, 0.0], [2.0, 1.0], [0.0, 4.0]]).unwrap();
        let c = a.matmul(&b).unwrap();
        assert_eq!(c, DenseMatrix::from_rows(&[[5.0, 2.0], [2.0, 13.0]]).unwrap());
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.transpose_matmul(&a).unwrap(), a.transpose().matmul(&a).unwrap());
        assert!(a.matmul(&a).is_err());
        assert_eq!(a.matvec_transpose(&[1.0, 1.0]).unwrap(), vec![1.0, 3.0, 3.0]);
    }

    #[test]
    fn diagonal_solve() {
        let m = DenseSymMatrix::from_diagonal(&[2.0, 4.0]).unwrap();
        let x = solve_spd(&m, &[2.0, 4.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
        assert!(matches!(solve_spd(&m, &[1.0]), Err(Error::DimensionMismatch { .. })));
        let id = DenseSymMatrix::identity(2);
        assert_eq!(solve_spd(&id, &[3.0, 4.0]).unwrap(), vec![3.0, 4.0]);
    }

    #[test]
    fn solve_residual_small() {
        let m = DenseSymMatrix::from_rows(&[[4.0, 2.0], [2.0, 5.0]]).unwrap();
        let rhs = [6.0, 7.0];
        let x = solve_spd(&m, &rhs).unwrap();
        let r: Vec<f64> = m.matvec(&x).unwrap().iter().zip(&rhs).map(|(a, b)| a - b).collect();
        assert!(norm2(&r) <= 1e-10 * norm2(&rhs));
    }

    #[test]
    fn principal_submatrix_keeps_order() {
        let m = DenseSymMatrix::from_rows(&[[1.0, 2.0, 3.0], [2.0, 4.0, 5.0], [3.0, 5.0, 6.0]]).unwrap();
        let s = m.principal_submatrix(&[0, 2]);
        assert_eq!(
            s.as_matrix(),
            &DenseMatrix::from_rows(&[[1.0, 3.0], [3.0, 6.0]]).unwrap()
        );
    }

    #[test]
    fn dot_matches_naive() {
        let a: Vec<f64> = (0..11).map(|i| i as f64 * 0.5).collect();
        let b: Vec<f64> = (0..11).map(|i| 1.0 - i as f64).collect();
        let naive: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive).abs() < 1e-12);
    }
}

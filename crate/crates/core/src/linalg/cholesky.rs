//! Envelope-aware dense Cholesky factorization.
//!
//! Storage is dense, but each row remembers the column of its first nonzero.
//! The factor never fills in ahead of that column, so block-diagonal operators
//! and banded stencils factor and solve at the cost of their profile rather
//! than `n³`.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::dense::{axpy, dot, DenseMatrix};
use crate::par;

/// Lower-triangular factor `L` with `L·Lᵀ = M`.
#[derive(Debug, Clone, PartialEq)]
pub struct Cholesky {
    n: usize,
    l: Vec<f64>,
    first: Vec<usize>,
}

impl Cholesky {
    /// Factor a symmetric matrix (only the lower triangle is read).
    ///
    /// Fails with `NotPositiveDefinite` at the first pivot that is not strictly positive.
    pub fn factor(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(dim_mismatch("square matrix", format!("{}x{}", m.rows(), m.cols())));
        }
        let n = m.rows();
        let first: Vec<usize> = (0..n)
            .map(|i| m.row(i)[..i].iter().position(|&v| v != 0.0).unwrap_or(i))
            .collect();
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            let fi = first[i];
            for j in fi..=i {
                let k0 = fi.max(first[j]);
                let s = m[(i, j)] - dot(&l[i * n + k0..i * n + j], &l[j * n + k0..j * n + j]);
                if j < i {
                    l[i * n + j] = s / l[j * n + j];
                } else if s > 0.0 && s.is_finite() {
                    l[i * n + i] = s.sqrt();
                } else {
                    return Err(Error::NotPositiveDefinite { pivot: i, value: s });
                }
            }
        }
        Ok(Self { n, l, first })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// The factor as a dense lower-triangular matrix.
    pub fn factor_matrix(&self) -> DenseMatrix {
        DenseMatrix::from_raw(self.n, self.n, self.l.clone())
    }

    #[inline]
    fn row(&self, i: usize) -> &[f64] {
        &self.l[i * self.n..(i + 1) * self.n]
    }

    /// Pivots `L_ii`, all strictly positive.
    pub fn pivots(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.l[i * self.n + i]).collect()
    }

    /// In place `x ← L⁻¹·x`.
    pub fn forward_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in 0..self.n {
            let row = self.row(i);
            let fi = self.first[i];
            let s = x[i] - dot(&row[fi..i], &x[fi..i]);
            x[i] = s / row[i];
        }
    }

    /// In place `x ← L⁻ᵀ·x`.
    pub fn backward_in_place(&self, x: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        for i in (0..self.n).rev() {
            let row = self.row(i);
            x[i] /= row[i];
            let xi = x[i];
            if xi != 0.0 {
                let fi = self.first[i];
                axpy(-xi, &row[fi..i], &mut x[fi..i]);
            }
        }
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        self.forward_in_place(x);
        self.backward_in_place(x);
    }

    pub fn solve(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        if rhs.len() != self.n {
            return Err(dim_mismatch(self.n, rhs.len()));
        }
        let mut x = rhs.to_vec();
        self.solve_in_place(&mut x);
        Ok(x)
    }

    /// Apply `op` to every column of `rhs` independently.
    fn map_columns(&self, rhs: &DenseMatrix, op: impl Fn(&Self, &mut [f64]) + Send + Sync) -> Result<DenseMatrix> {
        if rhs.rows() != self.n {
            return Err(dim_mismatch(format!("{} rows", self.n), format!("{} rows", rhs.rows())));
        }
        let mut cols = rhs.transpose();
        if self.n > 0 {
            par::for_each_chunk_mut(cols.as_mut_slice(), self.n, |_, c| op(self, c));
        }
        Ok(cols.transpose())
    }

    /// `M⁻¹·rhs` for every column of `rhs`.
    pub fn solve_matrix(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.map_columns(rhs, Self::solve_in_place)
    }

    /// `L⁻¹·rhs`.
    pub fn forward_matrix(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.map_columns(rhs, Self::forward_in_place)
    }

    /// `L⁻ᵀ·rhs`.
    pub fn backward_matrix(&self, rhs: &DenseMatrix) -> Result<DenseMatrix> {
        self.map_columns(rhs, Self::backward_in_place)
    }

    /// `L⁻¹·M·L⁻ᵀ` for symmetric `m`, returned as the symmetric part of the product.
    pub fn congruence_inverse(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        // Y = L⁻¹·M, then (L⁻¹·Yᵀ)ᵀ = L⁻¹·M·L⁻ᵀ; the outer transpose is a no-op up to round-off.
        let y = self.forward_matrix(m)?;
        let mut c = self.forward_matrix(&y.transpose())?;
        let n = self.n;
        for i in 0..n {
            for j in 0..i {
                let v = 0.5 * (c[(i, j)] + c[(j, i)]);
                c[(i, j)] = v;
                c[(j, i)] = v;
            }
        }
        Ok(c)
    }
}

/// Cholesky factor of a symmetric matrix as a dense lower-triangular matrix.
pub fn cholesky(m: &crate::linalg::DenseSymMatrix) -> Result<DenseMatrix> {
    Ok(m.cholesky()?.factor_matrix())
}

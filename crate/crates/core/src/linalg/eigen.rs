//! Symmetric and symmetric-definite generalized eigenproblems.
//!
//! Householder reduction to tridiagonal form followed by the implicit QL
//! iteration with Wilkinson shifts. When only the extreme eigenpairs are
//! needed (certification), eigenvalues are computed without accumulating
//! rotations and the two witnesses come from inverse iteration on the
//! tridiagonal matrix, back-transformed through the stored reflectors. That
//! keeps the cost at the `4n³/3` of the reduction.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::dense::{axpy, dot, norm2, DenseMatrix, DenseSymMatrix};
use crate::par;

/// Sweeps allowed per unit of dimension before giving up.
pub const MAX_SWEEPS_PER_DIM: usize = 30;

/// Full eigendecomposition: ascending values, eigenvectors as matrix columns.
#[derive(Debug, Clone)]
pub struct SymEigen {
    pub values: Vec<f64>,
    pub vectors: DenseMatrix,
}

impl SymEigen {
    pub fn vector(&self, k: usize) -> Vec<f64> {
        self.vectors.column(k)
    }
}

/// All eigenvalues (ascending) together with eigenvectors for the smallest and largest.
#[derive(Debug, Clone)]
pub struct ExtremeEigen {
    pub values: Vec<f64>,
    pub min_vector: Vec<f64>,
    pub max_vector: Vec<f64>,
}

impl ExtremeEigen {
    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }
}

/// Householder reflector `I − beta·v·vᵀ` acting on trailing coordinates `offset..n`.
#[derive(Debug, Clone)]
struct Reflector {
    offset: usize,
    v: Vec<f64>,
    beta: f64,
}

impl Reflector {
    fn apply(&self, x: &mut [f64]) {
        let tail = &mut x[self.offset..];
        let s = self.beta * dot(&self.v, tail);
        if s != 0.0 {
            axpy(-s, &self.v, tail);
        }
    }
}

/// `Qᵀ·M·Q = T` with `T` tridiagonal; `Q` is the product of the reflectors.
#[derive(Debug, Clone)]
struct Tridiagonal {
    diag: Vec<f64>,
    /// `off[i] = T[i][i+1]`; the last slot is zero.
    off: Vec<f64>,
    reflectors: Vec<Reflector>,
}

impl Tridiagonal {
    fn reduce(m: &DenseMatrix) -> Tridiagonal {
        let n = m.rows();
        let mut a = m.clone();
        let mut diag = vec![0.0; n];
        let mut off = vec![0.0; n];
        let mut reflectors = Vec::with_capacity(n.saturating_sub(2));

        for k in 0..n.saturating_sub(2) {
            let lo = k + 1;
            let mut v: Vec<f64> = a.row(k)[lo..].to_vec();
            let tail_norm = norm2(&v[1..]);
            diag[k] = a[(k, k)];
            if tail_norm == 0.0 {
                off[k] = v[0];
                continue;
            }
            let x0 = v[0];
            let alpha = -x0.signum() * x0.hypot(tail_norm);
            let alpha = if alpha == 0.0 { -tail_norm } else { alpha };
            v[0] -= alpha;
            let beta = 2.0 / dot(&v, &v);
            off[k] = alpha;

            // p = beta·A22·v, w = p − (beta/2)(vᵀp)·v, A22 ← A22 − v·wᵀ − w·vᵀ
            let p: Vec<f64> = {
                let a_ref = &a;
                let v_ref = &v;
                par::map_range(n - lo, move |i| beta * dot(&a_ref.row(lo + i)[lo..], v_ref))
            };
            let kappa = 0.5 * beta * dot(&v, &p);
            let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
            {
                let trailing = &mut a.as_mut_slice()[lo * n..];
                let (v_ref, w_ref) = (&v, &w);
                par::for_each_chunk_mut(trailing, n, move |i, row| {
                    let tail = &mut row[lo..];
                    axpy(-v_ref[i], w_ref, tail);
                    axpy(-w_ref[i], v_ref, tail);
                });
            }
            reflectors.push(Reflector { offset: lo, v, beta });
        }
        if n >= 2 {
            diag[n - 2] = a[(n - 2, n - 2)];
            off[n - 2] = a[(n - 1, n - 2)];
        }
        if n >= 1 {
            diag[n - 1] = a[(n - 1, n - 1)];
        }
        Tridiagonal { diag, off, reflectors }
    }

    /// `x ← Q·x`.
    fn back_transform(&self, x: &mut [f64]) {
        for r in self.reflectors.iter().rev() {
            r.apply(x);
        }
    }
}

/// Implicit QL with Wilkinson shifts on `(d, e)`; `e[i]` couples `i` and `i+1`.
///
/// When `rows` is given, row `i` holds the coordinates of the current `i`-th
/// Ritz vector and receives every rotation.
fn tridiagonal_ql(d: &mut [f64], e: &mut [f64], mut rows: Option<&mut DenseMatrix>) -> Result<()> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    e[n - 1] = 0.0;
    let budget = MAX_SWEEPS_PER_DIM * n;
    let mut iterations = 0usize;
    for l in 0..n {
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iterations += 1;
            if iterations > budget {
                return Err(Error::ConvergenceFailure { iterations: budget });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut deflated = false;
            let mut i = m;
            while i > l {
                i -= 1;
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    deflated = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = rows.as_deref_mut() {
                    rotate_rows(z, i, s, c);
                }
            }
            if deflated {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok(())
}

fn rotate_rows(z: &mut DenseMatrix, i: usize, s: f64, c: f64) {
    let n = z.cols();
    let data = z.as_mut_slice();
    let (head, tail) = data.split_at_mut((i + 1) * n);
    let zi = &mut head[i * n..];
    let zi1 = &mut tail[..n];
    for (a, b) in zi.iter_mut().zip(zi1.iter_mut()) {
        let f = *b;
        *b = s * *a + c * f;
        *a = c * *a - s * f;
    }
}

fn check_square(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(dim_mismatch("square matrix", format!("{}x{}", m.rows(), m.cols())));
    }
    Ok(())
}

/// Ascending eigenvalues of a symmetric matrix.
pub fn sym_eigvals(m: &DenseSymMatrix) -> Result<Vec<f64>> {
    eigvals_dense(m.as_matrix())
}

fn eigvals_dense(m: &DenseMatrix) -> Result<Vec<f64>> {
    check_square(m)?;
    let t = Tridiagonal::reduce(m);
    let (mut d, mut e) = (t.diag, t.off);
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    Ok(d)
}

/// Ascending eigenvalues and orthonormal eigenvectors (columns).
pub fn sym_eig(m: &DenseSymMatrix) -> Result<SymEigen> {
    eig_dense(m.as_matrix())
}

fn eig_dense(m: &DenseMatrix) -> Result<SymEigen> {
    check_square(m)?;
    let n = m.rows();
    let t = Tridiagonal::reduce(m);
    let (mut d, mut e) = (t.diag.clone(), t.off.clone());
    let mut rows = DenseMatrix::identity(n);
    tridiagonal_ql(&mut d, &mut e, Some(&mut rows))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let values: Vec<f64> = order.iter().map(|&k| d[k]).collect();
    let vecs: Vec<Vec<f64>> = par::map_slice(&order, |&k| {
        let mut x = rows.row(k).to_vec();
        t.back_transform(&mut x);
        x
    });
    let vectors = DenseMatrix::from_fn(n, n, |i, j| vecs[j][i]);
    Ok(SymEigen { values, vectors })
}

/// Ascending eigenvalues plus eigenvectors for the two extremes.
pub fn sym_eig_extremes(m: &DenseSymMatrix) -> Result<ExtremeEigen> {
    extremes_dense(m.as_matrix())
}

fn extremes_dense(m: &DenseMatrix) -> Result<ExtremeEigen> {
    check_square(m)?;
    if m.rows() == 0 {
        return Err(dim_mismatch("non-empty matrix", "0x0"));
    }
    let t = Tridiagonal::reduce(m);
    let (mut d, mut e) = (t.diag.clone(), t.off.clone());
    tridiagonal_ql(&mut d, &mut e, None)?;
    d.sort_by(f64::total_cmp);
    let scale = d.iter().fold(0.0f64, |s, v| s.max(v.abs())).max(f64::MIN_POSITIVE);

    let witness = |lambda: f64| {
        let mut y = tridiagonal_inverse_iteration(&t.diag, &t.off, lambda, scale);
        t.back_transform(&mut y);
        let nrm = norm2(&y);
        y.iter_mut().for_each(|v| *v /= nrm);
        y
    };
    let (lo, hi) = (d[0], d[d.len() - 1]);
    let (min_vector, max_vector) = par::join(|| witness(lo), || witness(hi));
    let mut out = ExtremeEigen {
        values: d,
        min_vector,
        max_vector,
    };

    // inverse iteration can stall inside a loose cluster; fall back to the full solve
    let tol = 1e-10 * scale;
    let bad = |x: &[f64], lambda: f64| eigen_residual(m, x, lambda) > tol;
    if bad(&out.min_vector, lo) || bad(&out.max_vector, hi) {
        let full = eig_dense(m)?;
        out.min_vector = full.vector(0);
        out.max_vector = full.vector(m.rows() - 1);
    }
    Ok(out)
}

fn eigen_residual(m: &DenseMatrix, x: &[f64], lambda: f64) -> f64 {
    let mx = m.matvec(x).expect("square");
    mx.iter()
        .zip(x)
        .map(|(a, b)| (a - lambda * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// Eigenvector of the tridiagonal `(d, e)` for the eigenvalue `lambda`.
fn tridiagonal_inverse_iteration(d: &[f64], e: &[f64], lambda: f64, scale: f64) -> Vec<f64> {
    let n = d.len();
    if n == 1 {
        return vec![1.0];
    }
    let tiny = f64::EPSILON * scale;
    // LU with partial pivoting of T − λI (LAPACK gttrf layout)
    let mut dl: Vec<f64> = e[..n - 1].to_vec();
    let mut dd: Vec<f64> = d.iter().map(|v| v - lambda).collect();
    let mut du: Vec<f64> = e[..n - 1].to_vec();
    let mut du2 = vec![0.0; n.saturating_sub(2)];
    let mut swapped = vec![false; n - 1];
    for i in 0..n - 1 {
        if dd[i].abs() >= dl[i].abs() {
            if dd[i] == 0.0 {
                dd[i] = tiny;
            }
            let fact = dl[i] / dd[i];
            dl[i] = fact;
            dd[i + 1] -= fact * du[i];
        } else {
            let fact = dd[i] / dl[i];
            dd[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = dd[i + 1];
            dd[i + 1] = temp - fact * dd[i + 1];
            if i + 2 < n {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swapped[i] = true;
        }
    }
    if dd[n - 1] == 0.0 {
        dd[n - 1] = tiny;
    }
    for v in dd.iter_mut() {
        if v.abs() < tiny {
            *v = tiny.copysign(*v);
        }
    }

    let solve = |b: &mut [f64]| {
        for i in 0..n - 1 {
            if swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - dl[i] * b[i];
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[n - 1] /= dd[n - 1];
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / dd[n - 2];
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / dd[i];
        }
    };

    // deterministic start with no symmetry that could hide the eigenvector
    let mut x: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.7548776662 + 0.3).sin())
        .collect();
    for _ in 0..4 {
        solve(&mut x);
        let nrm = norm2(&x);
        if nrm == 0.0 || !nrm.is_finite() {
            break;
        }
        x.iter_mut().for_each(|v| *v /= nrm);
    }
    x
}

/// Ascending generalized eigenvalues of `m·x = λ·w·x` with `w`-orthonormal eigenvectors.
pub fn gen_sym_eig(m: &DenseSymMatrix, w: &DenseSymMatrix) -> Result<SymEigen> {
    check_pencil(m, w)?;
    let chol = w.cholesky()?;
    let c = chol.congruence_inverse(m.as_matrix())?;
    let eig = eig_dense(&c)?;
    let vectors = chol.backward_matrix(&eig.vectors)?;
    Ok(SymEigen {
        values: eig.values,
        vectors,
    })
}

/// Generalized eigenvalues only.
pub fn gen_sym_eigvals(m: &DenseSymMatrix, w: &DenseSymMatrix) -> Result<Vec<f64>> {
    check_pencil(m, w)?;
    let chol = w.cholesky()?;
    eigvals_dense(&chol.congruence_inverse(m.as_matrix())?)
}

/// Generalized spectrum with `w`-normalized witnesses for the two extremes.
pub fn gen_sym_eig_extremes(m: &DenseSymMatrix, w: &DenseSymMatrix) -> Result<ExtremeEigen> {
    check_pencil(m, w)?;
    let chol = w.cholesky()?;
    let c = chol.congruence_inverse(m.as_matrix())?;
    let mut ext = extremes_dense(&c)?;
    chol.backward_in_place(&mut ext.min_vector);
    chol.backward_in_place(&mut ext.max_vector);
    Ok(ext)
}

fn check_pencil(m: &DenseSymMatrix, w: &DenseSymMatrix) -> Result<()> {
    if m.dim() != w.dim() {
        return Err(dim_mismatch(format!("pencil of dim {}", m.dim()), w.dim()));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize) -> DenseSymMatrix {
        DenseSymMatrix::new(DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        }))
        .unwrap()
    }

    fn residual_ok(m: &DenseSymMatrix, eig: &SymEigen, tol: f64) {
        let scale = eig.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
        for (k, &lambda) in eig.values.iter().enumerate() {
            let x = eig.vector(k);
            assert!(eigen_residual(m.as_matrix(), &x, lambda) <= tol * scale.max(1.0));
        }
    }

    #[test]
    fn identity_and_diagonal() {
        let eig = sym_eig(&DenseSymMatrix::identity(3)).unwrap();
        assert_eq!(eig.values, vec![1.0, 1.0, 1.0]);

        let d = DenseSymMatrix::from_diagonal(&[3.0, 1.0, 2.0]).unwrap();
        let eig = sym_eig(&d).unwrap();
        assert_eq!(eig.values, vec![1.0, 2.0, 3.0]);
        residual_ok(&d, &eig, 1e-14);
    }

    #[test]
    fn laplacian_closed_form() {
        let m = tridiag(3);
        let eig = sym_eig(&m).unwrap();
        let expected = [2.0 - 2f64.sqrt(), 2.0, 2.0 + 2f64.sqrt()];
        for (a, b) in eig.values.iter().zip(expected) {
            assert!((a - b).abs() < 1e-14, "{a} vs {b}");
        }
        residual_ok(&m, &eig, 1e-12);

        // larger case against 2 − 2cos(kπ/(n+1))
        let n = 40;
        let vals = sym_eigvals(&tridiag(n)).unwrap();
        for (k, v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
    }

    #[test]
    fn eigenvectors_orthonormal() {
        let m = DenseSymMatrix::new(DenseMatrix::from_fn(12, 12, |i, j| {
            1.0 / (1.0 + i as f64 + j as f64) + if i == j { 1.0 } else { 0.0 }
        }))
        .unwrap();
        let eig = sym_eig(&m).unwrap();
        let vtv = eig.vectors.transpose().matmul(&eig.vectors).unwrap();
        assert!(vtv.distance_to_identity() < 1e-12);
        residual_ok(&m, &eig, 1e-12);
    }

    #[test]
    fn extremes_match_full_solve() {
        let n = 30;
        let m = DenseSymMatrix::new(DenseMatrix::from_fn(n, n, |i, j| {
            ((i * 7 + j * 7) % 11) as f64 * 0.1 + if i == j { 3.0 + i as f64 * 0.05 } else { 0.0 }
        }))
        .unwrap();
        let full = sym_eig(&m).unwrap();
        let ext = sym_eig_extremes(&m).unwrap();
        for (a, b) in full.values.iter().zip(&ext.values) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(eigen_residual(m.as_matrix(), &ext.min_vector, ext.min()) < 1e-11);
        assert!(eigen_residual(m.as_matrix(), &ext.max_vector, ext.max()) < 1e-11);
    }

    #[test]
    fn extremes_with_repeated_eigenvalue() {
        // λ = 1 has multiplicity 3: any vector in the eigenspace is a valid witness
        let m = DenseSymMatrix::from_diagonal(&[1.0, 5.0, 1.0, 1.0, 2.0]).unwrap();
        let ext = sym_eig_extremes(&m).unwrap();
        assert_eq!(ext.min(), 1.0);
        assert!(eigen_residual(m.as_matrix(), &ext.min_vector, 1.0) < 1e-14);
        assert!(eigen_residual(m.as_matrix(), &ext.max_vector, 5.0) < 1e-14);
    }

    #[test]
    fn generalized_diagonal_ratio() {
        let m = DenseSymMatrix::from_diagonal(&[2.0, 6.0]).unwrap();
        let w = DenseSymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let eig = gen_sym_eig(&m, &w).unwrap();
        assert!((eig.values[0] - 2.0).abs() < 1e-15);
        assert!((eig.values[1] - 3.0).abs() < 1e-15);
    }

    #[test]
    fn generalized_with_identity_weight_matches_standard() {
        let m = tridiag(6);
        let a = sym_eig(&m).unwrap();
        let b = gen_sym_eig(&m, &DenseSymMatrix::identity(6)).unwrap();
        for (x, y) in a.values.iter().zip(&b.values) {
            assert!((x - y).abs() <= 1e-10);
        }
    }

    #[test]
    fn generalized_indefinite_weight_rejected() {
        let m = tridiag(2);
        let w = DenseSymMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(gen_sym_eig(&m, &w), Err(Error::NotPositiveDefinite { .. })));
        assert!(matches!(
            gen_sym_eig(&m, &DenseSymMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}

use crate::error::{dim_mismatch, Result};
use crate::linalg::dense::{axpy, dot, norm2, DenseMatrix};

/// Orthonormal basis of the orthogonal complement of the column space of `m` (n×k, k ≤ n).
///
/// Householder QR `m = Q·[U; 0]`; the trailing `n − k` columns of `Q` span the
/// complement. With `m = Rᵀ` this is a basis of `Ker(R)`. Columns of the result
/// are the basis vectors.
pub fn orthonormal_completion(m: &DenseMatrix) -> Result<DenseMatrix> {
    let (n, k) = m.shape();
    if k > n {
        return Err(dim_mismatch(format!("at most {n} columns"), k));
    }
    // reflectors stored column-wise: work on the transpose so each column is contiguous
    let mut cols = m.transpose();
    let mut reflectors: Vec<(usize, Vec<f64>, f64)> = Vec::with_capacity(k);
    for j in 0..k {
        let x = cols.row(j)[j..].to_vec();
        let nrm = norm2(&x);
        if nrm == 0.0 {
            continue;
        }
        let alpha = if x[0] >= 0.0 { -nrm } else { nrm };
        let mut v = x;
        v[0] -= alpha;
        let beta = 2.0 / dot(&v, &v);
        for c in j..k {
            let start = c * n + j;
            let col = &mut cols.as_mut_slice()[start..start + (n - j)];
            let s = beta * dot(&v, col);
            axpy(-s, &v, col);
        }
        reflectors.push((j, v, beta));
    }
    let mut basis = DenseMatrix::zeros(n - k, n);
    for (b, col) in (k..n).enumerate() {
        let row = &mut basis.as_mut_slice()[b * n..(b + 1) * n];
        row[col] = 1.0;
        for (off, v, beta) in reflectors.iter().rev() {
            let tail = &mut row[*off..];
            let s = beta * dot(v, tail);
            axpy(-s, v, tail);
        }
    }
    Ok(basis.transpose())
}

/// Power-iteration estimate of the spectral radius of a symmetric positive operator.
pub fn power_norm_estimate(dim: usize, iterations: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> f64 {
    if dim == 0 {
        return 0.0;
    }
    let mut x: Vec<f64> = (0..dim).map(|i| 1.0 + 0.25 * ((i as f64) * 1.3).cos()).collect();
    let nrm = norm2(&x);
    x.iter_mut().for_each(|v| *v /= nrm);
    let mut estimate = 0.0;
    for _ in 0..iterations {
        let y = apply(&x);
        let nrm = norm2(&y);
        if nrm == 0.0 {
            return 0.0;
        }
        estimate = nrm;
        x = y.into_iter().map(|v| v / nrm).collect();
    }
    estimate
}

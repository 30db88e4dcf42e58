//! Moore-Penrose and weighted pseudo-inverses of surjective maps.
//!
//! For a surjective `R: V → H` the pseudo-inverse picks, for every `y ∈ H`, the
//! preimage of minimal norm. With a weight `B` (SPD on `V`) the norm is
//! `‖x‖_B = √(xᵀBx)` and the closed form is
//!
//! ```text
//! R_B† = B⁻¹·Rᵀ·(R·B⁻¹·Rᵀ)⁻¹
//! ```
//!
//! which reduces to `Rᵀ·(R·Rᵀ)⁻¹` for `B = I`. `R_B†·R` is then the
//! `B`-orthogonal projector onto `Ker(R)^⊥_B`, and
//! `(R·B⁻¹·Rᵀ)·(R_B†ᵀ·B·R_B†) = I`.

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{orthonormal_completion, power_norm_estimate, sym_eigvals, DenseMatrix, DenseSymMatrix};

/// Smallest accepted `σ_min/σ_max` for a map to count as surjective.
pub const SURJECTIVITY_TOL: f64 = 1e-10;

/// Power iterations used for the `‖B‖·‖B⁻¹‖` estimate.
pub const COND_ESTIMATE_ITERATIONS: usize = 20;

/// A full-row-rank map `R: V → H` (`rows = dim H ≤ cols = dim V`).
#[derive(Debug, Clone)]
pub struct SurjectiveMap {
    map: DenseMatrix,
    /// `R·Rᵀ` with its Cholesky factor cached: the rank witness.
    gram: DenseSymMatrix,
    sigma_ratio: f64,
}

impl SurjectiveMap {
    pub fn new(map: DenseMatrix) -> Result<Self> {
        if map.rows() > map.cols() || map.rows() == 0 {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        let gram = DenseSymMatrix::symmetrized(map.matmul(&map.transpose())?);
        if gram.cholesky().is_err() {
            return Err(Error::RankDeficient { ratio: 0.0 });
        }
        // σ_i(R)² are the eigenvalues of R·Rᵀ
        let eig = sym_eigvals(&gram)?;
        let (lo, hi) = (eig[0], eig[eig.len() - 1]);
        let sigma_ratio = if lo > 0.0 { (lo / hi).sqrt() } else { 0.0 };
        if sigma_ratio < SURJECTIVITY_TOL {
            return Err(Error::RankDeficient { ratio: sigma_ratio });
        }
        Ok(Self { map, gram, sigma_ratio })
    }

    pub fn matrix(&self) -> &DenseMatrix {
        &self.map
    }

    /// `Rᵀ`, the adjoint for the Euclidean inner products.
    pub fn adjoint(&self) -> DenseMatrix {
        self.map.transpose()
    }

    /// `dim H`.
    pub fn range_dim(&self) -> usize {
        self.map.rows()
    }

    /// `dim V`.
    pub fn domain_dim(&self) -> usize {
        self.map.cols()
    }

    pub fn sigma_ratio(&self) -> f64 {
        self.sigma_ratio
    }

    /// `R·Rᵀ`.
    pub fn gram(&self) -> &DenseSymMatrix {
        &self.gram
    }

    pub fn apply(&self, v: &[f64]) -> Result<Vec<f64>> {
        self.map.matvec(v)
    }

    pub fn apply_adjoint(&self, u: &[f64]) -> Result<Vec<f64>> {
        self.map.matvec_transpose(u)
    }

    /// Orthonormal basis of `Ker(R)` as columns (`dim V − dim H` of them).
    pub fn kernel_basis(&self) -> Result<DenseMatrix> {
        orthonormal_completion(&self.map.transpose())
    }
}

/// `R†` or `R_B†` together with the data it was built from.
#[derive(Debug, Clone)]
pub struct PseudoInverseOperator {
    source: SurjectiveMap,
    weight: Option<DenseSymMatrix>,
    dagger: DenseMatrix,
    /// `R·W⁻¹·Rᵀ` (W = weight or identity).
    schur: DenseSymMatrix,
}

/// Violations of the two defining properties of a pseudo-inverse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PseudoInverseResiduals {
    /// `‖R·R† − I‖_max`.
    pub right_inverse: f64,
    /// `‖(I − R†R)ᵀ·W·R†‖_max`: columns of `R†` are `W`-orthogonal to `Ker(R)`.
    pub kernel_orthogonality: f64,
}

/// Violations of the projector identities for `P = R†·R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectorResiduals {
    /// `‖P·P − P‖_max`.
    pub idempotency: f64,
    /// `‖W·P − Pᵀ·W‖_max`.
    pub self_adjointness: f64,
}

impl PseudoInverseOperator {
    pub fn source(&self) -> &SurjectiveMap {
        &self.source
    }

    pub fn weight(&self) -> Option<&DenseSymMatrix> {
        self.weight.as_ref()
    }

    /// The `dim V × dim H` matrix of the pseudo-inverse.
    pub fn dagger(&self) -> &DenseMatrix {
        &self.dagger
    }

    /// `R·W⁻¹·Rᵀ`, the operator inverted in the closed form.
    pub fn schur_complement(&self) -> &DenseSymMatrix {
        &self.schur
    }

    pub fn apply(&self, y: &[f64]) -> Result<Vec<f64>> {
        self.dagger.matvec(y)
    }

    /// `W·x`, with `W = I` when unweighted.
    pub fn weight_apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match &self.weight {
            Some(w) => w.matvec(x),
            None => Ok(x.to_vec()),
        }
    }

    /// `‖x‖²_W`.
    pub fn weight_norm_sq(&self, x: &[f64]) -> Result<f64> {
        Ok(crate::linalg::dot(&self.weight_apply(x)?, x))
    }

    fn weight_times(&self, m: &DenseMatrix) -> Result<DenseMatrix> {
        match &self.weight {
            Some(w) => w.as_matrix().matmul(m),
            None => Ok(m.clone()),
        }
    }

    /// `R†ᵀ·W·R†`.
    pub fn weighted_gram(&self) -> Result<DenseSymMatrix> {
        let wd = self.weight_times(&self.dagger)?;
        Ok(DenseSymMatrix::symmetrized(self.dagger.transpose().matmul(&wd)?))
    }

    pub fn residuals(&self) -> Result<PseudoInverseResiduals> {
        let r = self.source.matrix();
        let right_inverse = r.matmul(&self.dagger)?.distance_to_identity();
        // (I − R†R)ᵀ·W·R† = W·R† − Rᵀ·(R†ᵀ·W·R†)
        let wd = self.weight_times(&self.dagger)?;
        let inner = self.dagger.transpose().matmul(&wd)?;
        let kernel_orthogonality = wd.sub(&r.transpose().matmul(&inner)?)?.max_abs();
        Ok(PseudoInverseResiduals {
            right_inverse,
            kernel_orthogonality,
        })
    }

    /// Cholesky of `R†ᵀ·R†` succeeds iff `R†` has full column rank (is injective).
    pub fn is_injective(&self) -> bool {
        DenseSymMatrix::symmetrized(self.dagger.transpose().matmul(&self.dagger).expect("shapes agree")).is_spd()
    }

    pub fn projector_residuals(&self) -> Result<ProjectorResiduals> {
        let p = projector(self)?;
        let idempotency = p.matmul(&p)?.max_abs_diff(&p);
        let wp = self.weight_times(&p)?;
        let self_adjointness = wp.max_abs_diff(&wp.transpose());
        Ok(ProjectorResiduals {
            idempotency,
            self_adjointness,
        })
    }
}

/// Moore-Penrose pseudo-inverse `R† = Rᵀ·(R·Rᵀ)⁻¹`.
pub fn pseudo_inverse(r: &SurjectiveMap) -> Result<PseudoInverseOperator> {
    let chol = r.gram().cholesky().map_err(|_| Error::RankDeficient { ratio: 0.0 })?;
    let dagger = chol.solve_matrix(r.matrix())?.transpose();
    Ok(PseudoInverseOperator {
        source: r.clone(),
        weight: None,
        dagger,
        schur: r.gram().clone(),
    })
}

/// Weighted pseudo-inverse `R_B† = B⁻¹·Rᵀ·(R·B⁻¹·Rᵀ)⁻¹`.
pub fn weighted_pseudo_inverse(r: &SurjectiveMap, b: &DenseSymMatrix) -> Result<PseudoInverseOperator> {
    if b.dim() != r.domain_dim() {
        return Err(dim_mismatch(format!("weight of dim {}", r.domain_dim()), b.dim()));
    }
    let b_inv_rt = b.cholesky()?.solve_matrix(&r.adjoint())?;
    let schur = DenseSymMatrix::symmetrized(r.matrix().matmul(&b_inv_rt)?);
    let chol = schur.cholesky().map_err(|_| Error::RankDeficient { ratio: 0.0 })?;
    let dagger = chol.solve_matrix(&b_inv_rt.transpose())?.transpose();
    Ok(PseudoInverseOperator {
        source: r.clone(),
        weight: Some(b.clone()),
        dagger,
        schur,
    })
}

/// `P = R†·R`, the `W`-orthogonal projector onto `Ker(R)^⊥_W`.
pub fn projector(p: &PseudoInverseOperator) -> Result<DenseMatrix> {
    p.dagger.matmul(p.source.matrix())
}

/// Outcome of the inverse-formula check `(R·B⁻¹·Rᵀ)·(R_B†ᵀ·B·R_B†) = I`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurIdentityCheck {
    pub residual: f64,
    /// Power-iteration estimate of `‖B‖₂·‖B⁻¹‖₂`.
    pub cond_estimate: f64,
}

impl SchurIdentityCheck {
    pub fn passed(&self) -> bool {
        self.residual <= 1e-8 * self.cond_estimate.max(1.0)
    }
}

pub fn schur_identity_check(r: &SurjectiveMap, b: &DenseSymMatrix) -> Result<SchurIdentityCheck> {
    let p = weighted_pseudo_inverse(r, b)?;
    let s = p.weighted_gram()?;
    let residual = p
        .schur_complement()
        .as_matrix()
        .matmul(s.as_matrix())?
        .distance_to_identity();
    Ok(SchurIdentityCheck {
        residual,
        cond_estimate: condition_estimate(b)?,
    })
}

/// `‖B‖₂·‖B⁻¹‖₂` by power iteration on `B` and on `B⁻¹`.
pub fn condition_estimate(b: &DenseSymMatrix) -> Result<f64> {
    let chol = b.cholesky()?;
    let n = b.dim();
    let hi = power_norm_estimate(n, COND_ESTIMATE_ITERATIONS, |x| b.matvec(x).expect("dims"));
    let inv = power_norm_estimate(n, COND_ESTIMATE_ITERATIONS, |x| chol.solve(x).expect("dims"));
    Ok(hi * inv)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(rows: &[&[f64]]) -> SurjectiveMap {
        SurjectiveMap::new(DenseMatrix::from_rows(rows).unwrap()).unwrap()
    }

    fn assert_close(a: &DenseMatrix, b: &DenseMatrix, tol: f64) {
        assert_eq!(a.shape(), b.shape());
        assert!(a.max_abs_diff(b) <= tol, "{a:?} vs {b:?}");
    }

    #[test]
    fn identity_map() {
        let r = SurjectiveMap::new(DenseMatrix::identity(3)).unwrap();
        let p = pseudo_inverse(&r).unwrap();
        assert_close(p.dagger(), &DenseMatrix::identity(3), 0.0);
        assert_close(&projector(&p).unwrap(), &DenseMatrix::identity(3), 0.0);
    }

    #[test]
    fn orthonormal_rows_give_transpose() {
        let r = map(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let p = pseudo_inverse(&r).unwrap();
        assert_close(p.dagger(), &r.adjoint(), 0.0);
    }

    #[test]
    fn sum_map_minimum_norm() {
        // minimize x1² + x2² s.t. x1 + x2 = y  →  x = (y/2, y/2)
        let r = map(&[&[1.0, 1.0]]);
        let p = pseudo_inverse(&r).unwrap();
        assert_close(p.dagger(), &DenseMatrix::from_rows(&[[0.5], [0.5]]).unwrap(), 1e-15);
        let proj = projector(&p).unwrap();
        assert_close(
            &proj,
            &DenseMatrix::from_rows(&[[0.5, 0.5], [0.5, 0.5]]).unwrap(),
            1e-15,
        );
        let pr = p.projector_residuals().unwrap();
        assert!(pr.idempotency < 1e-15 && pr.self_adjointness < 1e-15);
    }

    #[test]
    fn weighted_sum_map() {
        // minimize x1² + 2x2² s.t. x1 + x2 = 1  →  (2/3, 1/3) by Lagrange multipliers
        let r = map(&[&[1.0, 1.0]]);
        let b = DenseSymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let p = weighted_pseudo_inverse(&r, &b).unwrap();
        assert_close(
            p.dagger(),
            &DenseMatrix::from_rows(&[[2.0 / 3.0], [1.0 / 3.0]]).unwrap(),
            1e-15,
        );

        let proj = projector(&p).unwrap();
        let expected = DenseMatrix::from_rows(&[[2.0 / 3.0, 2.0 / 3.0], [1.0 / 3.0, 1.0 / 3.0]]).unwrap();
        assert_close(&proj, &expected, 1e-15);
        // B·P = Pᵀ·B
        let bp = b.as_matrix().matmul(&proj).unwrap();
        assert_close(&bp, &proj.transpose().matmul(b.as_matrix()).unwrap(), 1e-15);
    }

    #[test]
    fn weighted_kernel_direction_untouched() {
        let r = map(&[&[1.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]);
        let b = DenseSymMatrix::from_diagonal(&[1.0, 2.0, 3.0]).unwrap();
        let p = weighted_pseudo_inverse(&r, &b).unwrap();
        assert_close(
            p.dagger(),
            &DenseMatrix::from_rows(&[[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]).unwrap(),
            1e-15,
        );
        let res = p.residuals().unwrap();
        assert!(res.right_inverse < 1e-15 && res.kernel_orthogonality < 1e-15);
    }

    #[test]
    fn identity_weight_reduces_to_moore_penrose() {
        let r = map(&[&[1.0, 2.0, 0.0, -1.0], &[0.5, 0.0, 1.0, 1.0]]);
        let a = pseudo_inverse(&r).unwrap();
        let b = weighted_pseudo_inverse(&r, &DenseSymMatrix::identity(4)).unwrap();
        assert_close(a.dagger(), b.dagger(), 1e-10);
        assert!(a.is_injective());
    }

    #[test]
    fn schur_identity_scalar_case() {
        // R B⁻¹ Rᵀ = 3/2 and R_B†ᵀ B R_B† = 2/3
        let r = map(&[&[1.0, 1.0]]);
        let b = DenseSymMatrix::from_diagonal(&[1.0, 2.0]).unwrap();
        let p = weighted_pseudo_inverse(&r, &b).unwrap();
        assert!((p.schur_complement()[(0, 0)] - 1.5).abs() < 1e-15);
        assert!((p.weighted_gram().unwrap()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);
        let check = schur_identity_check(&r, &b).unwrap();
        assert!(check.residual <= 1e-14);
        assert!(check.passed());

        let id = SurjectiveMap::new(DenseMatrix::identity(3)).unwrap();
        let check = schur_identity_check(&id, &DenseSymMatrix::identity(3)).unwrap();
        assert!(check.residual <= 1e-14);
        assert!((check.cond_estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_surjective() {
        let dup = DenseMatrix::from_rows(&[[1.0, 1.0, 0.0], [2.0, 2.0, 0.0]]).unwrap();
        assert!(matches!(SurjectiveMap::new(dup), Err(Error::RankDeficient { .. })));
        let tall = DenseMatrix::from_rows(&[[1.0], [1.0]]).unwrap();
        assert!(matches!(SurjectiveMap::new(tall), Err(Error::RankDeficient { .. })));
        let nearly = DenseMatrix::from_rows(&[[1.0, 0.0], [1.0, 1e-12]]).unwrap();
        assert!(matches!(SurjectiveMap::new(nearly), Err(Error::RankDeficient { .. })));
    }

    #[test]
    fn weight_errors() {
        let r = map(&[&[1.0, 1.0]]);
        let indefinite = DenseSymMatrix::from_rows(&[[1.0, 2.0], [2.0, 1.0]]).unwrap();
        assert!(matches!(
            weighted_pseudo_inverse(&r, &indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            weighted_pseudo_inverse(&r, &DenseSymMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn kernel_basis_dimension() {
        let r = map(&[&[1.0, 1.0, 0.0, 0.0], &[0.0, 1.0, 1.0, 0.0]]);
        let k = r.kernel_basis().unwrap();
        assert_eq!(k.cols(), 2);
        assert!(r.matrix().matmul(&k).unwrap().max_abs() < 1e-14);
    }
}

//! Spectral certificates `(c−, c+)` for a fictitious-space triple `(R, A, B)`.
//!
//! With `M⁻¹ = R·B⁻¹·Rᵀ` and `S = R_B†ᵀ·B·R_B†` the optimal constants in
//!
//! ```text
//! c−·(u,u)_A ≤ (M⁻¹A·u, u)_A ≤ c+·(u,u)_A
//! ```
//!
//! are computed three ways: as the extremes of the pencil `(A, S)`, of the
//! pencil `(A·M⁻¹·A, A)`, and of the pencil `(A, (R·B⁻¹·Rᵀ)⁻¹)`. The three
//! must agree. Sampling checks confirm the stable-decomposition and
//! boundedness inequalities and the Rayleigh-quotient characterization.

use std::fmt;
use std::sync::OnceLock;

use sha2::{Digest, Sha256};

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{dot, gen_sym_eig_extremes, gen_sym_eigvals, norm2, DenseMatrix, DenseSymMatrix, ExtremeEigen};
use crate::par;
use crate::pseudoinverse::{weighted_pseudo_inverse, PseudoInverseOperator, SurjectiveMap};
use crate::rng::{gaussian_vector, stream_rng};

/// Relative agreement demanded between certification routes.
pub const ROUTE_TOL: f64 = 1e-8;
/// Relaxed agreement once `κ` exceeds [`ILL_CONDITIONED_KAPPA`].
pub const ROUTE_TOL_ILL_CONDITIONED: f64 = 1e-6;
pub const ILL_CONDITIONED_KAPPA: f64 = 1e6;
/// Bound on the `S·(R·B⁻¹·Rᵀ) − I` cross-check performed by [`build_s`].
pub const INVERSE_IDENTITY_TOL: f64 = 1e-8;
/// Bound on the relative eigen-residual of certificate witnesses.
pub const WITNESS_TOL: f64 = 1e-8;
/// Self-adjointness gate of [`minimax_check`].
pub const SELF_ADJOINT_TOL: f64 = 1e-9;

const CONDITION_I_STREAM: u64 = 1;
const CONDITION_II_STREAM: u64 = 2;
const MINIMAX_STREAM: u64 = 3;

/// `(R, A, B)` with `R: V → H` surjective and `A` (on `H`), `B` (on `V`) SPD.
///
/// The weighted pseudo-inverse and `S` are computed on first use and shared by
/// every route that needs them.
#[derive(Debug, Clone)]
pub struct OperatorTriple {
    r: SurjectiveMap,
    a: DenseSymMatrix,
    b: DenseSymMatrix,
    pseudo: OnceLock<Result<PseudoInverseOperator>>,
    s: OnceLock<Result<(DenseSymMatrix, f64)>>,
}

impl OperatorTriple {
    pub fn new(r: SurjectiveMap, a: DenseSymMatrix, b: DenseSymMatrix) -> Result<Self> {
        if r.range_dim() != a.dim() || r.domain_dim() != b.dim() {
            return Err(dim_mismatch(
                format!("A of dim {} and B of dim {}", r.range_dim(), r.domain_dim()),
                format!("A of dim {} and B of dim {}", a.dim(), b.dim()),
            ));
        }
        a.cholesky()?;
        b.cholesky()?;
        Ok(Self {
            r,
            a,
            b,
            pseudo: OnceLock::new(),
            s: OnceLock::new(),
        })
    }

    pub fn r(&self) -> &SurjectiveMap {
        &self.r
    }

    pub fn a(&self) -> &DenseSymMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseSymMatrix {
        &self.b
    }

    /// The same triple with `A` replaced by `t·A`.
    pub fn with_scaled_a(&self, t: f64) -> Result<Self> {
        Self::new(self.r.clone(), self.a.scaled(t), self.b.clone())
    }

    /// The same triple with `B` replaced by `t·B`.
    pub fn with_scaled_b(&self, t: f64) -> Result<Self> {
        Self::new(self.r.clone(), self.a.clone(), self.b.scaled(t))
    }

    /// `R_B†`, computed once.
    pub fn pseudo_inverse(&self) -> Result<&PseudoInverseOperator> {
        self.pseudo
            .get_or_init(|| weighted_pseudo_inverse(&self.r, &self.b))
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `M⁻¹ = R·B⁻¹·Rᵀ`.
    pub fn preconditioner(&self) -> Result<&DenseSymMatrix> {
        Ok(self.pseudo_inverse()?.schur_complement())
    }

    fn s_and_residual(&self) -> Result<&(DenseSymMatrix, f64)> {
        self.s
            .get_or_init(|| {
                let p = self.pseudo_inverse()?;
                let s = p.weighted_gram()?;
                let residual = s
                    .as_matrix()
                    .matmul(p.schur_complement().as_matrix())?
                    .distance_to_identity();
                Ok((s, residual))
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// `‖S·(R·B⁻¹·Rᵀ) − I‖_max` for the cached `S`.
    pub fn inverse_identity_residual(&self) -> Result<f64> {
        Ok(self.s_and_residual()?.1)
    }

    /// SHA-256 over the dimensions and the bit patterns of `R`, `A`, `B`.
    pub fn description_hash(&self) -> String {
        let mut h = Sha256::new();
        h.update(b"operator-triple");
        for dim in [self.r.range_dim(), self.r.domain_dim()] {
            h.update((dim as u64).to_le_bytes());
        }
        for m in [self.r.matrix(), self.a.as_matrix(), self.b.as_matrix()] {
            for v in m.as_slice() {
                h.update(v.to_bits().to_le_bytes());
            }
        }
        hex::encode(h.finalize())
    }
}

/// `S = R_B†ᵀ·B·R_B†`, checked against `S·(R·B⁻¹·Rᵀ) = I`.
pub fn build_s(t: &OperatorTriple) -> Result<DenseSymMatrix> {
    let (s, residual) = t.s_and_residual()?;
    if *residual > INVERSE_IDENTITY_TOL {
        return Err(Error::CertificationFailed {
            route: "inverse identity".into(),
            residual: *residual,
            tolerance: INVERSE_IDENTITY_TOL,
        });
    }
    s.cholesky()?;
    Ok(s.clone())
}

/// How a pair of extreme eigenvalues was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Route {
    /// Pencil `(A, S)` with `S` from the weighted pseudo-inverse.
    Pencil,
    /// Pencil `(A·M⁻¹·A, A)`: the spectrum of `M⁻¹A` in the `A` inner product.
    PreconditionedOperator,
    /// Pencil `(A, M)` with `M` the inverse of the assembled `R·B⁻¹·Rᵀ`.
    InverseMetric,
}

impl Route {
    pub fn key(self) -> &'static str {
        match self {
            Route::Pencil => "pencil",
            Route::PreconditionedOperator => "preconditioned_operator",
            Route::InverseMetric => "inverse_metric",
        }
    }
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

/// Optimal constants with the eigenvectors that attain them.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralCertificate {
    pub c_minus: f64,
    pub c_plus: f64,
    pub kappa: f64,
    /// The route that produced the constants and witnesses.
    pub route: Route,
    /// Relative disagreement of each cross-checking route with `route`.
    pub route_residuals: Vec<(Route, f64)>,
    /// Agreement required of every entry in `route_residuals`.
    pub route_tolerance: f64,
    pub witness_minus: Vec<f64>,
    pub witness_plus: Vec<f64>,
    /// Largest relative eigen-residual of the two witnesses.
    pub witness_residual: f64,
}

impl SpectralCertificate {
    fn from_extremes(route: Route, ext: ExtremeEigen, witness_residual: f64) -> Result<Self> {
        let (c_minus, c_plus) = (ext.min(), ext.max());
        if !(c_minus > 0.0) {
            return Err(Error::NotPositiveDefinite {
                pivot: 0,
                value: c_minus,
            });
        }
        let kappa = c_plus / c_minus;
        Ok(Self {
            c_minus,
            c_plus,
            kappa,
            route,
            route_residuals: Vec::new(),
            route_tolerance: route_tolerance(kappa),
            witness_minus: ext.min_vector,
            witness_plus: ext.max_vector,
            witness_residual,
        })
    }

    /// Largest cross-route disagreement (0 when no other route ran).
    pub fn max_route_residual(&self) -> f64 {
        self.route_residuals.iter().fold(0.0, |m, &(_, r)| m.max(r))
    }

    pub fn routes_agree(&self) -> bool {
        self.route_residuals.iter().all(|&(_, r)| r <= self.route_tolerance)
    }

    /// `Err(CertificationFailed)` naming the first route out of tolerance.
    pub fn check_agreement(&self) -> Result<()> {
        match self
            .route_residuals
            .iter()
            .find(|&&(_, r)| !(r <= self.route_tolerance))
        {
            Some(&(route, residual)) => Err(Error::CertificationFailed {
                route: route.to_string(),
                residual,
                tolerance: self.route_tolerance,
            }),
            None => Ok(()),
        }
    }
}

pub fn route_tolerance(kappa: f64) -> f64 {
    if kappa > ILL_CONDITIONED_KAPPA {
        ROUTE_TOL_ILL_CONDITIONED
    } else {
        ROUTE_TOL
    }
}

/// `max(|c−₁ − c−₂|/c−₁, |c+₁ − c+₂|/c+₁)`.
pub fn relative_disagreement(a: (f64, f64), b: (f64, f64)) -> f64 {
    ((a.0 - b.0).abs() / a.0.abs()).max((a.1 - b.1).abs() / a.1.abs())
}

/// `‖M·x − λ·W·x‖ / (‖M·x‖ + |λ|·‖W·x‖)`.
fn pencil_residual(m: &DenseSymMatrix, w: &DenseSymMatrix, x: &[f64], lambda: f64) -> Result<f64> {
    let mx = m.matvec(x)?;
    let wx = w.matvec(x)?;
    let diff: Vec<f64> = mx.iter().zip(&wx).map(|(a, b)| a - lambda * b).collect();
    let scale = norm2(&mx) + lambda.abs() * norm2(&wx);
    Ok(if scale > 0.0 { norm2(&diff) / scale } else { 0.0 })
}

fn certify_pencil(route: Route, m: &DenseSymMatrix, w: &DenseSymMatrix) -> Result<SpectralCertificate> {
    let ext = gen_sym_eig_extremes(m, w)?;
    let res =
        pencil_residual(m, w, &ext.min_vector, ext.min())?.max(pencil_residual(m, w, &ext.max_vector, ext.max())?);
    SpectralCertificate::from_extremes(route, ext, res)
}

/// Extremes of `A·u = λ·S·u`.
pub fn certify_via_pencil(t: &OperatorTriple) -> Result<SpectralCertificate> {
    let s = build_s(t)?;
    certify_pencil(Route::Pencil, &t.a, &s)
}

/// Extremes of the spectrum of `M⁻¹A`, from the pencil `(A·M⁻¹·A, A)`.
pub fn certify_via_preconditioned_operator(t: &OperatorTriple) -> Result<SpectralCertificate> {
    let m_inv = t.preconditioner()?;
    let a = t.a.as_matrix();
    let ama = DenseSymMatrix::symmetrized(a.matmul(&m_inv.as_matrix().matmul(a)?)?);
    certify_pencil(Route::PreconditionedOperator, &ama, &t.a)
}

/// Extremes of `A·u = λ·M·u` with `M = (R·B⁻¹·Rᵀ)⁻¹` obtained by direct inversion.
pub fn certify_via_inverse_metric(t: &OperatorTriple) -> Result<SpectralCertificate> {
    let metric = t.preconditioner()?.inverse()?;
    certify_pencil(Route::InverseMetric, &t.a, &metric)
}

/// Runs the pencil route and cross-checks it against the other two.
///
/// The returned certificate carries the pencil constants and witnesses; the
/// disagreements are recorded, not enforced (see [`SpectralCertificate::check_agreement`]).
pub fn certify(t: &OperatorTriple) -> Result<SpectralCertificate> {
    // populate the shared caches before forking
    build_s(t)?;
    let (primary, (operator, inverse)) = par::join(
        || certify_via_pencil(t),
        || {
            par::join(
                || certify_via_preconditioned_operator(t),
                || cross_check_inverse_metric(t),
            )
        },
    );
    let mut cert = primary?;
    let operator = operator?;
    let inverse = inverse?;
    let reference = (cert.c_minus, cert.c_plus);
    cert.route_residuals = vec![
        (
            Route::PreconditionedOperator,
            relative_disagreement(reference, (operator.c_minus, operator.c_plus)),
        ),
        (Route::InverseMetric, relative_disagreement(reference, inverse)),
    ];
    cert.route_tolerance = route_tolerance(cert.kappa);
    Ok(cert)
}

/// Eigenvalue-only version of [`certify_via_inverse_metric`].
fn cross_check_inverse_metric(t: &OperatorTriple) -> Result<(f64, f64)> {
    let metric = t.preconditioner()?.inverse()?;
    let ev = gen_sym_eigvals(&t.a, &metric)?;
    Ok((ev[0], ev[ev.len() - 1]))
}

fn check_certificate(t: &OperatorTriple, cert: &SpectralCertificate) -> Result<()> {
    let n = t.a.dim();
    if cert.witness_minus.len() != n || cert.witness_plus.len() != n {
        return Err(dim_mismatch(format!("witnesses of dim {n}"), cert.witness_minus.len()));
    }
    Ok(())
}

/// `max (c−·‖R_B†u‖²_B − (u,u)_A) / (u,u)_A` over `samples` Gaussian `u ∈ H`.
pub fn verify_condition_i(t: &OperatorTriple, cert: &SpectralCertificate, samples: usize, seed: u64) -> Result<f64> {
    check_certificate(t, cert)?;
    let p = t.pseudo_inverse()?;
    let n = t.a.dim();
    let violations = par::map_range(samples, |k| -> Result<f64> {
        let u = gaussian_vector(&mut stream_rng(seed, CONDITION_I_STREAM, k as u64), n);
        let v = p.apply(&u)?;
        let lhs = cert.c_minus * t.b.quad_form(&v)?;
        let energy = t.a.quad_form(&u)?;
        Ok((lhs - energy) / energy)
    });
    max_of(violations)
}

/// `max ((Rv,Rv)_A − c+·(v,v)_B) / (v,v)_B` over `samples` Gaussian `v ∈ V`.
pub fn verify_condition_ii(t: &OperatorTriple, cert: &SpectralCertificate, samples: usize, seed: u64) -> Result<f64> {
    check_certificate(t, cert)?;
    let dim_v = t.b.dim();
    let violations = par::map_range(samples, |k| -> Result<f64> {
        let v = gaussian_vector(&mut stream_rng(seed, CONDITION_II_STREAM, k as u64), dim_v);
        let rv = t.r.apply(&v)?;
        let norm_b = t.b.quad_form(&v)?;
        Ok((t.a.quad_form(&rv)? - cert.c_plus * norm_b) / norm_b)
    });
    max_of(violations)
}

fn max_of(values: Vec<Result<f64>>) -> Result<f64> {
    values.into_iter().try_fold(f64::NEG_INFINITY, |m, v| Ok(m.max(v?)))
}

/// Ratios attained by the certificate witnesses, as relative deviations from the constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tightness {
    /// `|(u,u)_A / ‖R_B†u‖²_B − c−| / c−` at `u = witness_minus`.
    pub condition_i: f64,
    /// `|(Rv,Rv)_A / (v,v)_B − c+| / c+` at `v = R_B†·witness_plus`.
    pub condition_ii: f64,
}

impl Tightness {
    pub fn max(&self) -> f64 {
        self.condition_i.max(self.condition_ii)
    }
}

pub fn tightness(t: &OperatorTriple, cert: &SpectralCertificate) -> Result<Tightness> {
    check_certificate(t, cert)?;
    let p = t.pseudo_inverse()?;
    let u = &cert.witness_minus;
    let ratio_i = t.a.quad_form(u)? / t.b.quad_form(&p.apply(u)?)?;
    let v = p.apply(&cert.witness_plus)?;
    let ratio_ii = t.a.quad_form(&t.r.apply(&v)?)? / t.b.quad_form(&v)?;
    Ok(Tightness {
        condition_i: (ratio_i - cert.c_minus).abs() / cert.c_minus,
        condition_ii: (ratio_ii - cert.c_plus).abs() / cert.c_plus,
    })
}

/// Sampled and exact extremes of the Rayleigh quotient `(W·M·x, x)/(W·x, x)`.
#[derive(Debug, Clone, PartialEq)]
pub struct MinimaxReport {
    pub lambda_min: f64,
    pub lambda_max: f64,
    pub rayleigh_min: f64,
    pub rayleigh_max: f64,
    /// Quotient at the eigenvector of `lambda_min` / `lambda_max`.
    pub witness_min_quotient: f64,
    pub witness_max_quotient: f64,
    /// Allowed excursion of sampled quotients outside `[lambda_min, lambda_max]`.
    pub epsilon: f64,
}

impl MinimaxReport {
    /// How far the sampled quotients leave `[lambda_min, lambda_max]` (≤ 0 when inside).
    pub fn excursion(&self) -> f64 {
        (self.lambda_min - self.rayleigh_min).max(self.rayleigh_max - self.lambda_max)
    }

    /// Largest deviation of a witness quotient from its eigenvalue, relative to `max(1, |λ|)`.
    pub fn witness_gap(&self) -> f64 {
        let rel = |q: f64, l: f64| (q - l).abs() / l.abs().max(1.0);
        rel(self.witness_min_quotient, self.lambda_min).max(rel(self.witness_max_quotient, self.lambda_max))
    }

    pub fn passed(&self) -> bool {
        self.excursion() <= self.epsilon && self.witness_gap() <= 1e-10
    }
}

/// Checks that Rayleigh quotients of `m` in the `w` inner product fill exactly
/// the interval between its extreme eigenvalues.
///
/// `m` need not be symmetric, but `w·m` must be (to [`SELF_ADJOINT_TOL`]
/// relative to `‖w·m‖_max`), otherwise `NotSelfAdjoint`.
pub fn minimax_check(m: &DenseMatrix, w: &DenseSymMatrix, samples: usize, seed: u64) -> Result<MinimaxReport> {
    if m.rows() != w.dim() || m.cols() != w.dim() {
        return Err(dim_mismatch(
            format!("{0}x{0} operator", w.dim()),
            format!("{}x{}", m.rows(), m.cols()),
        ));
    }
    w.cholesky()?;
    let wm = w.as_matrix().matmul(m)?;
    let asymmetry = wm.asymmetry();
    if asymmetry > SELF_ADJOINT_TOL * wm.max_abs().max(f64::MIN_POSITIVE) {
        return Err(Error::NotSelfAdjoint { asymmetry });
    }
    let wm = DenseSymMatrix::symmetrized(wm);
    let ext = gen_sym_eig_extremes(&wm, w)?;
    let quotient = |x: &[f64]| -> Result<f64> { Ok(wm.quad_form(x)? / w.quad_form(x)?) };

    let n = w.dim();
    let sampled = par::map_range(samples, |k| {
        quotient(&gaussian_vector(&mut stream_rng(seed, MINIMAX_STREAM, k as u64), n))
    });
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for q in sampled {
        let q = q?;
        lo = lo.min(q);
        hi = hi.max(q);
    }
    let (lambda_min, lambda_max) = (ext.min(), ext.max());
    Ok(MinimaxReport {
        lambda_min,
        lambda_max,
        rayleigh_min: lo,
        rayleigh_max: hi,
        witness_min_quotient: quotient(&ext.min_vector)?,
        witness_max_quotient: quotient(&ext.max_vector)?,
        epsilon: 1e-9 * lambda_min.abs().max(lambda_max.abs()),
    })
}

/// `M⁻¹·A` for the triple, the operator whose spectrum the certificate bounds.
pub fn preconditioned_operator(t: &OperatorTriple) -> Result<DenseMatrix> {
    t.preconditioner()?.as_matrix().matmul(t.a.as_matrix())
}

/// Relative gap between the `A`-inner-product and `S`-inner-product extremes of `M⁻¹A`.
pub fn inner_product_independence(t: &OperatorTriple) -> Result<f64> {
    let m = preconditioned_operator(t)?;
    let s = build_s(t)?;
    let ea = gen_sym_eig_extremes(&DenseSymMatrix::symmetrized(t.a.as_matrix().matmul(&m)?), &t.a)?;
    let es = gen_sym_eig_extremes(&DenseSymMatrix::symmetrized(s.as_matrix().matmul(&m)?), &s)?;
    Ok(relative_disagreement((ea.min(), ea.max()), (es.min(), es.max())))
}

/// `(x, y)` rescaled so the witness has unit `A`-norm; handy for reporting.
pub fn a_normalized(t: &OperatorTriple, x: &[f64]) -> Result<Vec<f64>> {
    let nrm = dot(&t.a.matvec(x)?, x).sqrt();
    Ok(x.iter().map(|v| v / nrm).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwarz::{Decomposition, SchwarzOperators};

    fn laplace3() -> DenseSymMatrix {
        DenseSymMatrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]).unwrap()
    }

    fn asm3() -> OperatorTriple {
        let d = Decomposition::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        SchwarzOperators::build(&d, &laplace3()).unwrap().triple().unwrap()
    }

    fn exact(a: DenseSymMatrix) -> OperatorTriple {
        let n = a.dim();
        let r = SurjectiveMap::new(DenseMatrix::identity(n)).unwrap();
        OperatorTriple::new(r, a.clone(), a).unwrap()
    }

    #[test]
    fn triple_validation() {
        let r = SurjectiveMap::new(DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap()).unwrap();
        let a = DenseSymMatrix::identity(1);
        assert!(matches!(
            OperatorTriple::new(r.clone(), a.clone(), DenseSymMatrix::identity(3)),
            Err(Error::DimensionMismatch { .. })
        ));
        let indefinite = DenseSymMatrix::from_diagonal(&[1.0, -1.0]).unwrap();
        assert!(matches!(
            OperatorTriple::new(r, a, indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn s_examples() {
        let b = DenseSymMatrix::from_rows(&[[3.0, 1.0], [1.0, 2.0]]).unwrap();
        let s = build_s(&exact(b.clone())).unwrap();
        assert!(s.as_matrix().max_abs_diff(b.as_matrix()) < 1e-14);

        let r = SurjectiveMap::new(DenseMatrix::from_rows(&[[1.0, 1.0]]).unwrap()).unwrap();
        let t = OperatorTriple::new(
            r,
            DenseSymMatrix::identity(1),
            DenseSymMatrix::from_diagonal(&[1.0, 2.0]).unwrap(),
        )
        .unwrap();
        assert!((build_s(&t).unwrap()[(0, 0)] - 2.0 / 3.0).abs() < 1e-15);

        // S inverts the assembled M⁻¹ = (1/3)[[2,1,0],[1,4,1],[0,1,2]]
        let s = build_s(&asm3()).unwrap();
        let m_inv = DenseMatrix::from_rows(&[[2.0, 1.0, 0.0], [1.0, 4.0, 1.0], [0.0, 1.0, 2.0]])
            .unwrap()
            .scaled(1.0 / 3.0);
        assert!(s.as_matrix().matmul(&m_inv).unwrap().distance_to_identity() < 1e-14);
    }

    #[test]
    fn asm3_certificate() {
        let t = asm3();
        for cert in [
            certify_via_pencil(&t).unwrap(),
            certify_via_preconditioned_operator(&t).unwrap(),
            certify_via_inverse_metric(&t).unwrap(),
            certify(&t).unwrap(),
        ] {
            assert!((cert.c_minus - 2.0 / 3.0).abs() < 1e-12, "{cert:?}");
            assert!((cert.c_plus - 2.0).abs() < 1e-12);
            assert!((cert.kappa - 3.0).abs() < 1e-12);
            assert!(cert.witness_residual <= WITNESS_TOL);
        }
        let cert = certify(&t).unwrap();
        assert_eq!(cert.route_residuals.len(), 2);
        assert!(cert.routes_agree());
        cert.check_agreement().unwrap();
    }

    #[test]
    fn exact_preconditioner_is_identity() {
        let cert = certify(&exact(laplace3())).unwrap();
        assert!((cert.c_minus - 1.0).abs() < 1e-12 && (cert.c_plus - 1.0).abs() < 1e-12);
        let cert = certify_via_preconditioned_operator(&exact(laplace3())).unwrap();
        assert!((cert.kappa - 1.0).abs() < 1e-12);
    }

    #[test]
    fn jacobi_on_diagonal() {
        let a = DenseSymMatrix::from_diagonal(&[1.0, 5.0, 0.25]).unwrap();
        let d = Decomposition::new(3, vec![vec![0], vec![1], vec![2]]).unwrap();
        let t = SchwarzOperators::build(&d, &a).unwrap().triple().unwrap();
        let cert = certify_via_preconditioned_operator(&t).unwrap();
        assert!((cert.c_minus - 1.0).abs() < 1e-14 && (cert.c_plus - 1.0).abs() < 1e-14);
    }

    #[test]
    fn homogeneity() {
        let t = asm3();
        let base = certify(&t).unwrap();
        for s in [0.5, 2.0, 10.0] {
            let up = certify(&t.with_scaled_a(s).unwrap()).unwrap();
            assert!(relative_disagreement((base.c_minus * s, base.c_plus * s), (up.c_minus, up.c_plus)) < 1e-12);
            let down = certify(&t.with_scaled_b(s).unwrap()).unwrap();
            assert!(relative_disagreement((base.c_minus / s, base.c_plus / s), (down.c_minus, down.c_plus)) < 1e-12);
        }
    }

    #[test]
    fn conditions_hold_and_are_tight() {
        let t = asm3();
        let cert = certify(&t).unwrap();
        assert!(verify_condition_i(&t, &cert, 500, 7).unwrap() <= 1e-12);
        assert!(verify_condition_ii(&t, &cert, 500, 7).unwrap() <= 1e-12);
        assert!(tightness(&t, &cert).unwrap().max() < 1e-12);

        let e = exact(laplace3());
        let cert = certify(&e).unwrap();
        assert!(verify_condition_i(&e, &cert, 100, 1).unwrap().abs() <= 1e-12);
        assert!(verify_condition_ii(&e, &cert, 100, 1).unwrap().abs() <= 1e-12);
    }

    #[test]
    fn sampling_is_seed_deterministic() {
        let t = asm3();
        let cert = certify(&t).unwrap();
        let a = verify_condition_ii(&t, &cert, 64, 11).unwrap();
        let b = verify_condition_ii(&t, &cert, 64, 11).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }

    #[test]
    fn minimax_examples() {
        let w = DenseSymMatrix::from_rows(&[[2.0, 0.5], [0.5, 1.0]]).unwrap();
        let rep = minimax_check(&DenseMatrix::identity(2), &w, 50, 3).unwrap();
        assert!((rep.rayleigh_min - 1.0).abs() < 1e-15 && (rep.rayleigh_max - 1.0).abs() < 1e-15);

        let m = DenseMatrix::from_diagonal(&[1.0, 3.0]);
        let rep = minimax_check(&m, &DenseSymMatrix::identity(2), 200, 3).unwrap();
        assert!(rep.passed());
        assert!(rep.rayleigh_min >= 1.0 && rep.rayleigh_max <= 3.0);

        let t = asm3();
        let m = preconditioned_operator(&t).unwrap();
        let rep = minimax_check(&m, t.a(), 10_000, 5).unwrap();
        assert!(rep.passed(), "{rep:?}");
        assert!(rep.rayleigh_min >= 2.0 / 3.0 - 1e-12 && rep.rayleigh_max <= 2.0 + 1e-12);
        assert!((rep.witness_min_quotient - 2.0 / 3.0).abs() < 1e-10);
        assert!((rep.witness_max_quotient - 2.0).abs() < 1e-10);
    }

    #[test]
    fn minimax_rejects_non_self_adjoint() {
        let m = DenseMatrix::from_rows(&[[1.0, 1.0], [0.0, 1.0]]).unwrap();
        assert!(matches!(
            minimax_check(&m, &DenseSymMatrix::identity(2), 10, 0),
            Err(Error::NotSelfAdjoint { .. })
        ));
    }

    #[test]
    fn inner_products_agree() {
        assert!(inner_product_independence(&asm3()).unwrap() < 1e-12);
    }

    #[test]
    fn description_hash_tracks_data() {
        let t = asm3();
        assert_eq!(t.description_hash(), asm3().description_hash());
        assert_ne!(t.description_hash(), t.with_scaled_a(2.0).unwrap().description_hash());
        assert_eq!(t.description_hash().len(), 64);
    }
}

//! Randomized property suite over seeded operator triples.
//!
//! Every instance is drawn from its own counter-based stream, checked
//! independently, and the per-property maxima are reduced in instance order,
//! so a summary is identical however the instances were scheduled.

use std::fmt;
use std::fmt::Write as _;

use rand::Rng;

use crate::certify::{
    certify, inner_product_independence, minimax_check, preconditioned_operator, tightness, verify_condition_i,
    verify_condition_ii, OperatorTriple,
};
use crate::error::Result;
use crate::linalg::dot;
use crate::par;
use crate::pseudoinverse::{projector, pseudo_inverse, PseudoInverseOperator, SurjectiveMap};
use crate::rng::{gaussian_matrix, gaussian_vector, random_spd, stream_rng};

/// Largest `dim H` of a random triple.
pub const MAX_RANGE_DIM: usize = 20;
/// Largest `dim V` of a random triple (the smallest is [`MAX_RANGE_DIM`]).
pub const MAX_DOMAIN_DIM: usize = 40;
/// Kernel perturbations tried per instance by the minimal-norm check.
pub const KERNEL_PERTURBATIONS: usize = 50;
/// Perturbations at or below this norm count as zero.
pub const ZERO_PERTURBATION: f64 = 1e-12;

const INSTANCE_STREAM: u64 = 100;
const PERTURBATION_STREAM: u64 = 101;

/// Random triple number `index` of the family selected by `seed`.
///
/// `dim H ∈ [1, 20]`, `dim V ∈ [20, 40]`, Gaussian `R`, and `A`, `B` of the
/// form `GᵀG + n·I`.
pub fn random_triple(seed: u64, index: u64) -> Result<OperatorTriple> {
    let mut rng = stream_rng(seed, INSTANCE_STREAM, index);
    let dim_h = rng.random_range(1..=MAX_RANGE_DIM);
    let dim_v = rng.random_range(MAX_RANGE_DIM..=MAX_DOMAIN_DIM);
    let r = SurjectiveMap::new(gaussian_matrix(&mut rng, dim_h, dim_v))?;
    let a = random_spd(&mut rng, dim_h);
    let b = random_spd(&mut rng, dim_v);
    OperatorTriple::new(r, a, b)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Property {
    /// `R·R† = I` and `R·R_B† = I`.
    RightInverse,
    /// `‖R†y‖_W < ‖R†y + k‖_W` for nonzero kernel `k`, for `W = I` and `W = B`.
    MinimalNorm,
    /// `R†R` is idempotent and symmetric.
    OrthogonalProjector,
    /// `R_B†R` is idempotent and `B`-self-adjoint.
    WeightedAdjointness,
    /// `(R·B⁻¹·Rᵀ)·(R_B†ᵀ·B·R_B†) = I`.
    InverseIdentity,
    /// Rayleigh quotients of `M⁻¹A` fill exactly its spectral interval, in
    /// both the `A` and the `S` inner product.
    Minimax,
    /// The certification routes agree.
    RouteAgreement,
    /// `c−·‖R_B†u‖²_B ≤ (u,u)_A`, attained at the witness.
    StableDecomposition,
    /// `(Rv,Rv)_A ≤ c+·(v,v)_B`, attained at the lifted witness.
    Boundedness,
}

impl Property {
    pub const ALL: [Property; 9] = [
        Property::RightInverse,
        Property::MinimalNorm,
        Property::OrthogonalProjector,
        Property::WeightedAdjointness,
        Property::InverseIdentity,
        Property::Minimax,
        Property::RouteAgreement,
        Property::StableDecomposition,
        Property::Boundedness,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Property::RightInverse => "right_inverse",
            Property::MinimalNorm => "minimal_norm",
            Property::OrthogonalProjector => "orthogonal_projector",
            Property::WeightedAdjointness => "weighted_adjointness",
            Property::InverseIdentity => "inverse_identity",
            Property::Minimax => "minimax",
            Property::RouteAgreement => "route_agreement",
            Property::StableDecomposition => "stable_decomposition",
            Property::Boundedness => "boundedness",
        }
    }

    /// Bound on the residual reported for this property.
    pub fn threshold(self) -> f64 {
        match self {
            Property::InverseIdentity | Property::RouteAgreement | Property::Minimax => 1e-8,
            _ => 1e-9,
        }
    }
}

impl fmt::Display for Property {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One property's measurement on one instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Measurement {
    pub property: Property,
    pub residual: f64,
    pub passed: bool,
}

impl Measurement {
    fn thresholded(property: Property, residual: f64) -> Self {
        Self {
            property,
            residual,
            passed: residual <= property.threshold(),
        }
    }
}

/// Pythagoras check for kernel perturbations of `R†·y`.
///
/// Returns the largest `|‖x+k‖² − ‖x‖² − ‖k‖²| / ‖x+k‖²` (all norms in the
/// weight of `p`) and whether every nonzero perturbation strictly increased the norm.
pub fn minimal_norm_defect(
    p: &PseudoInverseOperator,
    seed: u64,
    index: u64,
    perturbations: usize,
) -> Result<(f64, bool)> {
    let r = p.source();
    let kernel = r.kernel_basis()?;
    let mut rng = stream_rng(seed, PERTURBATION_STREAM, index);
    let x = p.apply(&gaussian_vector(&mut rng, r.range_dim()))?;
    let base = p.weight_norm_sq(&x)?;
    let (mut defect, mut strict) = (0.0f64, true);
    for j in 0..perturbations {
        // the first perturbation is zero: the equality case
        let k = if j == 0 || kernel.cols() == 0 {
            vec![0.0; x.len()]
        } else {
            let scale = 10f64.powf(rng.random_range(-3.0..1.0));
            let c: Vec<f64> = gaussian_vector(&mut rng, kernel.cols())
                .iter()
                .map(|v| v * scale)
                .collect();
            kernel.matvec(&c)?
        };
        let shifted: Vec<f64> = x.iter().zip(&k).map(|(a, b)| a + b).collect();
        let total = p.weight_norm_sq(&shifted)?;
        let k_sq = p.weight_norm_sq(&k)?;
        defect = defect.max((total - base - k_sq).abs() / total.max(f64::MIN_POSITIVE));
        if dot(&k, &k).sqrt() > ZERO_PERTURBATION && !(total > base) {
            strict = false;
        }
    }
    Ok((defect, strict))
}

/// All property measurements for one triple.
pub fn check_triple(t: &OperatorTriple, seed: u64, index: u64, samples: usize) -> Result<Vec<Measurement>> {
    let plain = pseudo_inverse(t.r())?;
    let weighted = t.pseudo_inverse()?;
    let mut out = Vec::with_capacity(Property::ALL.len());

    let right = plain
        .residuals()?
        .right_inverse
        .max(weighted.residuals()?.right_inverse);
    out.push(Measurement::thresholded(Property::RightInverse, right));

    let (d_plain, s_plain) = minimal_norm_defect(&plain, seed, 2 * index, KERNEL_PERTURBATIONS)?;
    let (d_weighted, s_weighted) = minimal_norm_defect(weighted, seed, 2 * index + 1, KERNEL_PERTURBATIONS)?;
    let defect = d_plain.max(d_weighted);
    out.push(Measurement {
        property: Property::MinimalNorm,
        residual: defect,
        passed: s_plain && s_weighted && defect <= Property::MinimalNorm.threshold(),
    });

    let pr = plain.projector_residuals()?;
    let p = projector(&plain)?;
    let symmetry = p.asymmetry();
    out.push(Measurement::thresholded(
        Property::OrthogonalProjector,
        pr.idempotency.max(pr.self_adjointness).max(symmetry),
    ));

    let wr = weighted.projector_residuals()?;
    out.push(Measurement::thresholded(
        Property::WeightedAdjointness,
        wr.idempotency.max(wr.self_adjointness),
    ));

    out.push(Measurement::thresholded(
        Property::InverseIdentity,
        t.inverse_identity_residual()?,
    ));

    let m = preconditioned_operator(t)?;
    let in_a = minimax_check(&m, t.a(), samples, seed ^ index)?;
    let s = weighted.weighted_gram()?;
    let in_s = minimax_check(&m, &s, samples, seed ^ index)?;
    let independence = inner_product_independence(t)?;
    let scale = |rep: &crate::certify::MinimaxReport| rep.lambda_max.abs().max(rep.lambda_min.abs());
    let minimax_residual = (in_a.excursion().max(0.0) / scale(&in_a))
        .max(in_s.excursion().max(0.0) / scale(&in_s))
        .max(in_a.witness_gap())
        .max(in_s.witness_gap())
        .max(independence);
    out.push(Measurement {
        property: Property::Minimax,
        residual: minimax_residual,
        passed: in_a.passed() && in_s.passed() && independence <= Property::Minimax.threshold(),
    });

    let cert = certify(t)?;
    out.push(Measurement {
        property: Property::RouteAgreement,
        residual: cert.max_route_residual(),
        passed: cert.routes_agree(),
    });

    let tight = tightness(t, &cert)?;
    let v_i = verify_condition_i(t, &cert, samples, seed ^ index)?;
    out.push(Measurement {
        property: Property::StableDecomposition,
        residual: v_i.max(tight.condition_i),
        passed: v_i <= 1e-9 && tight.condition_i <= 1e-8,
    });
    let v_ii = verify_condition_ii(t, &cert, samples, seed ^ index)?;
    out.push(Measurement {
        property: Property::Boundedness,
        residual: v_ii.max(tight.condition_ii),
        passed: v_ii <= 1e-9 && tight.condition_ii <= 1e-8,
    });
    Ok(out)
}

/// Aggregate of one property over all completed instances.
#[derive(Debug, Clone, PartialEq)]
pub struct PropertyOutcome {
    pub property: Property,
    pub max_residual: f64,
    pub instances: usize,
    pub failures: usize,
}

impl PropertyOutcome {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteSummary {
    pub seed: u64,
    pub instances: usize,
    pub outcomes: Vec<PropertyOutcome>,
    /// Instances that could not be checked, with the error that stopped them.
    pub aborted: Vec<(u64, String)>,
}

impl SuiteSummary {
    /// All properties passed and no instance was aborted.
    pub fn passed(&self) -> bool {
        self.aborted.is_empty() && self.outcomes.iter().all(PropertyOutcome::passed)
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "seed = {}", self.seed);
        let _ = writeln!(out, "instances = {}", self.instances);
        for o in &self.outcomes {
            let _ = writeln!(
                out,
                "{:<22} max_residual = {:.3e}  threshold = {:.0e}  {}",
                o.property.name(),
                o.max_residual,
                o.property.threshold(),
                if o.passed() { "PASS" } else { "FAIL" }
            );
        }
        for (index, err) in &self.aborted {
            let _ = writeln!(out, "instance {index} aborted: {err}");
        }
        let _ = writeln!(out, "result = {}", if self.passed() { "PASS" } else { "FAIL" });
        out
    }
}

/// Fold per-instance results (in index order) into a summary.
pub fn summarize(seed: u64, results: Vec<(u64, Result<Vec<Measurement>>)>) -> SuiteSummary {
    let instances = results.len();
    let mut outcomes: Vec<PropertyOutcome> = Property::ALL
        .iter()
        .map(|&property| PropertyOutcome {
            property,
            max_residual: 0.0,
            instances: 0,
            failures: 0,
        })
        .collect();
    let mut aborted = Vec::new();
    for (index, result) in results {
        match result {
            Ok(measurements) => {
                for m in measurements {
                    let o = outcomes
                        .iter_mut()
                        .find(|o| o.property == m.property)
                        .expect("known property");
                    o.max_residual = o.max_residual.max(m.residual);
                    o.instances += 1;
                    if !m.passed {
                        o.failures += 1;
                    }
                }
            }
            Err(e) => aborted.push((index, e.to_string())),
        }
    }
    SuiteSummary {
        seed,
        instances,
        outcomes,
        aborted,
    }
}

/// Check each supplied triple (or the error that prevented building it).
pub fn run_on(seed: u64, triples: Vec<Result<OperatorTriple>>, samples: usize) -> SuiteSummary {
    let results = par::map_slice(&triples.into_iter().enumerate().collect::<Vec<_>>(), |(k, t)| {
        let k = *k as u64;
        let res = match t {
            Ok(t) => check_triple(t, seed, k, samples),
            Err(e) => Err(e.clone()),
        };
        (k, res)
    });
    summarize(seed, results)
}

/// The full suite over `instances` random triples.
pub fn run_suite(seed: u64, instances: usize, samples: usize) -> SuiteSummary {
    let triples = (0..instances as u64).map(|k| random_triple(seed, k)).collect();
    run_on(seed, triples, samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::Error;

    #[test]
    fn random_triples_respect_dimension_limits() {
        for k in 0..20 {
            let t = random_triple(3, k).unwrap();
            let (h, v) = (t.r().range_dim(), t.r().domain_dim());
            assert!((1..=MAX_RANGE_DIM).contains(&h));
            assert!((MAX_RANGE_DIM..=MAX_DOMAIN_DIM).contains(&v));
        }
        assert_eq!(
            random_triple(3, 4).unwrap().description_hash(),
            random_triple(3, 4).unwrap().description_hash()
        );
    }

    #[test]
    fn small_suite_passes() {
        let s = run_suite(0xF1C75, 4, 100);
        assert!(s.passed(), "{}", s.to_text());
        assert_eq!(s.outcomes.len(), Property::ALL.len());
        assert!(s.outcomes.iter().all(|o| o.instances == 4));
    }

    #[test]
    fn broken_instance_is_aborted() {
        let triples = vec![
            random_triple(1, 0),
            Err(Error::NotPositiveDefinite { pivot: 2, value: -1.0 }),
        ];
        let s = run_on(1, triples, 20);
        assert!(!s.passed());
        assert_eq!(s.aborted.len(), 1);
        assert_eq!(s.aborted[0].0, 1);
        assert!(s.outcomes.iter().all(|o| o.passed() && o.instances == 1));
        assert!(s.to_text().contains("instance 1 aborted"));
    }
}

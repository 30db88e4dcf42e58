//! Preconditioned conjugate gradients with a zero initial guess.

use thiserror::Error;

use crate::error::{dim_mismatch, Error};
use crate::linalg::{axpy, dot, norm2, DenseMatrix, DenseSymMatrix};
use crate::schwarz::{LocalSolves, SchwarzOperators};

/// An SPD operator applied to residuals.
pub trait Preconditioner: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, r: &[f64]) -> crate::Result<Vec<f64>>;
}

/// `M⁻¹ = I`: plain conjugate gradients.
#[derive(Debug, Clone, Copy)]
pub struct Identity(pub usize);

impl Preconditioner for Identity {
    fn dim(&self) -> usize {
        self.0
    }

    fn apply(&self, r: &[f64]) -> crate::Result<Vec<f64>> {
        Ok(r.to_vec())
    }
}

/// A dense `M⁻¹` applied by multiplication.
impl Preconditioner for DenseSymMatrix {
    fn dim(&self) -> usize {
        DenseSymMatrix::dim(self)
    }

    fn apply(&self, r: &[f64]) -> crate::Result<Vec<f64>> {
        self.matvec(r)
    }
}

impl Preconditioner for SchwarzOperators {
    fn dim(&self) -> usize {
        self.decomposition().global_dim()
    }

    fn apply(&self, r: &[f64]) -> crate::Result<Vec<f64>> {
        SchwarzOperators::apply(self, r)
    }
}

impl Preconditioner for LocalSolves {
    fn dim(&self) -> usize {
        self.decomposition().global_dim()
    }

    fn apply(&self, r: &[f64]) -> crate::Result<Vec<f64>> {
        LocalSolves::apply(self, r)
    }
}

/// Trace of a solve.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport {
    pub iterations: usize,
    /// `‖r_k‖₂/‖r_0‖₂` for `k = 0..=iterations`; the final entry is the recomputed
    /// true residual `‖b − A·x‖₂/‖b‖₂`.
    pub residual_history: Vec<f64>,
    pub converged: bool,
    pub tol: f64,
    /// `κ` the bound below was computed from, when a certificate was supplied.
    pub kappa_used: Option<f64>,
    pub iteration_bound: Option<usize>,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }

    /// Attach `κ` and the classical bound `⌈√κ/2 · ln(2/tol)⌉`.
    pub fn with_kappa(mut self, kappa: f64) -> Self {
        self.kappa_used = Some(kappa);
        self.iteration_bound = Some(iteration_bound(kappa, self.tol));
        self
    }

    /// `false` only when a bound is attached and the iteration count exceeds it.
    pub fn within_bound(&self) -> bool {
        self.iteration_bound.is_none_or(|b| self.iterations <= b)
    }
}

/// `⌈√κ/2 · ln(2/tol)⌉`: iterations sufficient for an `A`-norm error reduction of `tol`.
pub fn iteration_bound(kappa: f64, tol: f64) -> usize {
    (kappa.sqrt() / 2.0 * (2.0 / tol).ln()).ceil() as usize
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolveError {
    #[error("no convergence after {} iterations (relative residual {:e})", .report.iterations, .report.final_residual())]
    MaxIterationsExceeded { solution: Vec<f64>, report: SolveReport },

    #[error("breakdown at iteration {iteration}: curvature {curvature:e} is not positive")]
    BreakdownDetected { iteration: usize, curvature: f64 },

    #[error(transparent)]
    Linalg(#[from] Error),
}

/// Solve `a·x = rhs` to `‖a·x − rhs‖₂ < tol·‖rhs‖₂`.
pub fn pcg<P: Preconditioner + ?Sized>(
    a: &DenseSymMatrix,
    m_inv: &P,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    pcg_observed(a, m_inv, rhs, tol, max_iter, |_, _| {})
}

/// [`pcg`] calling `observe(k, x_k)` after every update of the iterate.
pub fn pcg_observed<P: Preconditioner + ?Sized>(
    a: &DenseSymMatrix,
    m_inv: &P,
    rhs: &[f64],
    tol: f64,
    max_iter: usize,
    mut observe: impl FnMut(usize, &[f64]),
) -> Result<(Vec<f64>, SolveReport), SolveError> {
    let n = a.dim();
    if rhs.len() != n {
        return Err(dim_mismatch(n, rhs.len()).into());
    }
    if m_inv.dim() != n {
        return Err(dim_mismatch(format!("preconditioner of dim {n}"), m_inv.dim()).into());
    }
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Error::InvalidSpec(format!("tolerance {tol} outside (0, 1)")).into());
    }
    let mut report = SolveReport {
        iterations: 0,
        residual_history: vec![1.0],
        converged: false,
        tol,
        kappa_used: None,
        iteration_bound: None,
    };
    let mut x = vec![0.0; n];
    let b_norm = norm2(rhs);
    if b_norm == 0.0 {
        report.residual_history[0] = 0.0;
        report.converged = true;
        return Ok((x, report));
    }

    let mut r = rhs.to_vec();
    let mut z = m_inv.apply(&r)?;
    let mut rz = dot(&r, &z);
    if !(rz > 0.0) {
        return Err(SolveError::BreakdownDetected {
            iteration: 0,
            curvature: rz,
        });
    }
    let rz0 = rz;
    let mut p = z.clone();

    for k in 1..=max_iter {
        let q = a.matvec(&p)?;
        let curvature = dot(&p, &q);
        if !(curvature > 0.0) {
            return Err(SolveError::BreakdownDetected {
                iteration: k,
                curvature,
            });
        }
        let alpha = rz / curvature;
        axpy(alpha, &p, &mut x);
        axpy(-alpha, &q, &mut r);
        observe(k, &x);
        report.iterations = k;
        report.residual_history.push(norm2(&r) / b_norm);

        z = m_inv.apply(&r)?;
        let rz_next = dot(&r, &z);
        if rz_next < 0.0 {
            return Err(SolveError::BreakdownDetected {
                iteration: k,
                curvature: rz_next,
            });
        }
        if (rz_next / rz0).sqrt() <= tol {
            let ax = a.matvec(&x)?;
            let true_res: Vec<f64> = rhs.iter().zip(&ax).map(|(b, v)| b - v).collect();
            let ratio = norm2(&true_res) / b_norm;
            if ratio < tol {
                *report.residual_history.last_mut().expect("non-empty") = ratio;
                report.converged = true;
                return Ok((x, report));
            }
        }
        let beta = rz_next / rz;
        rz = rz_next;
        for (pi, zi) in p.iter_mut().zip(&z) {
            *pi = zi + beta * *pi;
        }
    }
    Err(SolveError::MaxIterationsExceeded { solution: x, report })
}

/// Residual history as `iteration,relative_residual` CSV.
pub fn history_csv(report: &SolveReport) -> String {
    let mut out = String::from("iteration,relative_residual\n");
    for (k, r) in report.residual_history.iter().enumerate() {
        out.push_str(&format!("{k},{r:.16e}\n"));
    }
    out
}

/// Number of distinct values in `values` after merging neighbours closer than `rel_tol·|v|`.
pub fn distinct_count(values: &[f64], rel_tol: f64) -> usize {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mut count = 0;
    let mut last: Option<f64> = None;
    for x in v {
        if last.is_none_or(|l| (x - l).abs() > rel_tol * x.abs().max(l.abs())) {
            count += 1;
            last = Some(x);
        }
    }
    count
}

/// `‖x − y‖_A`.
pub fn energy_distance(a: &DenseMatrix, x: &[f64], y: &[f64]) -> crate::Result<f64> {
    let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| p - q).collect();
    Ok(dot(&a.matvec(&d)?, &d).max(0.0).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schwarz::Decomposition;

    fn laplace3() -> DenseSymMatrix {
        DenseSymMatrix::from_rows(&[[2.0, -1.0, 0.0], [-1.0, 2.0, -1.0], [0.0, -1.0, 2.0]]).unwrap()
    }

    #[test]
    fn identity_system_one_step() {
        let a = DenseSymMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let (x, rep) = pcg(&a, &Identity(4), &b, 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 1);
        assert!(rep.converged);
        assert_eq!(x, b.to_vec());
    }

    #[test]
    fn exact_preconditioner_one_step() {
        let a = laplace3();
        let inv = a.inverse().unwrap();
        let (_, rep) = pcg(&a, &inv, &[1.0, 2.0, 3.0], 1e-10, 10).unwrap();
        assert_eq!(rep.iterations, 1);
    }

    #[test]
    fn two_strip_laplacian() {
        let a = laplace3();
        let d = Decomposition::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        let ops = SchwarzOperators::build(&d, &a).unwrap();
        let (x, rep) = pcg(&a, &ops, &[1.0; 3], 1e-10, 50).unwrap();
        assert!(rep.iterations <= 3, "{rep:?}");
        assert!(rep.final_residual() < 1e-10);
        // A⁻¹·1 = (1.5, 2, 1.5)
        for (xi, e) in x.iter().zip([1.5, 2.0, 1.5]) {
            assert!((xi - e).abs() < 1e-9);
        }
        let rep = rep.with_kappa(3.0);
        assert!(rep.within_bound());
    }

    #[test]
    fn breakdown_on_indefinite() {
        let a = DenseSymMatrix::from_rows(&[[1.0, -2.0], [-2.0, 1.0]]).unwrap();
        match pcg(&a, &Identity(2), &[1.0, 1.0], 1e-8, 10) {
            Err(SolveError::BreakdownDetected {
                iteration: 1,
                curvature,
            }) => assert_eq!(curvature, -2.0),
            other => panic!("expected breakdown, got {other:?}"),
        }
    }

    #[test]
    fn max_iterations_returns_iterate() {
        let a = DenseSymMatrix::from_diagonal(&[1.0, 2.0, 3.0, 4.0]).unwrap();
        match pcg(&a, &Identity(4), &[1.0; 4], 1e-12, 2) {
            Err(SolveError::MaxIterationsExceeded { solution, report }) => {
                assert_eq!(solution.len(), 4);
                assert!(!report.converged);
                assert_eq!(report.iterations, 2);
            }
            other => panic!("expected MaxIterationsExceeded, got {other:?}"),
        }
    }

    #[test]
    fn zero_rhs() {
        let (x, rep) = pcg(&laplace3(), &Identity(3), &[0.0; 3], 1e-8, 5).unwrap();
        assert_eq!(x, vec![0.0; 3]);
        assert_eq!(rep.iterations, 0);
    }

    #[test]
    fn bound_formula() {
        // √1/2 · ln(2e8) = 9.55…
        assert_eq!(iteration_bound(1.0, 1e-8), 10);
        assert_eq!(iteration_bound(4.0, 1e-8), 20);
    }

    #[test]
    fn csv_and_distinct() {
        let rep = SolveReport {
            iterations: 1,
            residual_history: vec![1.0, 0.5],
            converged: true,
            tol: 0.9,
            kappa_used: None,
            iteration_bound: None,
        };
        assert_eq!(
            history_csv(&rep),
            "iteration,relative_residual\n0,1.0000000000000000e0\n1,5.0000000000000000e-1\n"
        );
        assert_eq!(distinct_count(&[2.0 / 3.0, 4.0 / 3.0, 2.0, 2.0 + 1e-12], 1e-8), 3);
    }
}

use std::fmt::Display;
use std::path::Path;

use fsl_core::certify::{certify as certify_triple, tightness, verify_condition_i, verify_condition_ii};
use fsl_core::linalg::{DenseMatrix, DenseSymMatrix};
use fsl_core::model::{laplacian, strip_decomposition, ProblemSpec};
use fsl_core::pcg::{history_csv, pcg, SolveError};
use fsl_core::report::{certificate_report, solve_report};
use fsl_core::schwarz::{Decomposition, LocalSolver, SchwarzOperators};
use fsl_core::{mmio, suite, Error};

use crate::output::{read, write_atomic};
use crate::{ProblemArgs, RunArgs};

pub const MATRIX_FILE: &str = "matrix.mtx";
pub const DECOMPOSITION_FILE: &str = "decomposition.txt";
pub const PROBLEM_FILE: &str = "problem.cfg";
pub const CERTIFICATE_FILE: &str = "certificate.txt";
pub const SOLVE_REPORT_FILE: &str = "solve_report.txt";
pub const HISTORY_FILE: &str = "residual_history.csv";
pub const SOLUTION_FILE: &str = "solution.mtx";
pub const VERIFY_FILE: &str = "verify_summary.txt";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FailureKind {
    /// A numerical property failed or an operator was unusable.
    Numerical,
    /// Bad arguments, unreadable or malformed input, unwritable output.
    Config,
}

impl FailureKind {
    pub fn code(self) -> u8 {
        match self {
            FailureKind::Numerical => 1,
            FailureKind::Config => 2,
        }
    }
}

#[derive(Debug)]
pub struct Failure {
    pub kind: FailureKind,
    pub message: String,
}

impl Failure {
    pub fn numerical(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Numerical,
            message: message.into(),
        }
    }

    pub fn config(message: impl Into<String>) -> Self {
        Self {
            kind: FailureKind::Config,
            message: message.into(),
        }
    }

    pub fn io(path: &Path, e: impl Display) -> Self {
        Self::config(format!("{}: {e}", path.display()))
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let kind = match e {
            Error::Io(_)
            | Error::Parse(_)
            | Error::InvalidSpec(_)
            | Error::InvalidDecomposition(_)
            | Error::NotCovering { .. }
            | Error::DimensionMismatch { .. }
            | Error::NotSymmetric { .. }
            | Error::NonFinite { .. } => FailureKind::Config,
            _ => FailureKind::Numerical,
        };
        Self {
            kind,
            message: e.to_string(),
        }
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Linalg(e) => e.into(),
            other => Failure::numerical(other.to_string()),
        }
    }
}

enum Source {
    Spec(ProblemSpec),
    Files {
        a: DenseSymMatrix,
        decomposition: Decomposition,
    },
}

fn resolve(p: &ProblemArgs) -> Result<Source, Failure> {
    let spec_flags = p.kind.is_some() || p.n.is_some() || p.subdomains.is_some() || p.overlap.is_some();
    let file_flags = p.matrix.is_some() || p.decomposition.is_some();
    let sources = [spec_flags, p.config.is_some(), file_flags]
        .iter()
        .filter(|&&b| b)
        .count();
    if sources != 1 {
        return Err(Failure::config(
            "give exactly one of: --kind/--n/--subdomains/--overlap, --config, or --matrix with --decomposition",
        ));
    }
    if let Some(path) = &p.config {
        return Ok(Source::Spec(ProblemSpec::parse_config(&read(path)?)?));
    }
    if spec_flags {
        let missing = |flag: &str| Failure::config(format!("{flag} is required with --kind"));
        let spec = ProblemSpec::new(
            p.kind.ok_or_else(|| missing("--kind"))?,
            p.n.ok_or_else(|| missing("--n"))?,
            p.subdomains.ok_or_else(|| missing("--subdomains"))?,
            p.overlap.unwrap_or(1),
        )?;
        return Ok(Source::Spec(spec));
    }
    let (Some(matrix), Some(decomposition)) = (&p.matrix, &p.decomposition) else {
        return Err(Failure::config("--matrix and --decomposition must be given together"));
    };
    let a = mmio::read_symmetric(&read(matrix)?).map_err(|e| Failure::config(format!("{}: {e}", matrix.display())))?;
    let decomposition = Decomposition::parse_text(&read(decomposition)?, a.dim())
        .map_err(|e| Failure::config(format!("{}: {e}", decomposition.display())))?;
    Ok(Source::Files { a, decomposition })
}

fn instance(p: &ProblemArgs) -> Result<(DenseSymMatrix, Decomposition), Failure> {
    match resolve(p)? {
        Source::Spec(spec) => Ok((laplacian(&spec), strip_decomposition(&spec)?)),
        Source::Files { a, decomposition } => Ok((a, decomposition)),
    }
}

fn emit(run: &RunArgs, name: &str, text: &str) -> Result<(), Failure> {
    print!("{text}");
    if let Some(dir) = &run.out {
        write_atomic(dir, name, text)?;
    }
    Ok(())
}

pub fn gen(p: &ProblemArgs, out: &Path) -> Result<(), Failure> {
    if p.matrix.is_some() || p.decomposition.is_some() {
        return Err(Failure::config("gen takes a problem spec, not input files"));
    }
    let Source::Spec(spec) = resolve(p)? else {
        unreachable!("file inputs rejected above");
    };
    let a = laplacian(&spec);
    let d = strip_decomposition(&spec)?;
    write_atomic(out, MATRIX_FILE, &mmio::write_symmetric(&a))?;
    write_atomic(out, DECOMPOSITION_FILE, &d.to_text())?;
    write_atomic(out, PROBLEM_FILE, &spec.to_config())?;
    println!(
        "{spec}: {} unknowns, {} subdomains -> {}",
        a.dim(),
        d.len(),
        out.display()
    );
    Ok(())
}

pub fn certify(p: &ProblemArgs, run: &RunArgs, samples: usize) -> Result<(), Failure> {
    let (a, d) = instance(p)?;
    let ops = SchwarzOperators::build(&d, &a)?;
    let triple = ops.triple()?;
    let cert = certify_triple(&triple)?;
    let violation_i = verify_condition_i(&triple, &cert, samples, run.seed)?;
    let violation_ii = verify_condition_ii(&triple, &cert, samples, run.seed)?;
    let tight = tightness(&triple, &cert)?;

    let mut report = certificate_report(&cert, run.seed, &triple.description_hash());
    report
        .push_count("dim", a.dim() as u64)
        .push_count("subdomains", d.len() as u64)
        .push_count("samples", samples as u64)
        .push_f64("condition_i_violation", violation_i)
        .push_f64("condition_ii_violation", violation_ii)
        .push_f64("tightness_i", tight.condition_i)
        .push_f64("tightness_ii", tight.condition_ii);
    emit(run, CERTIFICATE_FILE, &report.to_text())?;

    cert.check_agreement()?;
    if violation_i > 1e-9 || violation_ii > 1e-9 {
        return Err(Failure::numerical(format!(
            "sampled inequalities violated ({violation_i:e}, {violation_ii:e})"
        )));
    }
    Ok(())
}

pub fn solve(p: &ProblemArgs, run: &RunArgs, tol: f64, max_iter: Option<usize>) -> Result<(), Failure> {
    if !(tol > 0.0 && tol < 1.0) {
        return Err(Failure::config(format!("--tol must lie in (0, 1), got {tol}")));
    }
    let (a, d) = instance(p)?;
    let n = a.dim();
    let local = SchwarzOperators::local_solves(&d, &a, LocalSolver::Exact)?;
    let rhs = vec![1.0; n];
    let (x, rep) = pcg(&a, &local, &rhs, tol, max_iter.unwrap_or(2 * n + 10))?;

    let triple = SchwarzOperators::build(&d, &a)?.triple()?;
    let cert = certify_triple(&triple)?;
    let rep = rep.with_kappa(cert.kappa);
    let report = solve_report(&rep, run.seed, &triple.description_hash());
    emit(run, SOLVE_REPORT_FILE, &report.to_text())?;
    if let Some(dir) = &run.out {
        write_atomic(dir, HISTORY_FILE, &history_csv(&rep))?;
        let solution = DenseMatrix::new(n, 1, x).map_err(Failure::from)?;
        write_atomic(dir, SOLUTION_FILE, &mmio::write_dense(&solution))?;
    }
    if !rep.within_bound() {
        return Err(Failure::numerical(format!(
            "{} iterations exceed the bound {} implied by kappa = {:e}",
            rep.iterations,
            rep.iteration_bound.unwrap_or(0),
            cert.kappa
        )));
    }
    Ok(())
}

pub fn verify(run: &RunArgs, instances: usize, samples: usize) -> Result<(), Failure> {
    if instances == 0 {
        return Err(Failure::config("--instances must be at least 1"));
    }
    let summary = suite::run_suite(run.seed, instances, samples);
    emit(run, VERIFY_FILE, &summary.to_text())?;
    if summary.passed() {
        Ok(())
    } else {
        Err(Failure::numerical("property suite failed"))
    }
}

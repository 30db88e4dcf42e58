//! Finite-difference Laplacians and strip decompositions.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::{DenseMatrix, DenseSymMatrix};
use crate::schwarz::Decomposition;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemKind {
    Laplace1d,
    Laplace2d,
}

impl fmt::Display for ProblemKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProblemKind::Laplace1d => "laplace1d",
            ProblemKind::Laplace2d => "laplace2d",
        })
    }
}

impl FromStr for ProblemKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "laplace1d" => Ok(ProblemKind::Laplace1d),
            "laplace2d" => Ok(ProblemKind::Laplace2d),
            other => Err(Error::InvalidSpec(format!("unknown problem kind {other:?}"))),
        }
    }
}

/// A generated instance: stencil kind, interior points per dimension, strip count, overlap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ProblemSpec {
    pub kind: ProblemKind,
    pub n: usize,
    pub subdomains: usize,
    pub overlap: usize,
}

impl ProblemSpec {
    pub fn new(kind: ProblemKind, n: usize, subdomains: usize, overlap: usize) -> Result<Self> {
        let spec = Self {
            kind,
            n,
            subdomains,
            overlap,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidSpec("n must be at least 1".into()));
        }
        if self.subdomains == 0 {
            return Err(Error::InvalidSpec("need at least one subdomain".into()));
        }
        if self.subdomains > self.n {
            return Err(Error::InvalidSpec(format!(
                "{} subdomains cannot be carved from n = {}",
                self.subdomains, self.n
            )));
        }
        if self.overlap == 0 {
            return Err(Error::InvalidSpec("overlap must be at least 1".into()));
        }
        Ok(())
    }

    /// Number of unknowns: `n` or `n²`.
    pub fn global_dim(&self) -> usize {
        match self.kind {
            ProblemKind::Laplace1d => self.n,
            ProblemKind::Laplace2d => self.n * self.n,
        }
    }

    /// `key=value` lines with keys `kind`, `n`, `subdomains`, `overlap`.
    /// Blank lines and `#` comments are ignored.
    pub fn parse_config(text: &str) -> Result<Self> {
        let (mut kind, mut n, mut subdomains, mut overlap) = (None, None, None, None);
        for (ln, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected key=value", ln + 1)))?;
            let value = value.trim();
            let count = || {
                value
                    .parse::<usize>()
                    .map_err(|e| Error::Parse(format!("line {}: {key}: {e}", ln + 1)))
            };
            match key.trim() {
                "kind" => kind = Some(value.parse()?),
                "n" => n = Some(count()?),
                "subdomains" => subdomains = Some(count()?),
                "overlap" => overlap = Some(count()?),
                other => return Err(Error::Parse(format!("line {}: unknown key {other:?}", ln + 1))),
            }
        }
        let missing = |k: &str| Error::Parse(format!("missing key {k}"));
        Self::new(
            kind.ok_or_else(|| missing("kind"))?,
            n.ok_or_else(|| missing("n"))?,
            subdomains.ok_or_else(|| missing("subdomains"))?,
            overlap.ok_or_else(|| missing("overlap"))?,
        )
    }

    pub fn to_config(&self) -> String {
        format!(
            "kind={}\nn={}\nsubdomains={}\noverlap={}\n",
            self.kind, self.n, self.subdomains, self.overlap
        )
    }
}

impl fmt::Display for ProblemSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} n={} N={} overlap={}",
            self.kind, self.n, self.subdomains, self.overlap
        )
    }
}

/// Unscaled Dirichlet Laplacian: `tridiag(−1, 2, −1)` in 1D, the lexicographic
/// 5-point stencil (4 on the diagonal) in 2D.
pub fn laplacian(spec: &ProblemSpec) -> DenseSymMatrix {
    let n = spec.n;
    let m = match spec.kind {
        ProblemKind::Laplace1d => DenseMatrix::from_fn(n, n, |i, j| match i.abs_diff(j) {
            0 => 2.0,
            1 => -1.0,
            _ => 0.0,
        }),
        ProblemKind::Laplace2d => {
            let dim = n * n;
            let mut m = DenseMatrix::zeros(dim, dim);
            for row in 0..n {
                for col in 0..n {
                    let k = row * n + col;
                    m[(k, k)] = 4.0;
                    if col + 1 < n {
                        m[(k, k + 1)] = -1.0;
                        m[(k + 1, k)] = -1.0;
                    }
                    if row + 1 < n {
                        m[(k, k + n)] = -1.0;
                        m[(k + n, k)] = -1.0;
                    }
                }
            }
            m
        }
    };
    DenseSymMatrix::new(m).expect("stencil is symmetric")
}

/// Contiguous strips of grid lines (1D: points, 2D: rows of the grid).
///
/// With interfaces `t_i = i·n/N`, strip `i` holds every line `k` with
/// `t_i − overlap ≤ k ≤ t_{i+1} + overlap − 1`, clamped to `0..n`. When the
/// interfaces fall on whole lines this is the base strip `[t_i, t_{i+1})`
/// widened by `overlap` lines on each interior side; a line straddling a
/// fractional interface belongs to both neighbours once `overlap ≥ 1`.
pub fn strip_decomposition(spec: &ProblemSpec) -> Result<Decomposition> {
    spec.validate()?;
    let (n, parts, ov) = (spec.n, spec.subdomains, spec.overlap);
    // multiply through by N to stay in integers
    let line_strips: Vec<Vec<usize>> = (0..parts)
        .map(|i| {
            (0..n)
                .filter(|&k| parts * (k + ov) >= i * n && parts * (k + 1) <= (i + 1) * n + ov * parts)
                .collect()
        })
        .collect();
    let subdomains = match spec.kind {
        ProblemKind::Laplace1d => line_strips,
        ProblemKind::Laplace2d => line_strips
            .into_iter()
            .map(|rows| rows.iter().flat_map(|&r| (0..n).map(move |c| r * n + c)).collect())
            .collect(),
    };
    Decomposition::new(spec.global_dim(), subdomains).map_err(|e| Error::InvalidSpec(e.to_string()))
}

/// The generated instances every suite-level check runs over.
pub fn model_suite() -> Vec<ProblemSpec> {
    use ProblemKind::*;
    [
        (Laplace1d, 3, 2, 1),
        (Laplace1d, 16, 2, 1),
        (Laplace1d, 32, 4, 2),
        (Laplace1d, 64, 8, 1),
        (Laplace1d, 64, 8, 4),
        (Laplace2d, 4, 2, 1),
        (Laplace2d, 8, 2, 2),
        (Laplace2d, 16, 4, 1),
        (Laplace2d, 16, 4, 2),
        (Laplace2d, 16, 4, 3),
        (Laplace2d, 32, 8, 1),
        (Laplace2d, 32, 8, 2),
    ]
    .into_iter()
    .map(|(k, n, parts, ov)| ProblemSpec::new(k, n, parts, ov).expect("valid suite spec"))
    .collect()
}

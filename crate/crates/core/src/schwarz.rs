//! One-level additive Schwarz operators as a fictitious-space triple.
//!
//! A decomposition of `{0..n}` into overlapping index sets `V_1..V_N` defines
//! the product space `V = V_1 × … × V_N`, the map `R(v_1..v_N) = Σ E_i·v_i`
//! (the `E_i` are 0/1 injections), the block-diagonal `B` with
//! `B_i = E_iᵀ·A·E_i`, and the preconditioner
//! `M⁻¹ = R·B⁻¹·Rᵀ = Σ E_i·B_i⁻¹·E_iᵀ`.

use std::fmt::Write as _;

use crate::error::{dim_mismatch, Error, Result};
use crate::linalg::{Cholesky, DenseMatrix, DenseSymMatrix};
use crate::par;
use crate::pseudoinverse::SurjectiveMap;

/// Absolute-or-relative agreement required between the two assembly routes.
pub const ASSEMBLY_TOL: f64 = 1e-10;

/// Overlapping index subsets covering `{0..global_dim}`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Decomposition {
    global_dim: usize,
    subdomains: Vec<Vec<usize>>,
}

impl Decomposition {
    /// Each subset must be non-empty, strictly increasing and in range; the union must cover.
    pub fn new(global_dim: usize, subdomains: Vec<Vec<usize>>) -> Result<Self> {
        if subdomains.is_empty() {
            return Err(Error::InvalidDecomposition("no subdomains".into()));
        }
        let mut hit = vec![false; global_dim];
        for (i, s) in subdomains.iter().enumerate() {
            if s.is_empty() {
                return Err(Error::InvalidDecomposition(format!("subdomain {i} is empty")));
            }
            if let Some(w) = s.windows(2).find(|w| w[0] >= w[1]) {
                return Err(Error::InvalidDecomposition(format!(
                    "subdomain {i} is not sorted and duplicate-free ({} before {})",
                    w[0], w[1]
                )));
            }
            for &j in s {
                if j >= global_dim {
                    return Err(Error::InvalidDecomposition(format!(
                        "subdomain {i} has index {j} outside 0..{global_dim}"
                    )));
                }
                hit[j] = true;
            }
        }
        if let Some(missing) = hit.iter().position(|h| !h) {
            return Err(Error::NotCovering { missing });
        }
        Ok(Self { global_dim, subdomains })
    }

    pub fn global_dim(&self) -> usize {
        self.global_dim
    }

    pub fn subdomains(&self) -> &[Vec<usize>] {
        &self.subdomains
    }

    pub fn len(&self) -> usize {
        self.subdomains.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subdomains.is_empty()
    }

    /// `Σ |V_i|`, the dimension of the product space.
    pub fn product_dim(&self) -> usize {
        self.subdomains.iter().map(Vec::len).sum()
    }

    /// Start of each block in the flattened product space.
    pub fn offsets(&self) -> Vec<usize> {
        let mut acc = 0;
        self.subdomains
            .iter()
            .map(|s| {
                let o = acc;
                acc += s.len();
                o
            })
            .collect()
    }

    /// `μ(j)`: number of subdomains containing `j`.
    pub fn multiplicity(&self) -> Vec<usize> {
        let mut mu = vec![0; self.global_dim];
        for s in &self.subdomains {
            for &j in s {
                mu[j] += 1;
            }
        }
        mu
    }

    /// One line per subdomain, space-separated zero-based indices.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for s in &self.subdomains {
            let line: Vec<String> = s.iter().map(usize::to_string).collect();
            let _ = writeln!(out, "{}", line.join(" "));
        }
        out
    }

    pub fn parse_text(text: &str, global_dim: usize) -> Result<Self> {
        let body = text.trim_end_matches(['\n', '\r']);
        if body.trim().is_empty() {
            return Err(Error::Parse("decomposition file is empty".into()));
        }
        let subdomains = body
            .lines()
            .enumerate()
            .map(|(ln, line)| {
                line.split_whitespace()
                    .map(|tok| {
                        tok.parse::<usize>()
                            .map_err(|e| Error::Parse(format!("line {}: bad index {tok:?}: {e}", ln + 1)))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(global_dim, subdomains)
    }
}

/// An element of the product space, one block per subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductVector {
    blocks: Vec<Vec<f64>>,
}

impl ProductVector {
    pub fn new(d: &Decomposition, blocks: Vec<Vec<f64>>) -> Result<Self> {
        if blocks.len() != d.len() {
            return Err(dim_mismatch(format!("{} blocks", d.len()), blocks.len()));
        }
        for (b, s) in blocks.iter().zip(d.subdomains()) {
            if b.len() != s.len() {
                return Err(dim_mismatch(s.len(), b.len()));
            }
        }
        Ok(Self { blocks })
    }

    pub fn from_flat(d: &Decomposition, flat: &[f64]) -> Result<Self> {
        if flat.len() != d.product_dim() {
            return Err(dim_mismatch(d.product_dim(), flat.len()));
        }
        let blocks = d
            .offsets()
            .iter()
            .zip(d.subdomains())
            .map(|(&o, s)| flat[o..o + s.len()].to_vec())
            .collect();
        Ok(Self { blocks })
    }

    pub fn blocks(&self) -> &[Vec<f64>] {
        &self.blocks
    }

    pub fn to_flat(&self) -> Vec<f64> {
        self.blocks.concat()
    }

    /// `R·v = Σ E_i·v_i`.
    pub fn extend(&self, d: &Decomposition) -> Vec<f64> {
        let mut out = vec![0.0; d.global_dim()];
        for (b, s) in self.blocks.iter().zip(d.subdomains()) {
            for (v, &j) in b.iter().zip(s) {
                out[j] += v;
            }
        }
        out
    }
}

/// Choice of the local operators `B_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LocalSolver {
    /// `B_i = E_iᵀ·A·E_i`: exact subdomain solves.
    #[default]
    Exact,
    /// `B_i = diag(E_iᵀ·A·E_i)`: subdomain Jacobi.
    Jacobi,
}

/// `R` as a `global_dim × Σ|V_i|` 0/1 matrix; column `(i, k)` has its 1 in row `V_i[k]`.
pub fn build_r_map(d: &Decomposition) -> Result<SurjectiveMap> {
    let mut r = DenseMatrix::zeros(d.global_dim(), d.product_dim());
    for (&o, s) in d.offsets().iter().zip(d.subdomains()) {
        for (k, &j) in s.iter().enumerate() {
            r[(j, o + k)] = 1.0;
        }
    }
    SurjectiveMap::new(r)
}

fn local_blocks(d: &Decomposition, a: &DenseSymMatrix, solver: LocalSolver) -> Vec<DenseSymMatrix> {
    d.subdomains()
        .iter()
        .map(|s| {
            let block = a.principal_submatrix(s);
            match solver {
                LocalSolver::Exact => block,
                LocalSolver::Jacobi => {
                    DenseSymMatrix::from_diagonal(&block.as_matrix().diagonal()).expect("diagonal of a finite matrix")
                }
            }
        })
        .collect()
}

fn block_diagonal(d: &Decomposition, blocks: &[DenseSymMatrix]) -> DenseSymMatrix {
    let n = d.product_dim();
    let mut b = DenseMatrix::zeros(n, n);
    for (&o, blk) in d.offsets().iter().zip(blocks) {
        for i in 0..blk.dim() {
            for j in 0..blk.dim() {
                b[(o + i, o + j)] = blk[(i, j)];
            }
        }
    }
    DenseSymMatrix::symmetrized(b)
}

/// Block-diagonal `B` with `B_i = E_iᵀ·A·E_i`.
pub fn build_block_b(d: &Decomposition, a: &DenseSymMatrix) -> Result<DenseSymMatrix> {
    build_block_b_with(d, a, LocalSolver::Exact)
}

pub fn build_block_b_with(d: &Decomposition, a: &DenseSymMatrix, solver: LocalSolver) -> Result<DenseSymMatrix> {
    if a.dim() != d.global_dim() {
        return Err(dim_mismatch(format!("operator of dim {}", d.global_dim()), a.dim()));
    }
    Ok(block_diagonal(d, &local_blocks(d, a, solver)))
}

/// `M⁻¹` assembled by scatter-add and by the product `R·B⁻¹·Rᵀ`.
#[derive(Debug, Clone)]
pub struct Assembly {
    pub m_inv: DenseSymMatrix,
    /// `‖Σ E_i B_i⁻¹ E_iᵀ − R·B⁻¹·Rᵀ‖_max`.
    pub route_gap: f64,
}

/// Assemble `M⁻¹` from `R` and block-diagonal `B` (blocks read off `d`).
///
/// Both routes must agree to [`ASSEMBLY_TOL`] (relative to `max(1, ‖M⁻¹‖_max)`) and
/// the result must pass the Cholesky gate.
pub fn assemble_preconditioner(d: &Decomposition, r: &SurjectiveMap, b: &DenseSymMatrix) -> Result<Assembly> {
    if r.range_dim() != d.global_dim() || r.domain_dim() != d.product_dim() || b.dim() != d.product_dim() {
        return Err(dim_mismatch(
            format!(
                "{}x{} map with {} weight",
                d.global_dim(),
                d.product_dim(),
                d.product_dim()
            ),
            format!("{}x{} map with {} weight", r.range_dim(), r.domain_dim(), b.dim()),
        ));
    }
    let offsets = d.offsets();
    let blocks: Vec<DenseSymMatrix> = offsets
        .iter()
        .zip(d.subdomains())
        .map(|(&o, s)| {
            let idx: Vec<usize> = (o..o + s.len()).collect();
            b.principal_submatrix(&idx)
        })
        .collect();
    let inverses = blocks.iter().map(DenseSymMatrix::inverse).collect::<Result<Vec<_>>>()?;

    let n = d.global_dim();
    let mut scatter = DenseMatrix::zeros(n, n);
    for (s, inv) in d.subdomains().iter().zip(&inverses) {
        for (p, &i) in s.iter().enumerate() {
            for (q, &j) in s.iter().enumerate() {
                scatter[(i, j)] += inv[(p, q)];
            }
        }
    }

    let b_inv_rt = b.cholesky()?.solve_matrix(&r.adjoint())?;
    let product = r.matrix().matmul(&b_inv_rt)?;
    let route_gap = scatter.max_abs_diff(&product);
    let scale = scatter.max_abs().max(1.0);
    if route_gap > ASSEMBLY_TOL * scale {
        return Err(Error::InvalidDecomposition(format!(
            "assembly routes disagree by {route_gap:e}"
        )));
    }
    let m_inv = DenseSymMatrix::symmetrized(scatter);
    m_inv.cholesky()?;
    Ok(Assembly { m_inv, route_gap })
}

/// The full fictitious-space data of a one-level additive Schwarz method.
#[derive(Debug, Clone)]
pub struct SchwarzOperators {
    decomposition: Decomposition,
    r_map: SurjectiveMap,
    a: DenseSymMatrix,
    b: DenseSymMatrix,
    m_inv: DenseSymMatrix,
    local: Vec<Cholesky>,
    route_gap: f64,
}

impl SchwarzOperators {
    pub fn build(d: &Decomposition, a: &DenseSymMatrix) -> Result<Self> {
        Self::build_with(d, a, LocalSolver::Exact)
    }

    pub fn build_with(d: &Decomposition, a: &DenseSymMatrix, solver: LocalSolver) -> Result<Self> {
        if a.dim() != d.global_dim() {
            return Err(dim_mismatch(format!("operator of dim {}", d.global_dim()), a.dim()));
        }
        let blocks = local_blocks(d, a, solver);
        let local = blocks
            .iter()
            .map(|blk| blk.cholesky().cloned())
            .collect::<Result<Vec<_>>>()?;
        let r_map = build_r_map(d)?;
        let b = block_diagonal(d, &blocks);
        let Assembly { m_inv, route_gap } = assemble_preconditioner(d, &r_map, &b)?;
        Ok(Self {
            decomposition: d.clone(),
            r_map,
            a: a.clone(),
            b,
            m_inv,
            local,
            route_gap,
        })
    }

    /// Matrix-free variant used when only applications of `M⁻¹` are needed:
    /// factors the local blocks and skips the dense assembly.
    pub fn local_solves(d: &Decomposition, a: &DenseSymMatrix, solver: LocalSolver) -> Result<LocalSolves> {
        if a.dim() != d.global_dim() {
            return Err(dim_mismatch(format!("operator of dim {}", d.global_dim()), a.dim()));
        }
        let local = local_blocks(d, a, solver)
            .iter()
            .map(|blk| blk.cholesky().cloned())
            .collect::<Result<Vec<_>>>()?;
        Ok(LocalSolves {
            decomposition: d.clone(),
            local,
        })
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }

    pub fn r_map(&self) -> &SurjectiveMap {
        &self.r_map
    }

    pub fn a(&self) -> &DenseSymMatrix {
        &self.a
    }

    pub fn b(&self) -> &DenseSymMatrix {
        &self.b
    }

    pub fn m_inv(&self) -> &DenseSymMatrix {
        &self.m_inv
    }

    pub fn assembly_route_gap(&self) -> f64 {
        self.route_gap
    }

    /// `M⁻¹·residual` via scatter, local block solves, gather.
    pub fn apply(&self, residual: &[f64]) -> Result<Vec<f64>> {
        apply_blocks(&self.decomposition, &self.local, residual)
    }

    /// The `(R, A, B)` triple for certification.
    pub fn triple(&self) -> Result<crate::certify::OperatorTriple> {
        crate::certify::OperatorTriple::new(self.r_map.clone(), self.a.clone(), self.b.clone())
    }
}

/// Factored local blocks, enough to apply `M⁻¹` without the dense assembly.
#[derive(Debug, Clone)]
pub struct LocalSolves {
    decomposition: Decomposition,
    local: Vec<Cholesky>,
}

impl LocalSolves {
    pub fn apply(&self, residual: &[f64]) -> Result<Vec<f64>> {
        apply_blocks(&self.decomposition, &self.local, residual)
    }

    pub fn decomposition(&self) -> &Decomposition {
        &self.decomposition
    }
}

pub fn apply_preconditioner(ops: &SchwarzOperators, residual: &[f64]) -> Result<Vec<f64>> {
    ops.apply(residual)
}

fn apply_blocks(d: &Decomposition, local: &[Cholesky], residual: &[f64]) -> Result<Vec<f64>> {
    if residual.len() != d.global_dim() {
        return Err(dim_mismatch(d.global_dim(), residual.len()));
    }
    let work: Vec<(&Vec<usize>, &Cholesky)> = d.subdomains().iter().zip(local).collect();
    let pieces = par::map_slice(&work, |(s, chol)| {
        let mut z: Vec<f64> = s.iter().map(|&j| residual[j]).collect();
        chol.solve_in_place(&mut z);
        z
    });
    // gather in subdomain order, independent of completion order
    let mut out = vec![0.0; d.global_dim()];
    for (s, z) in d.subdomains().iter().zip(&pieces) {
        for (&j, v) in s.iter().zip(z) {
            out[j] += v;
        }
    }
    Ok(out)
}

//! Dense symmetric linear algebra.

mod cholesky;
mod dense;
mod eigen;
mod qr;

pub use cholesky::{cholesky, Cholesky};
pub use dense::{axpy, dot, max_abs, norm2, solve_spd, DenseMatrix, DenseSymMatrix, SYMMETRY_TOL};
pub use eigen::{
    gen_sym_eig, gen_sym_eig_extremes, gen_sym_eigvals, sym_eig, sym_eig_extremes, sym_eigvals, ExtremeEigen, SymEigen,
    MAX_SWEEPS_PER_DIM,
};
pub use qr::{orthonormal_completion, power_norm_estimate};

/// Vectors are plain slices / `Vec<f64>`.
pub type Vector = Vec<f64>;

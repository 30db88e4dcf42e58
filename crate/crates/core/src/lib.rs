//! Weighted pseudo-inverses, one-level additive Schwarz operators, and
//! numerically certified spectral bounds for the preconditioned operator
//! `R·B⁻¹·Rᵀ·A` of a fictitious-space triple `(R, A, B)`.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod certify;
pub mod error;
pub mod linalg;
pub mod mmio;
pub mod model;
pub mod par;
pub mod pcg;
pub mod pseudoinverse;
pub mod report;
pub mod rng;
pub mod schwarz;
pub mod suite;

pub use error::{Error, Result};

//! Realizing finite vector configurations as positive semidefinite matrices
//! under the normalized trace inner product `<A, B> = (1/d) Tr(AB)`.
//!
//! A configuration of vectors with pairwise nonnegative inner products may
//! or may not be reproducible as the trace Gram of PSD matrices. This crate
//! provides the constructive half and the evidence-gathering half of that
//! question:
//!
//! - [`clifford`]: an exact isometric embedding of the spherical cone
//!   `x_1^2 >= x_2^2 + ... + x_n^2` into the PSD cone at dimension
//!   `2^(n/2)`, built from exterior-algebra creation operators.
//! - [`orthant`]: positive-orthant realizations via entrywise-nonnegative
//!   factorizations `G = B^T B` found by projected gradient descent, and
//!   the diagonal (commuting) realizations they induce.
//! - [`realize`]: a general multistart factored-gradient search for PSD
//!   realizations at a fixed dimension or along a dimension ladder, plus
//!   verification and contradiction-chain diagnostics for the two built-in
//!   hard instances.
//! - [`configurations`]: the pentagon and hexagon configurations — the
//!   canonical examples separating "nonnegative Gram" from "realizable" and
//!   "matrix-realizable" from "orthant-realizable" — plus random generators
//!   and Gram utilities.
//!
//! Searches are deterministic per seed and report evidence, never proofs:
//! an exhausted search means "no realization found", while the two built-in
//! impossibilities are mathematical facts the diagnostics make measurable.

#[cfg(feature = "cli")]
pub mod cli;
pub mod clifford;
pub mod configurations;
pub mod eigen;
pub mod error;
pub mod exterior;
pub mod matrix;
pub mod orthant;
pub mod realize;
pub mod schema;
pub mod search;

pub use error::{Error, Result};
pub use matrix::{
    is_psd, min_eigenvalue, psd_sqrt, trace_inner_product, ComplexMatrix, HermitianMatrix,
};
pub use num_complex::Complex64;

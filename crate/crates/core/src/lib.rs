//! Spectral analysis of non-Hermitian quadratic bosonic networks.
//!
//! The library builds the block-structured Heisenberg–Langevin dynamical
//! matrices of two- to five-mode bosonic networks, evaluates their closed-form
//! spectra, classifies eigenvalue degeneracies into exceptional, diabolical,
//! and hybrid points, maps the analytic degeneracy loci in the
//! (κ/ε, γ₋/ε) parameter plane, and verifies the second-order
//! field-operator-moment degeneracy structure against a brute-force numerical
//! oracle.
//!
//! Module map:
//! - [`blocks`] — the 2×2 coupling/rate building blocks and the ξ eigensystem;
//! - [`network`] — the seven supported topologies, rate constraints, and
//!   dynamical-matrix construction (full 2n×2n and reduced n×n forms);
//! - [`spectra`] — closed-form eigenvalues/eigenvectors per topology and the
//!   assembly of the full 2n-dimensional spectrum from the reduced one;
//! - [`numeric`] — the independent numerical machinery: dense complex
//!   eigendecomposition, rank-revealing Jordan-structure analysis, matrix
//!   exponential, and optimal spectrum matching;
//! - [`atlas`] — degeneracy classification (regular/DP/EP/HP), analytic locus
//!   descriptions, and the parameter-plane scanner;
//! - [`fom`] — second-order field-operator-moment spaces (genuine and
//!   induced), their dynamical matrices, and verification against the
//!   transcribed degeneracy tables;
//! - [`cli`] — the command-line surface.

pub mod atlas;
pub mod blocks;
pub mod cli;
pub mod fom;
pub mod network;
pub mod numeric;
pub mod spectra;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex;

/// Complex scalar used throughout.
pub type C = Complex<f64>;
/// Dense dynamically-sized complex matrix.
pub type CMat = DMatrix<C>;
/// Dense dynamically-sized complex vector.
pub type CVec = DVector<C>;

/// Shorthand for a complex number from real and imaginary parts.
#[inline]
pub fn c(re: f64, im: f64) -> C {
    Complex::new(re, im)
}

/// Library-wide error type.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// A topology's rate constraint is violated; the message names the
    /// failed equality.
    #[error("rate constraint violated: {0}")]
    ConstraintViolation(String),

    /// The ξ block is defective (ζ = 0, i.e. κ = ±ε); the analytic
    /// full-spectrum assembly is undefined and callers must use the numeric
    /// path.
    #[error("xi block is defective (zeta = 0): {0}")]
    DefectiveXi(String),

    /// An iterative numerical method failed to converge.
    #[error("numerical method did not converge: {0}")]
    NonConvergence(String),

    /// The rank staircase of a Jordan analysis is inconsistent under the
    /// current tolerance policy.
    #[error("ill-conditioned computation: {0}")]
    IllConditioned(String),

    /// The eigenvector matrix is numerically singular (at or near an
    /// exceptional point); diagonalization is impossible.
    #[error("eigenvector matrix is singular (condition {condition:.3e}); the matrix is defective or near-defective")]
    SingularP {
        /// Estimated condition number of the eigenvector matrix.
        condition: f64,
    },

    /// Two spectra with different cardinalities cannot be matched.
    #[error("spectrum length mismatch: {a} vs {b}")]
    LengthMismatch {
        /// Length of the first spectrum.
        a: usize,
        /// Length of the second spectrum.
        b: usize,
    },

    /// Malformed user input (parameters, grids, config files).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// I/O failure.
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),

    /// JSON (de)serialization failure.
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Library-wide result type.
pub type Result<T> = std::result::Result<T, Error>;

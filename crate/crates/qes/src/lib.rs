//! Quasi-exactly solvable one-dimensional Schrodinger problems built from the
//! generator algebra of a nilpotent group.
//!
//! The group elements act on wavefunctions through polynomial generators
//! `X_k(x)`, and the Hamiltonian `H = X_0^2 + X_N^2 + alpha X_{N-1}` admits a
//! finite polynomial block: for quantized `alpha` an `(M+1)`-dimensional space
//! of wavefunctions `p(X_2) exp(-W)` closes under `H`. This crate provides
//!
//! * the group algebra: products, inverses, generator polynomials, Casimir
//!   invariants and the scaling action ([`group`]),
//! * the overdetermined coefficient recursion and its downward solve
//!   ([`recursion`]),
//! * closed-form and numeric solvers for the surviving eigenpairs,
//!   including the zero-energy families ([`solver`]),
//! * |x|-symmetrized potentials with parity-resolved matching conditions
//!   ([`symmetry`]),
//! * an independent finite-difference oracle for validating analytic
//!   spectra ([`oracle`]),
//! * the electromagnetic reading of the same algebra: a charged particle in
//!   polynomial E and B fields whose 3-D problem fibers into these 1-D ones
//!   ([`em`]),
//! * JSON/CSV persistence and the command line front end ([`record`],
//!   [`cli`]).

pub mod cli;
pub mod em;
pub mod group;
pub mod oracle;
pub mod poly;
pub mod record;
pub mod recursion;
pub mod solver;
pub mod symmetry;

pub use group::{BetaVector, CasimirSet, GeneratorPoly, GroupElement};
pub use recursion::{CoefficientVector, QesProblem, ResidualVector};
pub use em::EmProblem;
pub use oracle::{OracleReport, PotentialSpec, ValidateOptions};
pub use solver::QesSolution;
pub use symmetry::{Parity, ParityChoice, ParitySolution};

use std::sync::OnceLock;

/// Errors shared across the solver modules.
#[derive(Debug, thiserror::Error)]
pub enum QesError {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("index out of range: {0}")]
    IndexOutOfRange(String),
    #[error("unsupported case: {0}")]
    Unsupported(String),
    #[error("zero-energy family undefined for N={n}, M={m}: M must be kN or kN+1")]
    ZeroEnergyOrder { n: usize, m: usize },
    #[error("no solution: {0}")]
    NoSolution(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("record parse error: {0}")]
    Record(String),
}

pub type Result<T> = std::result::Result<T, QesError>;

/// `n!` as an exact f64 (exact for n <= 18, beyond that correctly rounded).
pub(crate) fn factorial(n: usize) -> f64 {
    debug_assert!(n <= 34, "factorial overflow");
    let mut acc: u128 = 1;
    for k in 2..=n as u128 {
        acc *= k;
    }
    acc as f64
}

/// Residual tolerance used by the solvers and the CLI.
///
/// Defaults to 1e-10; override with the `QES_TOL` environment variable.
pub fn residual_tolerance() -> f64 {
    static TOL: OnceLock<f64> = OnceLock::new();
    *TOL.get_or_init(|| {
        std::env::var("QES_TOL")
            .ok()
            .and_then(|s| s.parse::<f64>().ok())
            .filter(|t| t.is_finite() && *t > 0.0)
            .unwrap_or(1e-10)
    })
}

//! Numerical machinery for linear eigenvalue statistics of Hermitian and
//! positive-Hermitian random-matrix ensembles.
//!
//! The crate computes distributions of linear statistics three independent
//! ways and lets them check each other:
//!
//! * exactly at finite matrix size, through Christoffel-Darboux kernels and
//!   Fredholm determinants ([`operators`], [`fredholm`]),
//! * in the scaling limit, through sine/Bessel kernel operators and their
//!   truncated Wiener-Hopf / Hankel representations ([`operators`]),
//! * asymptotically, through closed-form Gaussian limit formulas
//!   ([`asymptotics`]),
//!
//! with Monte Carlo sampling of the exact ensembles ([`montecarlo`]) as an
//! empirical cross-check.

// Guards written as !(x > 0.0) are deliberate: they reject NaN, which the
// refactored x <= 0.0 would silently admit.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod error;
pub mod fredholm;
pub mod montecarlo;
pub mod operators;
pub mod specfun;
pub mod symbols;
pub mod transforms;

pub use error::{Error, Result};

pub use asymptotics::GaussianPrediction;
pub use fredholm::DetResult;
pub use montecarlo::{EnsembleKind, EnsembleSpec, McRunReport, StatRegime};
pub use operators::{DiscretizedOperator, OperatorKind, SymbolFn};
pub use specfun::Quadrature;
pub use symbols::{Symbol, TestFunction};
pub use transforms::TransformConfig;

/// Complex scalar used throughout the crate.
pub type C64 = num_complex::Complex64;

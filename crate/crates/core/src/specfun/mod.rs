//! Self-contained special functions and quadrature.
//!
//! Everything here is pure and deterministic: Bessel functions of the first
//! kind for real order, the log-Gamma function, orthonormal Hermite and
//! Laguerre functions, and Gauss-Legendre rules. No caching is visible in
//! results, so unrestricted concurrent use is safe.

mod bessel;
mod gamma;
mod ortho;
mod quad;

pub use bessel::{bessel_j, bessel_j_prime};
pub use gamma::{complex_ln_gamma, log_gamma, regularized_gamma_p};
pub use ortho::{hermite_fn, hermite_fn_seq, laguerre_fn, laguerre_fn_seq};
pub use quad::{gauss_legendre, Quadrature};

pub(crate) use bessel::bessel_j_raw;


//! Special functions: log-scale modified Bessel K, digamma, and the
//! generalized inverse Gaussian expectations the E-step is built on.
//!
//! Everything here is pure and reentrant; samplers take a caller-supplied
//! random source.

mod bessel;
mod gamma;
mod gig;

pub use bessel::{d_log_bessel_k_dorder, log_bessel_k};
pub use gamma::{digamma, ln_gamma, EULER_MASCHERONI};
pub use gig::{gig_expectations, sample_gig, GigAltParams, GigMoments, GigParams};

pub(crate) use bessel::{d2_log_k_darg2, d_log_k_darg, d_log_k_dorder, log_k};

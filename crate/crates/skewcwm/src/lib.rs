//! Model-based clustering with cluster-weighted models whose covariate and
//! response-given-covariate densities are each Normal, skew-t, generalized
//! hyperbolic, variance-gamma, or normal-inverse-Gaussian, plus the matching
//! finite mixtures of regressions. Fitting is by EM; model choice by BIC.
//!
//! See the `examples/` directory for runnable walkthroughs of simulation,
//! fitting, model selection, and the CWM-versus-FMR comparison.

pub mod cli;
pub mod cwm;
pub mod data;
pub mod error;
pub mod fmr;
pub mod dists;
pub mod matcore;
pub mod numint;
pub mod toolkit;
pub mod specfun;

pub use error::{Error, Result};

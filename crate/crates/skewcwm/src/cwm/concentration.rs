//! Per-family concentration-parameter updates used inside the M-step.
//!
//! The skew-t and variance-gamma updates are bracketed root solves of their
//! score equations; the generalized hyperbolic pair is a fixed-point step in
//! the index followed by one safeguarded Newton step in the concentration;
//! the NIG update is closed-form.

use crate::specfun::{d2_log_k_darg2, d_log_k_darg, d_log_k_dorder, digamma, log_k};

pub const NU_MIN: f64 = 2.001;
pub const NU_MAX: f64 = 400.0;
pub const GAMMA_MIN: f64 = 1e-3;
pub const GAMMA_MAX: f64 = 400.0;
pub const OMEGA_MIN: f64 = 1e-3;
pub const OMEGA_MAX: f64 = 1e3;
/// Per-iteration bound on how far the GH index may move, as a magnitude
/// ratio.
const LAMBDA_STEP_FACTOR: f64 = 5.0;
const LAMBDA_CAP: f64 = 100.0;

/// Bisection on a strictly decreasing function over [lo, hi].
/// Returns the clamped endpoint with `clamped = true` when no sign change
/// exists in the bracket.
fn solve_decreasing(f: impl Fn(f64) -> f64, lo: f64, hi: f64) -> (f64, bool) {
    let flo = f(lo);
    let fhi = f(hi);
    if flo <= 0.0 {
        return (lo, true);
    }
    if fhi >= 0.0 {
        return (hi, true);
    }
    let (mut lo, mut hi) = (lo, hi);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-13 * hi.abs().max(1.0) {
            break;
        }
    }
    (0.5 * (lo + hi), false)
}

/// Degrees-of-freedom update for the skew-t: the root of
/// log(nu/2) + 1 - digamma(nu/2) - avg = 0 in [2.001, 400],
/// where `avg` is the responsibility-weighted mean of E[1/W] + E[log W].
pub fn update_nu(avg_b_plus_c: f64) -> (f64, bool) {
    solve_decreasing(
        |nu| (nu / 2.0).ln() + 1.0 - digamma(nu / 2.0).expect("nu/2 > 0") - avg_b_plus_c,
        NU_MIN,
        NU_MAX,
    )
}

/// Variance-gamma update: the root of
/// log(g) + 1 - digamma(g) + cbar - abar = 0 in [1e-3, 400].
pub fn update_gamma(abar: f64, cbar: f64) -> (f64, bool) {
    solve_decreasing(
        |g| g.ln() + 1.0 - digamma(g).expect("g > 0") + cbar - abar,
        GAMMA_MIN,
        GAMMA_MAX,
    )
}

/// Closed-form NIG update kappa = 1 / abar.
pub fn update_kappa(abar: f64) -> crate::error::Result<f64> {
    if !(abar > 0.0) {
        return Err(crate::error::Error::Domain(format!(
            "update_kappa requires a positive latent mean, got {abar}"
        )));
    }
    Ok(1.0 / abar)
}

/// Generalized hyperbolic (index, concentration) update.
///
/// Index: the fixed-point step
///   lambda_new = cbar * lambda_prev / (d/ds log K_s(omega_prev) at s=lambda_prev),
/// with its magnitude change limited to a factor of five per call and the
/// step accepted only if the index part of the objective does not increase.
///
/// Concentration: one Newton step on the convex map
///   q(s) = log K_lambda(s) + s (abar + bbar) / 2,
/// clamped to [1e-3, 1e3] and backtracked toward omega_prev until q does not
/// increase. Returns (lambda, omega, clamped_or_degenerate).
pub fn update_gh(
    lambda_prev: f64,
    omega_prev: f64,
    abar: f64,
    bbar: f64,
    cbar: f64,
) -> (f64, f64, bool) {
    let mut flagged = false;

    // index step
    let deriv = d_log_k_dorder(lambda_prev, omega_prev);
    let mut lambda = if deriv.abs() < 1e-12 {
        flagged = true;
        lambda_prev
    } else {
        cbar * lambda_prev / deriv
    };
    if !lambda.is_finite() {
        flagged = true;
        lambda = lambda_prev;
    } else {
        let band = lambda_prev.abs().max(1e-3);
        let mag = lambda
            .abs()
            .clamp(band / LAMBDA_STEP_FACTOR, band * LAMBDA_STEP_FACTOR)
            .min(LAMBDA_CAP);
        lambda = lambda.signum() * mag;
    }
    // accept only if the index objective log K_l(omega) - l*cbar does not rise
    let f_idx = |l: f64| log_k(l, omega_prev) - l * cbar;
    if f_idx(lambda) > f_idx(lambda_prev) + 1e-10 {
        lambda = lambda_prev;
    }

    // concentration step
    let q = |s: f64| log_k(lambda, s) + 0.5 * s * (abar + bbar);
    let d1 = d_log_k_darg(lambda, omega_prev) + 0.5 * (abar + bbar);
    let d2 = d2_log_k_darg2(lambda, omega_prev);
    let mut omega = if d2 > 0.0 && d1.is_finite() && d2.is_finite() {
        omega_prev - d1 / d2
    } else {
        flagged = true;
        omega_prev
    };
    if !omega.is_finite() {
        flagged = true;
        omega = omega_prev;
    }
    if omega < OMEGA_MIN || omega > OMEGA_MAX {
        flagged = true;
        omega = omega.clamp(OMEGA_MIN, OMEGA_MAX);
    }
    // backtrack halfway toward omega_prev while the objective increases
    let q_prev = q(omega_prev);
    let mut tries = 0;
    while q(omega) > q_prev + 1e-10 && tries < 20 {
        omega = 0.5 * (omega + omega_prev);
        tries += 1;
    }
    if tries == 20 {
        omega = omega_prev;
    }
    (lambda, omega, flagged)
}

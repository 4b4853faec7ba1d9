//! Modified Bessel function of the third kind, K_v(x), evaluated in log scale.
//!
//! Arguments spanning many orders of magnitude appear in the E-step, so every
//! consumer works with log K rather than K. Base values K_u, K_{u+1} for
//! |u| <= 1/2 come from Temme's series (x <= 2) or Steed's continued fraction
//! (x > 2); larger orders are reached by the forward recurrence
//! K_{v+1} = K_{v-1} + (2v/x) K_v, which is stable in the increasing
//! direction, with periodic rescaling to dodge overflow.

use crate::error::{Error, Result};
use crate::specfun::gamma::{ln_gamma, EULER_MASCHERONI};

const MAX_ITER: usize = 500;
/// Rescale threshold for the forward recurrence.
const BIG: f64 = 1e280;
const LN_BIG: f64 = 644.727_316_665_781_7; // ln(1e280)

fn gamma_fn(x: f64) -> f64 {
    ln_gamma(x).exp()
}

/// Temme's series for (K_u(x), K_{u+1}(x)), |u| <= 0.5, 0 < x <= 2.
fn temme_pair(u: f64, x: f64) -> (f64, f64) {
    debug_assert!(u.abs() <= 0.5 && x > 0.0 && x <= 2.0);
    let gp = gamma_fn(1.0 + u) - 1.0;
    let gm = gamma_fn(1.0 - u) - 1.0;

    let a = (x / 2.0).ln();
    let b = (u * a).exp();
    let sigma = -a * u;
    let c = if u.abs() < 2.0 * f64::EPSILON {
        1.0
    } else {
        (std::f64::consts::PI * u).sin() / (std::f64::consts::PI * u)
    };
    let d = if sigma.abs() < f64::EPSILON {
        1.0
    } else {
        sigma.sinh() / sigma
    };
    // (Gamma(1+u) - Gamma(1-u))/(2u) cancels catastrophically for small u;
    // switch to its even Taylor series there (odd Gamma(1+u) coefficients).
    let gamma1 = if u.abs() < 1e-3 {
        let u2 = u * u;
        c * (-EULER_MASCHERONI
            + u2 * (-0.907_479_076_080_886_3
                + u2 * (-0.981_995_068_903_145_2 + u2 * -0.996_001_760_442_431_5)))
    } else {
        (0.5 / u) * (gp - gm) * c
    };
    let gamma2 = (2.0 + gp + gm) * c / 2.0;

    let mut p = (gp + 1.0) / (2.0 * b);
    let mut q = (gm + 1.0) * b / 2.0;
    let mut f = (sigma.cosh() * gamma1 - d * a * gamma2) / c;
    let mut h = p;
    let mut coef = 1.0;
    let mut sum = f;
    let mut sum1 = h;

    for k in 1..MAX_ITER {
        let kf = k as f64;
        f = (kf * f + p + q) / (kf * kf - u * u);
        p /= kf - u;
        q /= kf + u;
        h = p - kf * f;
        coef *= x * x / (4.0 * kf);
        sum += coef * f;
        sum1 += coef * h;
        if (coef * f).abs() < sum.abs() * f64::EPSILON {
            break;
        }
    }
    (sum, 2.0 * sum1 / x)
}

/// Steed's continued fraction for the scaled pair
/// (K_u(x) e^x, K_{u+1}(x) e^x), |u| <= 0.5, x > 2.
fn cf2_pair_scaled(u: f64, x: f64) -> (f64, f64) {
    debug_assert!(u.abs() <= 0.5 && x > 1.0);
    let mut a = u * u - 0.25;
    let mut b = 2.0 * (x + 1.0);
    let mut d = 1.0 / b;
    let mut delta = d;
    let mut f = d;
    let mut prev = 0.0;
    let mut cur = 1.0;
    let mut q = -a;
    let mut c = -a;
    let mut s = 1.0 + q * delta;

    for k in 2..MAX_ITER {
        let kf = k as f64;
        a -= 2.0 * (kf - 1.0);
        b += 2.0;
        d = 1.0 / (a * d + b);
        delta *= b * d - 1.0;
        f += delta;

        let t = (prev - (b - 2.0) * cur) / a;
        prev = cur;
        cur = t;
        c *= -a / kf;
        q += c * t;
        s += q * delta;

        if (q * delta).abs() < s.abs() * f64::EPSILON / 2.0 {
            break;
        }
    }
    let ku = (std::f64::consts::PI / (2.0 * x)).sqrt() / s;
    let ku1 = ku * (0.5 + u + x + (u * u - 0.25) * f) / x;
    (ku, ku1)
}

/// Scaled base pair (K_u e^x, K_{u+1} e^x) for |u| <= 0.5.
fn scaled_base_pair(u: f64, x: f64) -> (f64, f64) {
    if x <= 2.0 {
        let (k0, k1) = temme_pair(u, x);
        let ex = x.exp();
        (k0 * ex, k1 * ex)
    } else {
        cf2_pair_scaled(u, x)
    }
}

/// log K_v(x) with v = |order| split as n + u, n integer, |u| <= 0.5.
fn log_k_abs(v: f64, x: f64) -> f64 {
    let n = v.round();
    let u = v - n;
    let (mut k0, mut k1) = scaled_base_pair(u, x);
    let mut log_scale = 0.0;
    let n = n as usize;
    if n == 0 {
        return k0.ln() + log_scale - x;
    }
    for j in 1..n {
        let next = k0 + (2.0 * (u + j as f64) / x) * k1;
        k0 = k1;
        k1 = next;
        if k1 > BIG {
            k0 /= BIG;
            k1 /= BIG;
            log_scale += LN_BIG;
        }
    }
    k1.ln() + log_scale - x
}

/// log K_order(arg) for any real order and arg > 0.
///
/// K is even in the order, so only |order| matters.
pub fn log_bessel_k(order: f64, arg: f64) -> Result<f64> {
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "log_bessel_k requires arg > 0, got {arg}"
        )));
    }
    if !order.is_finite() {
        return Err(Error::Domain(format!("non-finite order {order}")));
    }
    Ok(log_k_abs(order.abs(), arg))
}

/// Infallible variant for call sites that have already validated arg > 0.
#[inline]
pub(crate) fn log_k(order: f64, arg: f64) -> f64 {
    debug_assert!(arg > 0.0);
    log_k_abs(order.abs(), arg)
}

/// (log K_{lam-1}(x), log K_lam(x), log K_{lam+1}(x)) in one ladder pass.
pub(crate) fn log_k_trio(lam: f64, x: f64) -> (f64, f64, f64) {
    debug_assert!(x > 0.0);
    let mu = lam.abs();
    let n_f = mu.round();
    let u = mu - n_f;
    let n = n_f as usize;

    let (lo, mid, hi) = if n == 0 {
        // Orders are (mu-1, mu, mu+1) with mu < 1/2; the pair at base -mu
        // delivers K_mu (evenness) and K_{1-mu} = K_{mu-1} together.
        let (k_mu, k_mu_m1) = scaled_base_pair(-u, x);
        let k_mu_p1 = k_mu_m1 + (2.0 * u / x) * k_mu;
        (k_mu_m1.ln() - x, k_mu.ln() - x, k_mu_p1.ln() - x)
    } else {
        // Ladder from (K_u, K_{u+1}) up to index n+1, keeping three rungs.
        let (mut km1, mut k) = scaled_base_pair(u, x);
        let mut log_scale = 0.0;
        for j in 1..n {
            let next = km1 + (2.0 * (u + j as f64) / x) * k;
            km1 = k;
            k = next;
            if k > BIG {
                km1 /= BIG;
                k /= BIG;
                log_scale += LN_BIG;
            }
        }
        let kp1 = km1 + (2.0 * (u + n_f) / x) * k;
        (
            km1.ln() + log_scale - x,
            k.ln() + log_scale - x,
            kp1.ln() + log_scale - x,
        )
    };
    if lam >= 0.0 {
        (lo, mid, hi)
    } else {
        // K_{lam-1} = K_{|lam|+1} and K_{lam+1} = K_{|lam|-1}.
        (hi, mid, lo)
    }
}

/// Central-difference derivative of log K_s(arg) in the order s.
///
/// Step size 1e-6 * max(1, |order|); exact zero at order 0 by evenness.
pub fn d_log_bessel_k_dorder(order: f64, arg: f64) -> Result<f64> {
    if !(arg > 0.0) {
        return Err(Error::Domain(format!(
            "d_log_bessel_k_dorder requires arg > 0, got {arg}"
        )));
    }
    Ok(d_log_k_dorder(order, arg))
}

#[inline]
pub(crate) fn d_log_k_dorder(order: f64, arg: f64) -> f64 {
    let h = 1e-6 * order.abs().max(1.0);
    (log_k(order + h, arg) - log_k(order - h, arg)) / (2.0 * h)
}

/// d/dx log K_v(x) through the ratio identity
/// d/dx log K_v = v/x - K_{v+1}(x)/K_v(x).
pub(crate) fn d_log_k_darg(order: f64, arg: f64) -> f64 {
    let (_, lk, lkp1) = log_k_trio(order, arg);
    order / arg - (lkp1 - lk).exp()
}

/// Second argument-derivative of log K_v(x), from the same ratio:
/// with R = K_{v+1}/K_v, R' = R^2 - (2v+1)R/x - 1 and
/// (log K)'' = -v/x^2 - R' .
pub(crate) fn d2_log_k_darg2(order: f64, arg: f64) -> f64 {
    let (_, lk, lkp1) = log_k_trio(order, arg);
    let r = (lkp1 - lk).exp();
    let r_prime = r * r - (2.0 * order + 1.0) * r / arg - 1.0;
    -order / (arg * arg) - r_prime
}

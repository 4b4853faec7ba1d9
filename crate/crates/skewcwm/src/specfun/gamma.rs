//! Log-gamma and digamma.

use crate::error::{Error, Result};

pub const EULER_MASCHERONI: f64 = 0.577_215_664_901_532_9;

/// Lanczos coefficients (g = 7, n = 9).
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Natural log of the gamma function for x > 0.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0);
    if x < 0.5 {
        // Reflection keeps the Lanczos argument away from zero.
        let pi = std::f64::consts::PI;
        return (pi / (pi * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * std::f64::consts::PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Asymptotic expansion coefficients B_{2k}/(2k) for k = 1..7.
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
    1.0 / 12.0,
];

/// Digamma function for x > 0.
///
/// Shifts the argument above 10 with the recurrence and evaluates the
/// Bernoulli asymptotic series there.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain(format!("digamma requires x > 0, got {x}")));
    }
    let mut result = 0.0;
    let mut xx = x;
    while xx < 10.0 {
        result -= 1.0 / xx;
        xx += 1.0;
    }
    result += xx.ln() - 0.5 / xx;
    let inv_x2 = 1.0 / (xx * xx);
    let mut term = inv_x2;
    for c in DIGAMMA_ASYMP {
        result -= c * term;
        term *= inv_x2;
    }
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ln_gamma_known_values() {
        assert!((ln_gamma(1.0)).abs() < 1e-14);
        assert!((ln_gamma(2.0)).abs() < 1e-14);
        assert!((ln_gamma(5.0) - 24.0f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(0.5) - std::f64::consts::PI.sqrt().ln()).abs() < 1e-13);
        // Gamma(10.3) cross-checked against the recurrence.
        let lhs = ln_gamma(11.3);
        let rhs = ln_gamma(10.3) + 10.3f64.ln();
        assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn digamma_at_one_is_minus_euler() {
        assert!((digamma(1.0).unwrap() + EULER_MASCHERONI).abs() < 1e-12);
    }

    #[test]
    fn digamma_at_half() {
        // phi(1/2) = -gamma - 2 ln 2
        let expect = -EULER_MASCHERONI - 2.0 * 2.0f64.ln();
        assert!((digamma(0.5).unwrap() - expect).abs() < 1e-12);
    }

    #[test]
    fn digamma_recurrence_grid() {
        // phi(x+1) - phi(x) - 1/x = 0 to 1e-12 across [0.1, 100]
        let mut x = 0.1;
        while x <= 100.0 {
            let lhs = digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x;
            assert!(lhs.abs() < 1e-12, "recurrence residual {lhs} at x={x}");
            x *= 1.37;
        }
    }

    #[test]
    fn digamma_rejects_nonpositive() {
        assert!(digamma(0.0).is_err());
        assert!(digamma(-1.5).is_err());
    }
}

//! Small adaptive quadrature helper used by oracles and diagnostics.

/// Adaptive Simpson integration of `f` over [a, b].
///
/// `tol` is an absolute tolerance on the result; recursion depth is capped
/// at 50 splits per branch.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    simpson_rec(&f, a, b, fa, fm, fb, whole, tol, 50)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F: Fn(f64) -> f64>(
    f: &F,
    a: f64,
    b: f64,
    fa: f64,
    fm: f64,
    fb: f64,
    whole: f64,
    tol: f64,
    depth: u32,
) -> f64 {
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        left + right + delta / 15.0
    } else {
        simpson_rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + simpson_rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
}

/// Integral of `f` over the whole real line via the substitution x = tan(u).
pub fn integrate_real_line<F: Fn(f64) -> f64>(f: F, tol: f64) -> f64 {
    let half_pi = std::f64::consts::FRAC_PI_2;
    let eps = 1e-12;
    adaptive_simpson(
        |u| {
            let c = u.cos();
            let x = u.tan();
            let v = f(x) / (c * c);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        },
        -half_pi + eps,
        half_pi - eps,
        tol,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial_is_exact() {
        let got = adaptive_simpson(|x| x * x * x - 2.0 * x + 1.0, -1.0, 3.0, 1e-12);
        // antiderivative x^4/4 - x^2 + x
        let expect = (81.0 / 4.0 - 9.0 + 3.0) - (0.25 - 1.0 - 1.0);
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn gaussian_integral() {
        let got = adaptive_simpson(|x| (-x * x / 2.0).exp(), -12.0, 12.0, 1e-12);
        let expect = (2.0 * std::f64::consts::PI).sqrt();
        assert!((got - expect).abs() < 1e-10);
    }

    #[test]
    fn real_line_cauchy() {
        // standard Cauchy density integrates to 1
        let got = integrate_real_line(
            |x| 1.0 / (std::f64::consts::PI * (1.0 + x * x)),
            1e-11,
        );
        assert!((got - 1.0).abs() < 1e-8, "{got}");
    }
}

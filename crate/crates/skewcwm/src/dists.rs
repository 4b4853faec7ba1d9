//! The five component families — Normal, skew-t, generalized hyperbolic,
//! variance-gamma, normal-inverse-Gaussian — as log-densities, samplers,
//! and the conditional GIG laws of their latent mixing variables.
//!
//! Each skewed family is the normal variance-mean mixture
//! X = mu + W alpha + sqrt(W) U with U ~ N(0, Sigma) and
//!   skew-t:  W ~ IGamma(nu/2, nu/2)
//!   GH:      W ~ GIG(omega, omega, lambda)      (eta fixed at 1)
//!   VG:      W ~ Gamma(gamma, gamma)
//!   NIG:     W ~ GIG(kappa^2, 1, -1/2)
//! which makes every log-density the same template
//!   t + log A + (lt/2) (log dt - log rt) + log K_lt(sqrt(rt dt))
//! over the family-shifted triple (rt, dt, lt); that triple is exactly the
//! conditional GIG law of W given the observation.

use nalgebra::DVector;
use rand::Rng;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::matcore::SpdMatrix;
use crate::specfun::{gig_expectations, ln_gamma, log_k, sample_gig, GigParams};

/// Numerical floors shared across the engine (see the density template:
/// the VG kernel diverges at delta = 0, and a zero skew norm degenerates
/// the skew-t conditional law).
pub const DELTA_FLOOR: f64 = 1e-10;
pub const RHO_FLOOR: f64 = 1e-10;

const LN_2PI: f64 = 1.837_877_066_409_345_5;
const LN_2: f64 = std::f64::consts::LN_2;

/// Family tag without concentration parameters.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Family {
    Normal,
    SkewT,
    GenHyperbolic,
    VarianceGamma,
    NormalInvGaussian,
}

impl Family {
    pub const ALL: [Family; 5] = [
        Family::Normal,
        Family::SkewT,
        Family::GenHyperbolic,
        Family::VarianceGamma,
        Family::NormalInvGaussian,
    ];

    pub fn code(&self) -> &'static str {
        match self {
            Family::Normal => "N",
            Family::SkewT => "ST",
            Family::GenHyperbolic => "GH",
            Family::VarianceGamma => "VG",
            Family::NormalInvGaussian => "NIG",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "N" | "NORMAL" => Ok(Family::Normal),
            "ST" | "SKEWT" | "SKEW-T" => Ok(Family::SkewT),
            "GH" => Ok(Family::GenHyperbolic),
            "VG" => Ok(Family::VarianceGamma),
            "NIG" => Ok(Family::NormalInvGaussian),
            other => Err(Error::Usage(format!("unknown family '{other}'"))),
        }
    }

    pub fn is_skewed(&self) -> bool {
        !matches!(self, Family::Normal)
    }

    /// Number of concentration parameters carried by the family.
    pub fn n_concentration(&self) -> usize {
        match self {
            Family::Normal => 0,
            Family::GenHyperbolic => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.code())
    }
}

/// A family together with its concentration parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DistKind {
    Normal,
    SkewT { nu: f64 },
    GenHyperbolic { omega: f64, lambda: f64 },
    VarianceGamma { gamma: f64 },
    NormalInvGaussian { kappa: f64 },
}

impl DistKind {
    pub fn family(&self) -> Family {
        match self {
            DistKind::Normal => Family::Normal,
            DistKind::SkewT { .. } => Family::SkewT,
            DistKind::GenHyperbolic { .. } => Family::GenHyperbolic,
            DistKind::VarianceGamma { .. } => Family::VarianceGamma,
            DistKind::NormalInvGaussian { .. } => Family::NormalInvGaussian,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self {
            DistKind::Normal => true,
            DistKind::SkewT { nu } => *nu > 0.0 && nu.is_finite(),
            DistKind::GenHyperbolic { omega, lambda } => {
                *omega > 0.0 && omega.is_finite() && lambda.is_finite()
            }
            DistKind::VarianceGamma { gamma } => *gamma > 0.0 && gamma.is_finite(),
            DistKind::NormalInvGaussian { kappa } => *kappa > 0.0 && kappa.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::InvalidParam(format!("invalid concentration in {self:?}")))
        }
    }

    /// Starting concentration used when a fit initializes a family.
    pub fn default_for(family: Family) -> DistKind {
        match family {
            Family::Normal => DistKind::Normal,
            Family::SkewT => DistKind::SkewT { nu: 10.0 },
            Family::GenHyperbolic => DistKind::GenHyperbolic { omega: 1.0, lambda: 0.5 },
            Family::VarianceGamma => DistKind::VarianceGamma { gamma: 2.0 },
            Family::NormalInvGaussian => DistKind::NormalInvGaussian { kappa: 1.0 },
        }
    }
}

/// One location/scatter/skew block of a component, in either the covariate
/// or the response role.
#[derive(Clone, Debug)]
pub struct ComponentBlock {
    pub location: DVector<f64>,
    pub scatter: SpdMatrix,
    pub skew: DVector<f64>,
    pub kind: DistKind,
}

impl ComponentBlock {
    pub fn new(
        location: DVector<f64>,
        scatter: SpdMatrix,
        skew: DVector<f64>,
        kind: DistKind,
    ) -> Result<Self> {
        kind.validate()?;
        if location.len() != scatter.dim() || skew.len() != scatter.dim() {
            return Err(Error::Dimension(format!(
                "block dims: location {}, skew {}, scatter {}",
                location.len(),
                skew.len(),
                scatter.dim()
            )));
        }
        if kind.family() == Family::Normal && skew.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidParam(
                "Normal blocks must carry a zero skew vector".into(),
            ));
        }
        Ok(Self { location, scatter, skew, kind })
    }

    /// Symmetric Normal block.
    pub fn normal(location: DVector<f64>, scatter: SpdMatrix) -> Result<Self> {
        let dim = scatter.dim();
        Self::new(location, scatter, DVector::zeros(dim), DistKind::Normal)
    }

    pub fn dim(&self) -> usize {
        self.scatter.dim()
    }

    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point has dim {}, block has dim {}",
                x.len(),
                self.dim()
            )));
        }
        let prep = PreparedDensity::new(self);
        Ok(prep.log_pdf_diff(&(x - &self.location)))
    }

    /// One draw through the variance-mean mixture construction.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DVector<f64> {
        let w = sample_mixing_weight(&self.kind, rng);
        let std_normal = rand_distr::StandardNormal;
        let z = DVector::from_fn(self.dim(), |_, _| std_normal.sample(rng));
        let u = self.scatter.correlate(&z);
        &self.location + &self.skew * w + u * w.sqrt()
    }
}

/// The family-shifted GIG triple (a = rho~, b = delta~, lambda~) shared by
/// the density template and the conditional law of the latent W.
#[inline]
fn gig_shift(kind: &DistKind, delta: f64, rho: f64, dim: usize) -> (f64, f64, f64) {
    let p = dim as f64;
    match *kind {
        DistKind::SkewT { nu } => (rho, delta + nu, -(nu + p) / 2.0),
        DistKind::GenHyperbolic { omega, lambda } => {
            (rho + omega, delta + omega, lambda - p / 2.0)
        }
        DistKind::VarianceGamma { gamma } => (rho + 2.0 * gamma, delta, gamma - p / 2.0),
        DistKind::NormalInvGaussian { kappa } => {
            (rho + kappa * kappa, delta + 1.0, -(1.0 + p) / 2.0)
        }
        DistKind::Normal => unreachable!("gig_shift on a Normal kind"),
    }
}

/// Conditional law of the latent mixing variable given its observation:
/// W | x ~ GIG over the family-shifted triple, with the shared floors
/// applied so the parameters stay in-domain.
pub fn conditional_gig_law(
    kind: &DistKind,
    delta: f64,
    rho: f64,
    dim: usize,
) -> Result<GigParams> {
    if !kind.family().is_skewed() {
        return Err(Error::InvalidParam(
            "conditional_gig_law is defined for skewed families only".into(),
        ));
    }
    kind.validate()?;
    if delta < 0.0 || rho < 0.0 || dim == 0 {
        return Err(Error::Domain(format!(
            "conditional_gig_law needs delta >= 0, rho >= 0, dim >= 1; got {delta}, {rho}, {dim}"
        )));
    }
    let (a, b, lambda) = gig_shift(kind, delta.max(DELTA_FLOOR), rho.max(RHO_FLOOR), dim);
    GigParams::new(a.max(RHO_FLOOR), b.max(DELTA_FLOOR), lambda)
}

/// One draw of the latent mixing weight W for the family; Normal is the
/// degenerate W = 1.
pub fn sample_mixing_weight<R: Rng + ?Sized>(kind: &DistKind, rng: &mut R) -> f64 {
    match *kind {
        DistKind::Normal => 1.0,
        DistKind::SkewT { nu } => {
            // W ~ IGamma(nu/2, nu/2): invert a Gamma(shape nu/2, rate nu/2).
            let g = rand_distr::Gamma::new(nu / 2.0, 2.0 / nu).expect("valid nu");
            1.0 / g.sample(rng)
        }
        DistKind::GenHyperbolic { omega, lambda } => {
            sample_gig(&GigParams { a: omega, b: omega, lambda }, rng)
        }
        DistKind::VarianceGamma { gamma } => {
            let g = rand_distr::Gamma::new(gamma, 1.0 / gamma).expect("valid gamma");
            g.sample(rng)
        }
        DistKind::NormalInvGaussian { kappa } => {
            sample_gig(&GigParams { a: kappa * kappa, b: 1.0, lambda: -0.5 }, rng)
        }
    }
}

/// Log-density of one observation under the family.
pub fn log_density(
    kind: &DistKind,
    x: &DVector<f64>,
    location: &DVector<f64>,
    scatter: &SpdMatrix,
    skew: &DVector<f64>,
) -> Result<f64> {
    let block = ComponentBlock::new(location.clone(), scatter.clone(), skew.clone(), *kind)?;
    block.log_density(x)
}

/// Draw through the variance-mean mixture construction.
pub fn sample_vector<R: Rng + ?Sized>(block: &ComponentBlock, rng: &mut R) -> DVector<f64> {
    block.sample(rng)
}

/// Per-block quantities reused across observations: Sigma^{-1} alpha, the
/// skew norm rho, and the family's log normalizing constant.
#[derive(Clone, Debug)]
pub struct PreparedDensity {
    pub kind: DistKind,
    pub scatter: SpdMatrix,
    pub siginv_skew: DVector<f64>,
    pub rho: f64,
    pub log_norm: f64,
    pub dim: usize,
}

impl PreparedDensity {
    pub fn new(block: &ComponentBlock) -> Self {
        let dim = block.dim();
        let p = dim as f64;
        let scatter = block.scatter.clone();
        let siginv_skew = scatter
            .solve_vec(&block.skew)
            .expect("dims validated at block construction");
        let rho = block.skew.dot(&siginv_skew).max(0.0);
        let base = -0.5 * p * LN_2PI - 0.5 * scatter.log_det();
        let log_norm = match block.kind {
            DistKind::Normal => base,
            DistKind::SkewT { nu } => {
                LN_2 + 0.5 * nu * (nu / 2.0).ln() - ln_gamma(nu / 2.0) + base
            }
            DistKind::GenHyperbolic { omega, lambda } => base - log_k(lambda, omega),
            DistKind::VarianceGamma { gamma } => {
                LN_2 + gamma * gamma.ln() - ln_gamma(gamma) + base
            }
            DistKind::NormalInvGaussian { kappa } => LN_2 + kappa - 0.5 * LN_2PI + base,
        };
        Self { kind: block.kind, scatter, siginv_skew, rho, log_norm, dim }
    }

    /// Log-density at a pre-centered point, plus the floored Mahalanobis
    /// distance so E-step callers can reuse it for the conditional law.
    #[inline]
    pub fn log_pdf_delta(&self, diff: &DVector<f64>) -> (f64, f64) {
        if matches!(self.kind, DistKind::Normal) {
            let delta = self.scatter.quad_form(diff);
            return (self.log_norm - 0.5 * delta, delta);
        }
        let delta = self.scatter.quad_form(diff).max(DELTA_FLOOR);
        let t = diff.dot(&self.siginv_skew);
        let (rt, dt, lt) = gig_shift(&self.kind, delta, self.rho, self.dim);
        let lp = if rt < 1e-12 && lt < 0.0 {
            // rho -> 0 limit (symmetric skew-t): the Bessel small-argument
            // form cancels rho exactly and leaves the Student-t kernel.
            self.log_norm + t + lt * (dt / 2.0).ln() - LN_2 + ln_gamma(-lt)
        } else {
            let rt = rt.max(RHO_FLOOR);
            self.log_norm + t + 0.5 * lt * (dt.ln() - rt.ln()) + log_k(lt, (rt * dt).sqrt())
        };
        (lp, delta)
    }

    pub fn log_pdf_diff(&self, diff: &DVector<f64>) -> f64 {
        self.log_pdf_delta(diff).0
    }

    /// Latent-moment triple (E[W], E[1/W], E[log W]) of the conditional GIG
    /// law at the given floored delta.
    #[inline]
    pub fn latent_moments(&self, delta: f64) -> crate::specfun::GigMoments {
        let (rt, dt, lt) = gig_shift(&self.kind, delta, self.rho, self.dim);
        gig_expectations(&GigParams {
            a: rt.max(RHO_FLOOR),
            b: dt.max(DELTA_FLOOR),
            lambda: lt,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numint::integrate_real_line;
    use nalgebra::{dmatrix, dvector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn spd1(v: f64) -> SpdMatrix {
        SpdMatrix::new(dmatrix![v]).unwrap()
    }

    #[test]
    fn normal_log_density_at_mode() {
        let block = ComponentBlock::normal(dvector![1.0, -2.0], SpdMatrix::identity(2)).unwrap();
        let lp = block.log_density(&dvector![1.0, -2.0]).unwrap();
        assert!((lp + LN_2PI).abs() < 1e-12);
    }

    #[test]
    fn skew_t_with_zero_skew_matches_student_t() {
        // Textbook univariate t(nu) log-density oracle.
        let t_logpdf = |x: f64, nu: f64| {
            ln_gamma((nu + 1.0) / 2.0)
                - ln_gamma(nu / 2.0)
                - 0.5 * (nu * std::f64::consts::PI).ln()
                - 0.5 * (nu + 1.0) * (1.0 + x * x / nu).ln()
        };
        let block = ComponentBlock::new(
            dvector![0.0],
            spd1(1.0),
            dvector![0.0],
            DistKind::SkewT { nu: 5.0 },
        )
        .unwrap();
        for &x in &[0.0, 1.0, 2.0] {
            let lp = block.log_density(&dvector![x]).unwrap();
            let oracle = t_logpdf(x, 5.0);
            assert!((lp - oracle).abs() < 1e-9, "x={x}: {lp} vs {oracle}");
        }
    }

    #[test]
    fn multivariate_zero_skew_t_matches_formula() {
        // p = 2 with a non-trivial Sigma, hand-rolled mvt oracle.
        let sig = dmatrix![2.0, 0.5; 0.5, 1.0];
        let det = 2.0 * 1.0 - 0.25;
        let inv = dmatrix![1.0/det * 1.0, -0.5/det; -0.5/det, 2.0/det];
        let nu = 4.5;
        let mu = dvector![0.3, -0.2];
        let block = ComponentBlock::new(
            mu.clone(),
            SpdMatrix::new(sig).unwrap(),
            dvector![0.0, 0.0],
            DistKind::SkewT { nu },
        )
        .unwrap();
        for &(x0, x1) in &[(0.0, 0.0), (1.2, -0.7), (-2.0, 3.0)] {
            let x = dvector![x0, x1];
            let d = (&x - &mu).transpose() * &inv * (&x - &mu);
            let delta = d[(0, 0)];
            let oracle = ln_gamma((nu + 2.0) / 2.0)
                - ln_gamma(nu / 2.0)
                - (nu * std::f64::consts::PI).ln()
                - 0.5 * det.ln()
                - 0.5 * (nu + 2.0) * (1.0 + delta / nu).ln();
            let lp = block.log_density(&x).unwrap();
            assert!((lp - oracle).abs() < 1e-9, "{lp} vs {oracle}");
        }
    }

    #[test]
    fn skewed_densities_normalize_on_the_line() {
        let cases = vec![
            DistKind::SkewT { nu: 5.0 },
            DistKind::GenHyperbolic { omega: 2.0, lambda: 0.5 },
            DistKind::VarianceGamma { gamma: 3.0 },
            DistKind::NormalInvGaussian { kappa: 1.5 },
        ];
        for kind in cases {
            let block =
                ComponentBlock::new(dvector![0.4], spd1(1.3), dvector![0.8], kind).unwrap();
            let mass = integrate_real_line(
                |x| block.log_density(&dvector![x]).unwrap().exp(),
                1e-10,
            );
            assert!((mass - 1.0).abs() < 1e-6, "{kind:?} integrates to {mass}");
        }
    }

    #[test]
    fn conditional_laws_match_the_stated_substitutions() {
        // skew-t: delta=2, rho=1, nu=7, p=3 -> GIG(1, 9, -5)
        let g = conditional_gig_law(&DistKind::SkewT { nu: 7.0 }, 2.0, 1.0, 3).unwrap();
        assert_eq!((g.a, g.b, g.lambda), (1.0, 9.0, -5.0));
        // VG: delta floored, rho=0, gamma=4, p=2 -> GIG(8, floor, 3)
        let g = conditional_gig_law(&DistKind::VarianceGamma { gamma: 4.0 }, 0.0, 0.0, 2).unwrap();
        assert!((g.a - 8.0).abs() < 1e-9);
        assert!(g.b > 0.0 && g.b <= 1e-9);
        assert_eq!(g.lambda, 3.0);
        // NIG: delta=1, rho=4, kappa=2, p=2 -> GIG(8, 2, -1.5)
        let g =
            conditional_gig_law(&DistKind::NormalInvGaussian { kappa: 2.0 }, 1.0, 4.0, 2).unwrap();
        assert_eq!((g.a, g.b, g.lambda), (8.0, 2.0, -1.5));
        // GH: delta=0.5, rho=0.25, omega=2, lambda=0.3, p=3 -> GIG(2.25, 2.5, -1.2)
        let g = conditional_gig_law(
            &DistKind::GenHyperbolic { omega: 2.0, lambda: 0.3 },
            0.5,
            0.25,
            3,
        )
        .unwrap();
        assert!((g.a - 2.25).abs() < 1e-12 && (g.b - 2.5).abs() < 1e-12);
        assert!((g.lambda + 1.2).abs() < 1e-12);
        // Normal is a usage error
        assert!(conditional_gig_law(&DistKind::Normal, 1.0, 1.0, 2).is_err());
    }

    #[test]
    fn conditional_law_reproduces_posterior_mean_by_quadrature() {
        use crate::numint::adaptive_simpson;
        // E[W | x] by joint quadrature over w, against the GIG expectations.
        let cases = vec![
            DistKind::SkewT { nu: 6.0 },
            DistKind::GenHyperbolic { omega: 1.5, lambda: -0.4 },
            DistKind::VarianceGamma { gamma: 2.5 },
            DistKind::NormalInvGaussian { kappa: 2.0 },
        ];
        for kind in cases {
            let mu = 0.2;
            let sig2 = 1.4;
            let alpha = 0.9;
            let x: f64 = 1.7;
            let delta = (x - mu) * (x - mu) / sig2;
            let rho = alpha * alpha / sig2;
            // mixing density h(w), unnormalized is fine: shared constant cancels.
            let log_h = |w: f64| -> f64 {
                match kind {
                    DistKind::SkewT { nu } => {
                        (-nu / 2.0 - 1.0) * w.ln() - nu / (2.0 * w)
                    }
                    DistKind::GenHyperbolic { omega, lambda } => {
                        (lambda - 1.0) * w.ln() - omega / 2.0 * (w + 1.0 / w)
                    }
                    DistKind::VarianceGamma { gamma } => (gamma - 1.0) * w.ln() - gamma * w,
                    DistKind::NormalInvGaussian { kappa } => {
                        -1.5 * w.ln() - 0.5 * (kappa * kappa * w + 1.0 / w)
                    }
                    DistKind::Normal => unreachable!(),
                }
            };
            let joint = |w: f64| -> f64 {
                // N(x; mu + w alpha, w sig2) kernel x h(w)
                let r = x - mu - w * alpha;
                (-0.5 * (w * sig2).ln() - r * r / (2.0 * w * sig2) + log_h(w)).exp()
            };
            let num = adaptive_simpson(|s: f64| { let w = s.exp(); w * joint(w) * w }, -30.0, 8.0, 1e-13);
            let den = adaptive_simpson(|s: f64| { let w = s.exp(); joint(w) * w }, -30.0, 8.0, 1e-13);
            let oracle = num / den;
            let law = conditional_gig_law(&kind, delta, rho, 1).unwrap();
            let m = gig_expectations(&law);
            assert!(
                (m.e_w - oracle).abs() < 1e-6 * oracle.abs(),
                "{kind:?}: {} vs {oracle}",
                m.e_w
            );
        }
    }

    #[test]
    fn mixing_weight_means() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 100_000;
        let run = |kind: DistKind, rng: &mut ChaCha8Rng| -> (f64, f64) {
            let mut s = 0.0;
            let mut s2 = 0.0;
            for _ in 0..n {
                let w = sample_mixing_weight(&kind, rng);
                s += w;
                s2 += w * w;
            }
            let mean = s / n as f64;
            let sd = (s2 / n as f64 - mean * mean).max(0.0).sqrt();
            (mean, sd / (n as f64).sqrt())
        };
        // Normal is degenerate at 1
        assert_eq!(sample_mixing_weight(&DistKind::Normal, &mut rng), 1.0);
        // VG gamma=4: mean 1
        let (m, se) = run(DistKind::VarianceGamma { gamma: 4.0 }, &mut rng);
        assert!((m - 1.0).abs() < 3.0 * se, "VG mean {m} se {se}");
        // skew-t nu=7: mean nu/(nu-2) = 7/5
        let (m, se) = run(DistKind::SkewT { nu: 7.0 }, &mut rng);
        assert!((m - 1.4).abs() < 3.0 * se, "ST mean {m} se {se}");
    }

    #[test]
    fn sample_vector_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        // Normal with alpha = 0: sample covariance ~ Sigma within 5%
        let sig = dmatrix![1.0, 0.3; 0.3, 2.0];
        let block = ComponentBlock::normal(dvector![0.0, 0.0], SpdMatrix::new(sig.clone()).unwrap())
            .unwrap();
        let n = 100_000;
        let mut cov = nalgebra::DMatrix::<f64>::zeros(2, 2);
        let mut mean = dvector![0.0, 0.0];
        let draws: Vec<_> = (0..n).map(|_| block.sample(&mut rng)).collect();
        for d in &draws {
            mean += d;
        }
        mean /= n as f64;
        for d in &draws {
            let c = d - &mean;
            cov += &c * c.transpose();
        }
        cov /= n as f64 - 1.0;
        for i in 0..2 {
            for j in 0..2 {
                assert!(
                    (cov[(i, j)] - sig[(i, j)]).abs() < 0.05 * sig[(i, i)].max(sig[(j, j)]),
                    "cov[{i},{j}] = {}",
                    cov[(i, j)]
                );
            }
        }

        // skew-t: mean = mu + E[W] alpha
        let st = ComponentBlock::new(
            dvector![1.0, -1.0],
            SpdMatrix::identity(2),
            dvector![0.8, -0.4],
            DistKind::SkewT { nu: 7.0 },
        )
        .unwrap();
        let mut st_mean = dvector![0.0, 0.0];
        for _ in 0..n {
            st_mean += st.sample(&mut rng);
        }
        st_mean /= n as f64;
        let expect = dvector![1.0 + 1.4 * 0.8, -1.0 - 1.4 * 0.4];
        assert!((&st_mean - &expect).norm() < 0.05, "mean {st_mean:?} expect {expect:?}");
    }

    #[test]
    fn mixture_representation_identity() {
        // Averaging the conditional normal kernel over sampled W reproduces
        // the closed-form density (the variance-mean mixture relation).
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let kind = DistKind::NormalInvGaussian { kappa: 1.2 };
        let block =
            ComponentBlock::new(dvector![0.0], spd1(1.0), dvector![1.0], kind).unwrap();
        let x = dvector![1.3];
        let target = block.log_density(&x).unwrap().exp();
        let n = 200_000;
        let mut s = 0.0;
        let mut s2 = 0.0;
        for _ in 0..n {
            let w = sample_mixing_weight(&kind, &mut rng);
            let r = x[0] - 0.0 - w * 1.0;
            let k = (-(r * r) / (2.0 * w)).exp() / (2.0 * std::f64::consts::PI * w).sqrt();
            s += k;
            s2 += k * k;
        }
        let mean = s / n as f64;
        let se = ((s2 / n as f64 - mean * mean).max(0.0) / n as f64).sqrt();
        assert!((mean - target).abs() < 3.0 * se, "MC {mean} vs {target} (se {se})");
    }
}

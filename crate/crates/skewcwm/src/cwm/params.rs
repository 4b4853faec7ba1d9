//! Parameter containers for cluster-weighted models and the shared fit
//! report.

use nalgebra::{DMatrix, DVector};

use crate::data::DatasetXY;
use crate::dists::{ComponentBlock, DistKind, Family, PreparedDensity};
use crate::error::{Error, Result};
use crate::matcore::SpdMatrix;

/// Which family pair is fitted, with the problem dimensions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CwmSpec {
    pub x_family: Family,
    pub y_family: Family,
    pub n_groups: usize,
    pub d: usize,
    pub p: usize,
}

impl CwmSpec {
    pub fn new(x_family: Family, y_family: Family, n_groups: usize, d: usize, p: usize) -> Result<Self> {
        if n_groups == 0 || d == 0 || p == 0 {
            return Err(Error::InvalidParam(format!(
                "CwmSpec needs G, d, p >= 1; got G={n_groups}, d={d}, p={p}"
            )));
        }
        Ok(Self { x_family, y_family, n_groups, d, p })
    }

    pub fn code(&self) -> String {
        format!("{}-{}", self.x_family.code(), self.y_family.code())
    }
}

/// Regression block of one component: Y | x with location B' x*.
#[derive(Clone, Debug)]
pub struct RegressionBlock {
    /// (d+1) x p coefficient matrix; row 0 is the intercept.
    pub coeffs: DMatrix<f64>,
    pub scatter: SpdMatrix,
    pub skew: DVector<f64>,
    pub kind: DistKind,
}

impl RegressionBlock {
    pub fn new(
        coeffs: DMatrix<f64>,
        scatter: SpdMatrix,
        skew: DVector<f64>,
        kind: DistKind,
    ) -> Result<Self> {
        kind.validate()?;
        if coeffs.ncols() != scatter.dim() || skew.len() != scatter.dim() {
            return Err(Error::Dimension(format!(
                "regression block dims: coeffs {}x{}, scatter {}, skew {}",
                coeffs.nrows(),
                coeffs.ncols(),
                scatter.dim(),
                skew.len()
            )));
        }
        if kind.family() == Family::Normal && skew.iter().any(|v| *v != 0.0) {
            return Err(Error::InvalidParam(
                "Normal response blocks must carry a zero skew vector".into(),
            ));
        }
        Ok(Self { coeffs, scatter, skew, kind })
    }

    /// Covariate dimension implied by the coefficient matrix.
    pub fn d(&self) -> usize {
        self.coeffs.nrows() - 1
    }

    pub fn p(&self) -> usize {
        self.coeffs.ncols()
    }

    /// Conditional location B' x*.
    pub fn location(&self, xstar: &DVector<f64>) -> DVector<f64> {
        self.coeffs.tr_mul(xstar)
    }

    pub(crate) fn prepared(&self) -> PreparedDensity {
        let block = ComponentBlock {
            location: DVector::zeros(self.p()),
            scatter: self.scatter.clone(),
            skew: self.skew.clone(),
            kind: self.kind,
        };
        PreparedDensity::new(&block)
    }
}

/// One mixture component: covariate block plus regression block.
#[derive(Clone, Debug)]
pub struct GroupParams {
    pub cov: ComponentBlock,
    pub reg: RegressionBlock,
}

/// Full parameter set of a G-component cluster-weighted model.
#[derive(Clone, Debug)]
pub struct CwmParams {
    pub weights: Vec<f64>,
    pub groups: Vec<GroupParams>,
}

impl CwmParams {
    pub fn validate(&self, spec: &CwmSpec) -> Result<()> {
        if self.weights.len() != spec.n_groups || self.groups.len() != spec.n_groups {
            return Err(Error::Dimension(format!(
                "{} weights / {} groups for G={}",
                self.weights.len(),
                self.groups.len(),
                spec.n_groups
            )));
        }
        let sum: f64 = self.weights.iter().sum();
        if self.weights.iter().any(|w| !(*w > 0.0)) || (sum - 1.0).abs() > 1e-8 {
            return Err(Error::InvalidParam(format!(
                "mixing weights must be positive and sum to 1, got {:?}",
                self.weights
            )));
        }
        for g in &self.groups {
            if g.cov.dim() != spec.d
                || g.reg.p() != spec.p
                || g.reg.d() != spec.d
                || g.cov.kind.family() != spec.x_family
                || g.reg.kind.family() != spec.y_family
            {
                return Err(Error::Dimension("group blocks do not match the spec".into()));
            }
        }
        Ok(())
    }

    /// log p_X(x | phi_g) + log p_Y(y | x, theta_g) for one component.
    pub fn joint_log_density(
        &self,
        g: usize,
        x: &DVector<f64>,
        y: &DVector<f64>,
    ) -> Result<f64> {
        let group = self
            .groups
            .get(g)
            .ok_or_else(|| Error::Dimension(format!("group index {g} out of range")))?;
        let lpx = group.cov.log_density(x)?;
        let mut xstar = DVector::zeros(x.len() + 1);
        xstar[0] = 1.0;
        xstar.rows_mut(1, x.len()).copy_from(x);
        let resid = y - group.reg.location(&xstar);
        if resid.len() != group.reg.p() {
            return Err(Error::Dimension("response dimension mismatch".into()));
        }
        let lpy = group.reg.prepared().log_pdf_diff(&resid);
        Ok(lpx + lpy)
    }
}

/// Finite mixture of regressions: the response blocks only.
#[derive(Clone, Debug)]
pub struct FmrParams {
    pub weights: Vec<f64>,
    pub groups: Vec<RegressionBlock>,
}

/// Responsibilities and latent GIG expectations from one E-step.
///
/// In the paper's notation, `w_mom` holds (a, b, c) = (E[W], E[1/W],
/// E[log W]) for a skewed covariate block and `v_mom` holds (k, m, n) for a
/// skewed response block; all matrices are N x G.
#[derive(Clone, Debug)]
pub struct EStepCache {
    pub z: DMatrix<f64>,
    pub w_mom: Option<LatentMoments>,
    pub v_mom: Option<LatentMoments>,
}

#[derive(Clone, Debug)]
pub struct LatentMoments {
    pub e: DMatrix<f64>,
    pub e_inv: DMatrix<f64>,
    pub e_log: DMatrix<f64>,
}

impl LatentMoments {
    pub fn unit(n: usize, g: usize) -> Self {
        Self {
            e: DMatrix::from_element(n, g, 1.0),
            e_inv: DMatrix::from_element(n, g, 1.0),
            e_log: DMatrix::zeros(n, g),
        }
    }
}

/// EM loop controls.
#[derive(Clone, Copy, Debug)]
pub struct FitControls {
    /// Relative observed log-likelihood change below which the loop stops.
    pub tol: f64,
    pub max_iter: usize,
    /// Stop on the Aitken-accelerated asymptotic estimate instead of the
    /// plain relative change.
    pub use_aitken: bool,
}

impl Default for FitControls {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 1000, use_aitken: false }
    }
}

/// Non-fatal events observed during a fit.
#[derive(Clone, Copy, Debug, Default)]
pub struct Diagnostics {
    /// A concentration update hit its bracket bound.
    pub clamped_concentration: bool,
    /// A scatter or Gram matrix needed ridge regularization.
    pub regularized_scatter: bool,
    /// A skewed location update degenerated to the symmetric form.
    pub symmetric_fallback: bool,
}

impl Diagnostics {
    pub(crate) fn merge(&mut self, other: Diagnostics) {
        self.clamped_concentration |= other.clamped_concentration;
        self.regularized_scatter |= other.regularized_scatter;
        self.symmetric_fallback |= other.symmetric_fallback;
    }
}

/// Parameters held by a finished fit.
#[derive(Clone, Debug)]
pub enum FittedParams {
    Cwm(CwmParams),
    Fmr(FmrParams),
}

impl FittedParams {
    pub fn weights(&self) -> &[f64] {
        match self {
            FittedParams::Cwm(p) => &p.weights,
            FittedParams::Fmr(p) => &p.weights,
        }
    }

    pub fn as_cwm(&self) -> Option<&CwmParams> {
        match self {
            FittedParams::Cwm(p) => Some(p),
            FittedParams::Fmr(_) => None,
        }
    }

    pub fn as_fmr(&self) -> Option<&FmrParams> {
        match self {
            FittedParams::Fmr(p) => Some(p),
            FittedParams::Cwm(_) => None,
        }
    }
}

/// Converged parameters, trace, classification, and score of one fit.
#[derive(Clone, Debug)]
pub struct FitReport {
    pub params: FittedParams,
    pub loglik_trace: Vec<f64>,
    pub z_final: DMatrix<f64>,
    pub map_labels: Vec<usize>,
    pub bic: f64,
    pub n_params: usize,
    pub converged: bool,
    pub n_iter: usize,
    pub diagnostics: Diagnostics,
}

impl FitReport {
    pub fn loglik(&self) -> f64 {
        *self.loglik_trace.last().expect("non-empty trace")
    }
}

/// The intercept-augmented design row (1, x')'.
pub fn design_row(x: &DVector<f64>) -> DVector<f64> {
    let mut xstar = DVector::zeros(x.len() + 1);
    xstar[0] = 1.0;
    xstar.rows_mut(1, x.len()).copy_from(x);
    xstar
}

/// Row-stochastic check for soft label matrices.
pub(crate) fn validate_soft_labels(z: &DMatrix<f64>, n: usize, g: usize) -> Result<()> {
    if z.nrows() != n || z.ncols() != g {
        return Err(Error::Dimension(format!(
            "soft labels are {}x{}, expected {}x{}",
            z.nrows(),
            z.ncols(),
            n,
            g
        )));
    }
    for i in 0..n {
        let mut sum = 0.0;
        for j in 0..g {
            let v = z[(i, j)];
            if !(0.0..=1.0 + 1e-9).contains(&v) {
                return Err(Error::InvalidParam(format!(
                    "soft label ({i},{j}) = {v} outside [0,1]"
                )));
            }
            sum += v;
        }
        if (sum - 1.0).abs() > 1e-6 {
            return Err(Error::InvalidParam(format!(
                "soft label row {i} sums to {sum}"
            )));
        }
    }
    Ok(())
}

/// Holds DatasetXY rows unpacked for the inner loops.
pub(crate) struct PreparedData {
    pub xs: Vec<DVector<f64>>,
    pub ys: Vec<DVector<f64>>,
    pub xstars: Vec<DVector<f64>>,
}

impl PreparedData {
    pub fn new(data: &DatasetXY) -> Self {
        let n = data.n();
        let mut xs = Vec::with_capacity(n);
        let mut ys = Vec::with_capacity(n);
        let mut xstars = Vec::with_capacity(n);
        for i in 0..n {
            let x = data.x_row(i);
            xstars.push(design_row(&x));
            xs.push(x);
            ys.push(data.y_row(i));
        }
        Self { xs, ys, xstars }
    }
}

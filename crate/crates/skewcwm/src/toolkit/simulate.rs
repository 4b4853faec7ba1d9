//! Data generation from a parameterized CWM, plus the named parameter
//! presets used throughout the simulation studies.

use nalgebra::{dmatrix, dvector, DMatrix, DVector};
use rand::Rng;
use rand_distr::Distribution;

use crate::cwm::{design_row, CwmParams, CwmSpec, GroupParams, RegressionBlock};
use crate::data::DatasetXY;
use crate::dists::{sample_mixing_weight, ComponentBlock, DistKind, Family};
use crate::error::{Error, Result};
use crate::matcore::SpdMatrix;

/// Draws N observations: a group per the mixing weights, the covariate
/// vector through its variance-mean mixture, then
/// y = B' x* + V alpha_Y + sqrt(V) u with V and u from the response block.
/// Labels are recorded 1-based.
pub fn simulate_cwm<R: Rng + ?Sized>(
    params: &CwmParams,
    n: usize,
    rng: &mut R,
) -> Result<DatasetXY> {
    if n == 0 {
        return Err(Error::InvalidParam("cannot simulate an empty dataset".into()));
    }
    let g = params.weights.len();
    let d = params.groups[0].cov.dim();
    let p = params.groups[0].reg.p();
    let mut x = DMatrix::zeros(n, d);
    let mut y = DMatrix::zeros(n, p);
    let mut labels = Vec::with_capacity(n);
    let std_normal = rand_distr::StandardNormal;
    for i in 0..n {
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut gi = g - 1;
        for (j, w) in params.weights.iter().enumerate() {
            acc += w;
            if u < acc {
                gi = j;
                break;
            }
        }
        let group = &params.groups[gi];
        let xi = group.cov.sample(rng);
        let v = sample_mixing_weight(&group.reg.kind, rng);
        let z = DVector::from_fn(p, |_, _| std_normal.sample(rng));
        let noise = group.reg.scatter.correlate(&z) * v.sqrt();
        let yi = group.reg.location(&design_row(&xi)) + &group.reg.skew * v + noise;
        x.row_mut(i).copy_from(&xi.transpose());
        y.row_mut(i).copy_from(&yi.transpose());
        labels.push(gi + 1);
    }
    DatasetXY::new(x, y, Some(labels))
}

/// A named simulation preset: family pair plus generating parameters.
#[derive(Clone, Debug)]
pub struct Preset {
    pub name: &'static str,
    pub x_family: Family,
    pub y_family: Family,
    pub params: CwmParams,
}

impl Preset {
    pub fn spec(&self, n_groups: usize) -> CwmSpec {
        CwmSpec {
            x_family: self.x_family,
            y_family: self.y_family,
            n_groups,
            d: self.params.groups[0].cov.dim(),
            p: self.params.groups[0].reg.p(),
        }
    }
}

pub const PRESET_NAMES: [&str; 7] = [
    "table1-ghgh",
    "table1-vgnig",
    "table1-stn",
    "table1-nnig",
    "table3-stst",
    "table3-stn",
    "table3-nst",
];

/// Shared structural parameters of the first simulation design:
/// two balanced groups, d = 3 covariates, p = 2 responses.
struct Design {
    mu: [DVector<f64>; 2],
    alpha_x: [DVector<f64>; 2],
    sigma_x: [DMatrix<f64>; 2],
    coeffs: [DMatrix<f64>; 2],
    alpha_y: [DVector<f64>; 2],
    sigma_y: [DMatrix<f64>; 2],
}

fn design_one() -> Design {
    Design {
        mu: [dvector![0.0, 0.0, 0.0], dvector![3.0, 3.0, 3.0]],
        alpha_x: [dvector![2.0, 2.0, 2.0], dvector![-3.0, -3.0, -3.0]],
        sigma_x: [
            dmatrix![1.0, 0.1, 0.2; 0.1, 3.0, 0.1; 0.2, 0.1, 2.0],
            dmatrix![1.0, 0.1, 0.1; 0.1, 1.0, 0.2; 0.1, 0.2, 1.0],
        ],
        // Row 3, column 2 is +1.5: the recovery tables pin the generating
        // value there.
        coeffs: [
            dmatrix![-6.0, 1.0; -1.5, -1.5; -0.5, 1.5; 2.5, 1.5],
            dmatrix![10.0, -7.5; -6.0, 4.0; 4.0, 5.5; -3.5, -3.0],
        ],
        alpha_y: [dvector![2.0, -2.0], dvector![-2.0, 2.0]],
        sigma_y: [
            dmatrix![1.0, 0.2; 0.2, 1.0],
            dmatrix![1.0, 0.3; 0.3, 1.0],
        ],
    }
}

/// Second simulation design, built around the skew-t.
fn design_two() -> Design {
    Design {
        mu: [dvector![-2.5, 4.0, 3.0], dvector![2.5, -3.0, -3.0]],
        alpha_x: [dvector![-3.0, 2.5, -2.0], dvector![2.5, 3.0, -1.5]],
        sigma_x: [
            dmatrix![2.9, -0.5, -0.05; -0.5, 0.45, -0.75; -0.05, -0.75, 1.95],
            dmatrix![2.3, -0.9, -0.35; -0.9, 1.55, 0.25; -0.35, 0.25, 1.0],
        ],
        coeffs: [
            dmatrix![-6.0, 1.0; -1.5, -1.5; -0.5, 1.5; 2.5, 1.5],
            dmatrix![-10.0, 7.5; -1.0, -1.0; -0.5, 1.5; 2.0, 2.0],
        ],
        alpha_y: [dvector![2.0, -2.5], dvector![-1.0, 2.0]],
        sigma_y: [
            dmatrix![1.8, -0.3; -0.3, 2.0],
            dmatrix![2.0, -0.35; -0.35, 2.8],
        ],
    }
}

fn build(
    name: &'static str,
    design: Design,
    x_kinds: [DistKind; 2],
    y_kinds: [DistKind; 2],
) -> Result<Preset> {
    let x_family = x_kinds[0].family();
    let y_family = y_kinds[0].family();
    let mut groups = Vec::with_capacity(2);
    for gi in 0..2 {
        let alpha_x = if x_family.is_skewed() {
            design.alpha_x[gi].clone()
        } else {
            DVector::zeros(3)
        };
        let cov = ComponentBlock::new(
            design.mu[gi].clone(),
            SpdMatrix::new(design.sigma_x[gi].clone())?,
            alpha_x,
            x_kinds[gi],
        )?;
        let alpha_y = if y_family.is_skewed() {
            design.alpha_y[gi].clone()
        } else {
            DVector::zeros(2)
        };
        let reg = RegressionBlock::new(
            design.coeffs[gi].clone(),
            SpdMatrix::new(design.sigma_y[gi].clone())?,
            alpha_y,
            y_kinds[gi],
        )?;
        groups.push(GroupParams { cov, reg });
    }
    Ok(Preset {
        name,
        x_family,
        y_family,
        params: CwmParams { weights: vec![0.5, 0.5], groups },
    })
}

/// Looks up a named preset.
pub fn preset(name: &str) -> Result<Preset> {
    let key = name.to_ascii_lowercase();
    match key.as_str() {
        "table1-ghgh" => build(
            "table1-ghgh",
            design_one(),
            [
                DistKind::GenHyperbolic { omega: 4.0, lambda: 0.3 },
                DistKind::GenHyperbolic { omega: 10.0, lambda: 0.3 },
            ],
            [
                DistKind::GenHyperbolic { omega: 10.0, lambda: 0.3 },
                DistKind::GenHyperbolic { omega: 4.0, lambda: 0.3 },
            ],
        ),
        "table1-vgnig" => build(
            "table1-vgnig",
            design_one(),
            [
                DistKind::VarianceGamma { gamma: 4.0 },
                DistKind::VarianceGamma { gamma: 20.0 },
            ],
            [
                DistKind::NormalInvGaussian { kappa: 4.0 },
                DistKind::NormalInvGaussian { kappa: 10.0 },
            ],
        ),
        "table1-stn" => build(
            "table1-stn",
            design_one(),
            [DistKind::SkewT { nu: 7.0 }, DistKind::SkewT { nu: 7.0 }],
            [DistKind::Normal, DistKind::Normal],
        ),
        "table1-nnig" => build(
            "table1-nnig",
            design_one(),
            [DistKind::Normal, DistKind::Normal],
            [
                DistKind::NormalInvGaussian { kappa: 4.0 },
                DistKind::NormalInvGaussian { kappa: 10.0 },
            ],
        ),
        "table3-stst" => build(
            "table3-stst",
            design_two(),
            [DistKind::SkewT { nu: 7.0 }, DistKind::SkewT { nu: 7.0 }],
            [DistKind::SkewT { nu: 7.0 }, DistKind::SkewT { nu: 7.0 }],
        ),
        "table3-stn" => build(
            "table3-stn",
            design_two(),
            [DistKind::SkewT { nu: 7.0 }, DistKind::SkewT { nu: 7.0 }],
            [DistKind::Normal, DistKind::Normal],
        ),
        "table3-nst" => build(
            "table3-nst",
            design_two(),
            [DistKind::Normal, DistKind::Normal],
            [DistKind::SkewT { nu: 7.0 }, DistKind::SkewT { nu: 7.0 }],
        ),
        other => Err(Error::Usage(format!(
            "unknown preset '{other}'; available: {}",
            PRESET_NAMES.join(", ")
        ))),
    }
}

//! Finite mixture of regressions with fixed covariates: the comparison
//! family. Mixing happens over the conditional response density only, so a
//! fit shares the response half of the CWM engine verbatim with the
//! covariate block switched off.

use nalgebra::DMatrix;

use crate::cwm::engine;
use crate::cwm::{
    map_labels, validate_soft_labels, EngineBlocks, FitControls, FitReport, FittedParams,
    FmrParams, PreparedData,
};
use crate::data::DatasetXY;
use crate::dists::Family;
use crate::error::Result;
use crate::toolkit::{bic, count_params, ModelId};

fn blocks_from_params(params: &FmrParams) -> EngineBlocks {
    EngineBlocks {
        weights: params.weights.clone(),
        cov: None,
        reg: params.groups.clone(),
    }
}

/// Sum over i of log sum_g pi_g p_Y(y_i | x_i, theta_g).
pub fn fmr_observed_loglik(params: &FmrParams, data: &DatasetXY) -> Result<f64> {
    let pd = PreparedData::new(data);
    Ok(engine::observed_loglik_core(&blocks_from_params(params), &pd))
}

/// EM fit of the G-component FMR with a `y_family` response density.
pub fn fmr_fit(
    y_family: Family,
    g: usize,
    data: &DatasetXY,
    init_z: &DMatrix<f64>,
    controls: &FitControls,
) -> Result<FitReport> {
    validate_soft_labels(init_z, data.n(), g)?;
    let pd = PreparedData::new(data);
    let out = engine::run_em(&pd, init_z, None, y_family, controls)?;
    let model = ModelId::Fmr { y: y_family };
    let n_params = count_params(&model, g, data.d(), data.p());
    let ll = *out.trace.last().expect("trace non-empty");
    Ok(FitReport {
        params: FittedParams::Fmr(FmrParams { weights: out.blocks.weights, groups: out.blocks.reg }),
        bic: bic(ll, n_params, data.n()),
        n_params,
        map_labels: map_labels(&out.cache.z),
        z_final: out.cache.z,
        loglik_trace: out.trace,
        converged: out.converged,
        n_iter: out.n_iter,
        diagnostics: out.diagnostics,
    })
}

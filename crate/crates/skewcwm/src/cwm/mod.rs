//! The EM engine for the cluster-weighted model family.

pub mod concentration;
pub(crate) mod engine;
mod params;

use nalgebra::{DMatrix, DVector};

pub use concentration::{update_gamma, update_gh, update_kappa, update_nu};
pub use params::{
    design_row, CwmParams, CwmSpec, Diagnostics, EStepCache, FitControls, FitReport,
    FittedParams, FmrParams, GroupParams, LatentMoments, RegressionBlock,
};

pub(crate) use engine::{map_labels, EngineBlocks};
pub(crate) use params::{validate_soft_labels, PreparedData};

use crate::data::DatasetXY;
use crate::error::{Error, Result};
use crate::toolkit::{bic, count_params, ModelId};

fn blocks_from_params(params: &CwmParams) -> EngineBlocks {
    EngineBlocks {
        weights: params.weights.clone(),
        cov: Some(params.groups.iter().map(|g| g.cov.clone()).collect()),
        reg: params.groups.iter().map(|g| g.reg.clone()).collect(),
    }
}

fn params_from_blocks(blocks: EngineBlocks) -> CwmParams {
    let cov = blocks.cov.expect("CWM blocks carry a covariate part");
    CwmParams {
        weights: blocks.weights,
        groups: cov
            .into_iter()
            .zip(blocks.reg)
            .map(|(cov, reg)| GroupParams { cov, reg })
            .collect(),
    }
}

/// log pi-free joint component density of one observation; see
/// `CwmParams::joint_log_density`.
pub fn joint_log_density(
    spec: &CwmSpec,
    params: &CwmParams,
    x: &DVector<f64>,
    y: &DVector<f64>,
    g: usize,
) -> Result<f64> {
    params.validate(spec)?;
    params.joint_log_density(g, x, y)
}

/// Observed-data log-likelihood, sum over i of
/// log sum_g exp(log pi_g + joint log density), log-sum-exp stabilized.
pub fn observed_loglik(spec: &CwmSpec, params: &CwmParams, data: &DatasetXY) -> Result<f64> {
    params.validate(spec)?;
    check_dims(spec, data)?;
    let pd = PreparedData::new(data);
    Ok(engine::observed_loglik_core(&blocks_from_params(params), &pd))
}

/// One E-step: responsibilities plus the latent GIG expectations of every
/// skewed block.
pub fn e_step(spec: &CwmSpec, params: &CwmParams, data: &DatasetXY) -> Result<EStepCache> {
    params.validate(spec)?;
    check_dims(spec, data)?;
    let pd = PreparedData::new(data);
    Ok(engine::e_step_core(&blocks_from_params(params), &pd).0)
}

/// One M-step from a responsibility cache; `prev` supplies the family tags
/// and the previous concentration values for their updates.
pub fn m_step(
    spec: &CwmSpec,
    data: &DatasetXY,
    cache: &EStepCache,
    prev: &CwmParams,
) -> Result<CwmParams> {
    prev.validate(spec)?;
    check_dims(spec, data)?;
    validate_soft_labels(&cache.z, data.n(), spec.n_groups)?;
    let pd = PreparedData::new(data);
    let x_kinds: Vec<_> = prev.groups.iter().map(|g| g.cov.kind).collect();
    let y_kinds: Vec<_> = prev.groups.iter().map(|g| g.reg.kind).collect();
    let (blocks, _) = engine::m_step_core(&pd, cache, Some(&x_kinds), &y_kinds, true)?;
    Ok(params_from_blocks(blocks))
}

/// Full EM fit from soft initial labels.
pub fn fit(
    spec: &CwmSpec,
    data: &DatasetXY,
    init_z: &DMatrix<f64>,
    controls: &FitControls,
) -> Result<FitReport> {
    check_dims(spec, data)?;
    validate_soft_labels(init_z, data.n(), spec.n_groups)?;
    let pd = PreparedData::new(data);
    let out = engine::run_em(
        &pd,
        init_z,
        Some(spec.x_family),
        spec.y_family,
        controls,
    )?;
    let model = ModelId::Cwm { x: spec.x_family, y: spec.y_family };
    let n_params = count_params(&model, spec.n_groups, spec.d, spec.p);
    let ll = *out.trace.last().expect("trace non-empty");
    Ok(FitReport {
        params: FittedParams::Cwm(params_from_blocks(out.blocks)),
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

fn check_dims(spec: &CwmSpec, data: &DatasetXY) -> Result<()> {
    if data.d() != spec.d || data.p() != spec.p {
        return Err(Error::Dimension(format!(
            "data is d={}, p={}; spec wants d={}, p={}",
            data.d(),
            data.p(),
            spec.d,
            spec.p
        )));
    }
    Ok(())
}

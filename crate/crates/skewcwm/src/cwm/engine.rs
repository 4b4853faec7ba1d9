//! E-step, M-step, and the EM loop shared by the CWM and FMR fitters.
//!
//! The FMR path is the same engine with the covariate block switched off,
//! so the CWM/FMR comparison isolates exactly the covariate-modelling
//! difference.

use nalgebra::{DMatrix, DVector};

use crate::cwm::concentration::{update_gamma, update_gh, update_kappa, update_nu};
use crate::cwm::params::{
    Diagnostics, EStepCache, FitControls, LatentMoments, PreparedData, RegressionBlock,
};
use crate::dists::{ComponentBlock, DistKind, Family, PreparedDensity};
use crate::error::{Error, Result};
use crate::matcore::SpdMatrix;

/// Responsibility floor applied before logs.
const PI_FLOOR: f64 = 1e-300;

/// Internal parameter view the engine iterates on. `cov` is `None` when
/// fitting a finite mixture of regressions.
#[derive(Clone, Debug)]
pub(crate) struct EngineBlocks {
    pub weights: Vec<f64>,
    pub cov: Option<Vec<ComponentBlock>>,
    pub reg: Vec<RegressionBlock>,
}

impl EngineBlocks {
    fn n_groups(&self) -> usize {
        self.reg.len()
    }

    fn x_kinds(&self) -> Option<Vec<DistKind>> {
        self.cov.as_ref().map(|c| c.iter().map(|b| b.kind).collect())
    }

    fn y_kinds(&self) -> Vec<DistKind> {
        self.reg.iter().map(|b| b.kind).collect()
    }
}

/// One E-step: responsibilities, latent GIG expectations, and the observed
/// log-likelihood of the current parameters.
pub(crate) fn e_step_core(blocks: &EngineBlocks, pd: &PreparedData) -> (EStepCache, f64) {
    let n = pd.xs.len();
    let g = blocks.n_groups();
    let x_skewed = blocks
        .cov
        .as_ref()
        .map(|c| c[0].kind.family().is_skewed())
        .unwrap_or(false);
    let y_skewed = blocks.reg[0].kind.family().is_skewed();

    let prep_x: Option<Vec<PreparedDensity>> = blocks
        .cov
        .as_ref()
        .map(|c| c.iter().map(PreparedDensity::new).collect());
    let prep_y: Vec<PreparedDensity> = blocks.reg.iter().map(|r| r.prepared()).collect();

    let mut logw = DMatrix::zeros(n, g);
    let mut w_mom = x_skewed.then(|| LatentMoments::unit(n, g));
    let mut v_mom = y_skewed.then(|| LatentMoments::unit(n, g));

    for gi in 0..g {
        let log_pi = blocks.weights[gi].max(PI_FLOOR).ln();
        for i in 0..n {
            let mut lw = log_pi;
            if let (Some(cov), Some(px)) = (&blocks.cov, &prep_x) {
                let diff = &pd.xs[i] - &cov[gi].location;
                let (lp, delta) = px[gi].log_pdf_delta(&diff);
                lw += lp;
                if let Some(m) = &mut w_mom {
                    let mom = px[gi].latent_moments(delta);
                    m.e[(i, gi)] = mom.e_w;
                    m.e_inv[(i, gi)] = mom.e_inv_w;
                    m.e_log[(i, gi)] = mom.e_log_w;
                }
            }
            let resid = &pd.ys[i] - blocks.reg[gi].location(&pd.xstars[i]);
            let (lp, delta) = prep_y[gi].log_pdf_delta(&resid);
            lw += lp;
            if let Some(m) = &mut v_mom {
                let mom = prep_y[gi].latent_moments(delta);
                m.e[(i, gi)] = mom.e_w;
                m.e_inv[(i, gi)] = mom.e_inv_w;
                m.e_log[(i, gi)] = mom.e_log_w;
            }
            logw[(i, gi)] = lw;
        }
    }

    // row-wise log-sum-exp
    let mut z = DMatrix::zeros(n, g);
    let mut loglik = 0.0;
    for i in 0..n {
        let mut max = f64::NEG_INFINITY;
        for gi in 0..g {
            max = max.max(logw[(i, gi)]);
        }
        let mut sum = 0.0;
        for gi in 0..g {
            sum += (logw[(i, gi)] - max).exp();
        }
        let lse = max + sum.ln();
        loglik += lse;
        for gi in 0..g {
            z[(i, gi)] = (logw[(i, gi)] - lse).exp();
        }
    }

    (EStepCache { z, w_mom, v_mom }, loglik)
}

/// Observed log-likelihood of the current parameters.
pub(crate) fn observed_loglik_core(blocks: &EngineBlocks, pd: &PreparedData) -> f64 {
    e_step_core(blocks, pd).1
}

struct ConcUpdate {
    kind: DistKind,
    clamped: bool,
}

/// Dispatches the family-specific concentration update from the
/// responsibility-weighted latent averages.
fn update_concentration(
    prev: &DistKind,
    abar: f64,
    bbar: f64,
    cbar: f64,
    update: bool,
) -> Result<ConcUpdate> {
    if !update {
        return Ok(ConcUpdate { kind: *prev, clamped: false });
    }
    Ok(match *prev {
        DistKind::Normal => ConcUpdate { kind: DistKind::Normal, clamped: false },
        DistKind::SkewT { .. } => {
            let (nu, clamped) = update_nu(bbar + cbar);
            ConcUpdate { kind: DistKind::SkewT { nu }, clamped }
        }
        DistKind::GenHyperbolic { omega, lambda } => {
            let (lambda, omega, clamped) = update_gh(lambda, omega, abar, bbar, cbar);
            ConcUpdate { kind: DistKind::GenHyperbolic { omega, lambda }, clamped }
        }
        DistKind::VarianceGamma { .. } => {
            let (gamma, clamped) = update_gamma(abar, cbar);
            ConcUpdate { kind: DistKind::VarianceGamma { gamma }, clamped }
        }
        DistKind::NormalInvGaussian { .. } => {
            let kappa = update_kappa(abar)?;
            ConcUpdate { kind: DistKind::NormalInvGaussian { kappa }, clamped: false }
        }
    })
}

/// One M-step. `x_kinds = None` fits the FMR (no covariate block);
/// `update_conc = false` leaves the concentration parameters untouched,
/// which is how a fit turns its initial soft labels into starting values.
pub(crate) fn m_step_core(
    pd: &PreparedData,
    cache: &EStepCache,
    x_kinds: Option<&[DistKind]>,
    y_kinds: &[DistKind],
    update_conc: bool,
) -> Result<(EngineBlocks, Diagnostics)> {
    let n = pd.xs.len();
    let g = y_kinds.len();
    let d = pd.xs[0].len();
    let p = pd.ys[0].len();
    let z = &cache.z;
    let mut diags = Diagnostics::default();

    let tg: Vec<f64> = (0..g).map(|gi| (0..n).map(|i| z[(i, gi)]).sum()).collect();
    let min_size = (d + p + 2) as f64;
    for (gi, &t) in tg.iter().enumerate() {
        if t < min_size {
            return Err(Error::Collapse { group: gi, t_g: t, min_size });
        }
    }
    let weights: Vec<f64> = tg.iter().map(|t| t / n as f64).collect();

    // covariate block
    let cov = match x_kinds {
        None => None,
        Some(kinds) => {
            let mut out = Vec::with_capacity(g);
            let skewed = kinds[0].family().is_skewed();
            for gi in 0..g {
                let t = tg[gi];
                let mut sx = DVector::zeros(d);
                for i in 0..n {
                    sx.axpy(z[(i, gi)], &pd.xs[i], 1.0);
                }
                let (mu, alpha, kind) = if skewed {
                    let w = cache.w_mom.as_ref().expect("moments for skewed X");
                    let mut sa = 0.0;
                    let mut sb = 0.0;
                    let mut sc = 0.0;
                    let mut sxb = DVector::zeros(d);
                    for i in 0..n {
                        let zi = z[(i, gi)];
                        sa += zi * w.e[(i, gi)];
                        sb += zi * w.e_inv[(i, gi)];
                        sc += zi * w.e_log[(i, gi)];
                        sxb.axpy(zi * w.e_inv[(i, gi)], &pd.xs[i], 1.0);
                    }
                    let abar = sa / t;
                    let bbar = sb / t;
                    let cbar = sc / t;
                    let denom = abar * sb - t;
                    let (mu, alpha) = if denom.abs() < 1e-10 * t {
                        // forced-symmetric degenerate case: weighted mean,
                        // zero skew
                        diags.symmetric_fallback = true;
                        (&sx / t, DVector::zeros(d))
                    } else {
                        ((&sxb * abar - &sx) / denom, (&sx * bbar - &sxb) / denom)
                    };
                    let conc =
                        update_concentration(&kinds[gi], abar, bbar, cbar, update_conc)?;
                    diags.clamped_concentration |= conc.clamped;
                    (mu, alpha, conc.kind)
                } else {
                    (&sx / t, DVector::zeros(d), DistKind::Normal)
                };

                // scatter: b (xc)(xc)' - (xc) a' - a (xc)' + a_i a a'
                let mut s1 = DMatrix::zeros(d, d);
                let mut v = DVector::zeros(d);
                let mut sa_for_scatter = 0.0;
                for i in 0..n {
                    let zi = z[(i, gi)];
                    let xc = &pd.xs[i] - &mu;
                    let (b_i, a_i) = match &cache.w_mom {
                        Some(w) if skewed => (w.e_inv[(i, gi)], w.e[(i, gi)]),
                        _ => (1.0, 1.0),
                    };
                    s1.ger(zi * b_i, &xc, &xc, 1.0);
                    v.axpy(zi, &xc, 1.0);
                    sa_for_scatter += zi * a_i;
                }
                let mut scatter_mat = s1;
                scatter_mat.ger(-1.0, &v, &alpha, 1.0);
                scatter_mat.ger(-1.0, &alpha, &v, 1.0);
                scatter_mat.ger(sa_for_scatter, &alpha, &alpha, 1.0);
                scatter_mat /= t;
                let scatter = SpdMatrix::new(scatter_mat)?;
                diags.regularized_scatter |= scatter.was_regularized();
                out.push(ComponentBlock { location: mu, scatter, skew: alpha, kind });
            }
            Some(out)
        }
    };

    // response block
    let mut reg = Vec::with_capacity(g);
    let y_skewed = y_kinds[0].family().is_skewed();
    for gi in 0..g {
        let t = tg[gi];
        let mut sxstar = DVector::zeros(d + 1);
        let mut sy = DVector::zeros(p);
        for i in 0..n {
            let zi = z[(i, gi)];
            sxstar.axpy(zi, &pd.xstars[i], 1.0);
            sy.axpy(zi, &pd.ys[i], 1.0);
        }

        let (coeffs, alpha, kind, kbar_info) = if y_skewed {
            let v = cache.v_mom.as_ref().expect("moments for skewed Y");
            let mut sk = 0.0;
            let mut sm = 0.0;
            let mut sn = 0.0;
            let mut sxx_m = DMatrix::zeros(d + 1, d + 1);
            let mut sxy_m = DMatrix::zeros(d + 1, p);
            for i in 0..n {
                let zi = z[(i, gi)];
                let m_i = v.e_inv[(i, gi)];
                sk += zi * v.e[(i, gi)];
                sm += zi * m_i;
                sn += zi * v.e_log[(i, gi)];
                sxx_m.ger(zi * m_i, &pd.xstars[i], &pd.xstars[i], 1.0);
                sxy_m.ger(zi * m_i, &pd.xstars[i], &pd.ys[i], 1.0);
            }
            let kbar = sk / t;
            let mbar = sm / t;
            let nbar = sn / t;
            // With degenerate latent moments (k, m both near 1) the skew
            // shift confounds with the intercept and P goes singular; fall
            // back to the symmetric weighted least squares with zero skew.
            let coeffs;
            let alpha;
            if (mbar * kbar - 1.0).abs() < 1e-10 {
                diags.symmetric_fallback = true;
                let gram_spd = SpdMatrix::new(sxx_m)?;
                diags.regularized_scatter |= gram_spd.was_regularized();
                coeffs = gram_spd.solve(&sxy_m)?;
                alpha = DVector::zeros(p);
            } else {
                let mut p_mat = sxx_m;
                p_mat.ger(-1.0 / (t * kbar), &sxstar, &sxstar, 1.0);
                let mut r_mat = sxy_m;
                r_mat.ger(-1.0 / (t * kbar), &sxstar, &sy, 1.0);
                let p_spd = SpdMatrix::new(p_mat)?;
                diags.regularized_scatter |= p_spd.was_regularized();
                coeffs = p_spd.solve(&r_mat)?;
                alpha = (&sy - coeffs.tr_mul(&sxstar)) / (t * kbar);
            }
            let conc = update_concentration(&y_kinds[gi], kbar, mbar, nbar, update_conc)?;
            diags.clamped_concentration |= conc.clamped;
            (coeffs, alpha, conc.kind, Some(sk))
        } else {
            let mut gram = DMatrix::zeros(d + 1, d + 1);
            let mut sxy = DMatrix::zeros(d + 1, p);
            for i in 0..n {
                let zi = z[(i, gi)];
                gram.ger(zi, &pd.xstars[i], &pd.xstars[i], 1.0);
                sxy.ger(zi, &pd.xstars[i], &pd.ys[i], 1.0);
            }
            let gram_spd = SpdMatrix::new(gram)?;
            diags.regularized_scatter |= gram_spd.was_regularized();
            let coeffs = gram_spd.solve(&sxy)?;
            (coeffs, DVector::zeros(p), DistKind::Normal, None)
        };

        // residual scatter with the fresh coefficients
        let mut s1 = DMatrix::zeros(p, p);
        let mut vsum = DVector::zeros(p);
        for i in 0..n {
            let zi = z[(i, gi)];
            let r = &pd.ys[i] - coeffs.tr_mul(&pd.xstars[i]);
            let m_i = match &cache.v_mom {
                Some(v) if y_skewed => v.e_inv[(i, gi)],
                _ => 1.0,
            };
            s1.ger(zi * m_i, &r, &r, 1.0);
            vsum.axpy(zi, &r, 1.0);
        }
        let mut scatter_mat = s1;
        if y_skewed {
            let sk = kbar_info.expect("skewed Y sum");
            scatter_mat.ger(-1.0, &vsum, &alpha, 1.0);
            scatter_mat.ger(-1.0, &alpha, &vsum, 1.0);
            scatter_mat.ger(sk, &alpha, &alpha, 1.0);
        }
        scatter_mat /= t;
        let scatter = SpdMatrix::new(scatter_mat)?;
        diags.regularized_scatter |= scatter.was_regularized();
        reg.push(RegressionBlock { coeffs, scatter, skew: alpha, kind });
    }

    Ok((EngineBlocks { weights, cov, reg }, diags))
}

/// Builds starting parameters from soft labels: a symmetric M-step with all
/// latent moments forced to one and default concentrations.
pub(crate) fn initial_blocks(
    pd: &PreparedData,
    init_z: &DMatrix<f64>,
    x_family: Option<Family>,
    y_family: Family,
) -> Result<(EngineBlocks, Diagnostics)> {
    let n = pd.xs.len();
    let g = init_z.ncols();
    let unit = EStepCache {
        z: init_z.clone(),
        w_mom: Some(LatentMoments::unit(n, g)),
        v_mom: Some(LatentMoments::unit(n, g)),
    };
    let x_kinds: Option<Vec<DistKind>> =
        x_family.map(|f| vec![DistKind::default_for(f); g]);
    let y_kinds = vec![DistKind::default_for(y_family); g];
    m_step_core(pd, &unit, x_kinds.as_deref(), &y_kinds, false)
}

pub(crate) struct EmOutcome {
    pub blocks: EngineBlocks,
    pub trace: Vec<f64>,
    pub cache: EStepCache,
    pub converged: bool,
    pub n_iter: usize,
    pub diagnostics: Diagnostics,
}

/// The EM loop: alternate E and M steps until the relative change of the
/// observed log-likelihood (or its Aitken-accelerated limit) drops under
/// `tol`, or `max_iter` is reached.
pub(crate) fn run_em(
    pd: &PreparedData,
    init_z: &DMatrix<f64>,
    x_family: Option<Family>,
    y_family: Family,
    controls: &FitControls,
) -> Result<EmOutcome> {
    let (mut blocks, mut diags) = initial_blocks(pd, init_z, x_family, y_family)?;
    let mut trace: Vec<f64> = Vec::new();
    let mut converged = false;
    let mut cache: Option<EStepCache> = None;

    for iter in 1..=controls.max_iter {
        let (cache_t, ll) = e_step_core(&blocks, pd);
        cache = Some(cache_t);
        trace.push(ll);

        let t = trace.len();
        if t >= 2 {
            let prev = trace[t - 2];
            let scale = ll.abs().max(1.0);
            let plain = (ll - prev).abs() < controls.tol * scale;
            let aitken = if controls.use_aitken && t >= 3 {
                let l0 = trace[t - 3];
                let num = ll - prev;
                let den = prev - l0;
                if den.abs() > 0.0 {
                    let a = num / den;
                    a > 0.0 && a < 1.0 && (num / (1.0 - a)).abs() < controls.tol * scale
                } else {
                    true
                }
            } else {
                false
            };
            if plain || (controls.use_aitken && aitken) {
                converged = true;
                break;
            }
        }
        if iter == controls.max_iter {
            break;
        }

        let x_kinds = blocks.x_kinds();
        let y_kinds = blocks.y_kinds();
        let (next, dg) = m_step_core(pd, cache.as_ref().unwrap(), x_kinds.as_deref(), &y_kinds, true)?;
        blocks = next;
        diags.merge(dg);
    }

    let cache = cache.expect("at least one E-step ran");
    let n_iter = trace.len();
    Ok(EmOutcome { blocks, trace, cache, converged, n_iter, diagnostics: diags })
}

/// Hard classification by the row-wise argmax of the responsibilities.
pub(crate) fn map_labels(z: &DMatrix<f64>) -> Vec<usize> {
    (0..z.nrows())
        .map(|i| {
            let mut best = 0;
            let mut bv = f64::NEG_INFINITY;
            for gi in 0..z.ncols() {
                if z[(i, gi)] > bv {
                    bv = z[(i, gi)];
                    best = gi;
                }
            }
            best
        })
        .collect()
}

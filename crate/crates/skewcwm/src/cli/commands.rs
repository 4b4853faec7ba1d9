//! The five CLI commands and their result documents.

use std::fs;
use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::ingest::{column_preset, ingest_csv};
use crate::cwm::{FitControls, FitReport};
use crate::data::DatasetXY;
use crate::error::{Error, Result};
use crate::toolkit::{
    adjusted_rand_index, mix_seed, preset, recovery_study, run_protocol, selection_study,
    simulate_cwm, ModelId, SelectionGrid,
};

/// Everything a command ran with; echoed into every result document.
#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub command: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub responses: Vec<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub covariates: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub labels: Option<String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub models: Vec<String>,
    pub gmin: usize,
    pub gmax: usize,
    pub seed: u64,
    pub tol: f64,
    pub max_iter: usize,
    pub out: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<String>,
    pub replicates: usize,
    pub n: usize,
    pub standardize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub mode: Option<String>,
}

impl RunConfig {
    pub fn controls(&self) -> FitControls {
        FitControls {
            tol: self.tol,
            max_iter: self.max_iter,
            use_aitken: false,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ResultRow {
    pub model: String,
    #[serde(rename = "G")]
    pub g: usize,
    pub loglik: f64,
    pub n_params: usize,
    pub bic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
    pub converged: bool,
    pub n_iter: usize,
}

#[derive(Clone, Debug, Serialize)]
pub struct Winner {
    pub model: String,
    #[serde(rename = "G")]
    pub g: usize,
    pub bic: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ari: Option<f64>,
}

#[derive(Serialize)]
struct ResultDoc<'a> {
    config: &'a RunConfig,
    rows: Vec<ResultRow>,
    #[serde(skip_serializing_if = "Option::is_none")]
    winner: Option<Winner>,
    /// best FMR, reported separately: FMR likelihoods condition on the
    /// covariates so their BIC is not comparable to the CWM scale
    #[serde(skip_serializing_if = "Option::is_none")]
    winner_fmr: Option<Winner>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    failures: Vec<String>,
}

fn ensure_out_dir(out: &str) -> Result<PathBuf> {
    let dir = PathBuf::from(out);
    fs::create_dir_all(&dir)?;
    Ok(dir)
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)
        .map_err(|e| Error::Data(format!("serialization failed: {e}")))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

/// Relabels components by descending mixing weight and writes the 1-based
/// MAP partition.
fn write_labels_csv(path: &Path, report: &FitReport) -> Result<()> {
    let weights = report.params.weights();
    let mut order: Vec<usize> = (0..weights.len()).collect();
    order.sort_by(|&a, &b| weights[b].partial_cmp(&weights[a]).unwrap());
    // rank[g] = output index of fitted component g
    let mut rank = vec![0usize; weights.len()];
    for (pos, &g) in order.iter().enumerate() {
        rank[g] = pos;
    }
    let mut out = String::from("row,label\n");
    for (i, &l) in report.map_labels.iter().enumerate() {
        out.push_str(&format!("{},{}\n", i + 1, rank[l] + 1));
    }
    fs::write(path, out)?;
    Ok(())
}

fn load_dataset(cfg: &RunConfig) -> Result<DatasetXY> {
    let input = cfg
        .input
        .as_ref()
        .ok_or_else(|| Error::Usage("--input is required".into()))?;
    let (responses, covariates, labels) = match &cfg.preset {
        Some(p) => {
            let cp = column_preset(p).ok_or_else(|| {
                Error::Usage(format!("unknown column preset '{p}' (try ais, pulpfiber)"))
            })?;
            // explicit flags override the preset
            let to_names = |groups: &[Vec<&'static str>]| -> Vec<Vec<String>> {
                groups
                    .iter()
                    .map(|g| g.iter().map(|s| s.to_string()).collect())
                    .collect()
            };
            (
                if cfg.responses.is_empty() {
                    to_names(&cp.responses)
                } else {
                    cfg.responses.iter().map(|r| vec![r.clone()]).collect()
                },
                if cfg.covariates.is_empty() {
                    to_names(&cp.covariates)
                } else {
                    cfg.covariates.iter().map(|c| vec![c.clone()]).collect()
                },
                cfg.labels
                    .clone()
                    .or_else(|| cp.labels.map(|l| l[0].to_string())),
            )
        }
        None => {
            if cfg.responses.is_empty() || cfg.covariates.is_empty() {
                return Err(Error::Usage(
                    "--responses and --covariates are required without a column preset".into(),
                ));
            }
            (
                cfg.responses.iter().map(|r| vec![r.clone()]).collect(),
                cfg.covariates.iter().map(|c| vec![c.clone()]).collect(),
                cfg.labels.clone(),
            )
        }
    };
    // take each variable's first candidate spelling present in the header
    let header = first_header(input)?;
    let pick = |cands: &[Vec<String>]| -> Result<Vec<String>> {
        cands
            .iter()
            .map(|group| {
                group
                    .iter()
                    .find(|name| header.iter().any(|h| h.eq_ignore_ascii_case(name)))
                    .cloned()
                    .ok_or_else(|| {
                        Error::Data(format!(
                            "{input}: none of [{}] found in header [{}]",
                            group.join(", "),
                            header.join(", ")
                        ))
                    })
            })
            .collect()
    };
    let responses = pick(&responses)?;
    let covariates = pick(&covariates)?;
    let labels = match labels {
        Some(l) if header.iter().any(|h| h.eq_ignore_ascii_case(&l)) => Some(l),
        Some(l) if cfg.labels.is_some() => {
            return Err(Error::Data(format!("{input}: label column '{l}' not found")))
        }
        _ => None,
    };
    let data = ingest_csv(input, &responses, &covariates, labels.as_deref())?;
    Ok(if cfg.standardize { data.standardize() } else { data })
}

fn first_header(path: &str) -> Result<Vec<String>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {path}: {e}")))?;
    Ok(reader
        .headers()
        .map_err(|e| Error::Data(format!("{path}: bad header: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect())
}

fn parse_models(tokens: &[String]) -> Result<Vec<ModelId>> {
    if tokens.is_empty() {
        return Ok(ModelId::all());
    }
    let mut out = Vec::new();
    for t in tokens {
        match t.to_ascii_lowercase().as_str() {
            "all" => out.extend(ModelId::all()),
            "cwm-all" => out.extend(ModelId::all_cwm()),
            "fmr-all" => out.extend(ModelId::all_fmr()),
            _ => out.push(ModelId::parse(t)?),
        }
    }
    out.dedup();
    Ok(out)
}

/// Formats a float with enough digits to round-trip exactly.
fn fmt_full(v: f64) -> String {
    format!("{v}")
}

/// `simulate`: draw a dataset from a named generator preset and write it as
/// CSV plus a provenance record.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<()> {
    let name = cfg
        .preset
        .as_ref()
        .ok_or_else(|| Error::Usage("--preset is required for simulate".into()))?;
    let p = preset(name)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data = simulate_cwm(&p.params, cfg.n, &mut rng)?;

    let dir = ensure_out_dir(&cfg.out)?;
    let mut csv_text = String::new();
    for j in 0..data.d() {
        csv_text.push_str(&format!("x{},", j + 1));
    }
    for j in 0..data.p() {
        csv_text.push_str(&format!("y{},", j + 1));
    }
    csv_text.push_str("label\n");
    let labels = data.labels.as_ref().expect("simulated labels");
    for i in 0..data.n() {
        for j in 0..data.d() {
            csv_text.push_str(&fmt_full(data.x[(i, j)]));
            csv_text.push(',');
        }
        for j in 0..data.p() {
            csv_text.push_str(&fmt_full(data.y[(i, j)]));
            csv_text.push(',');
        }
        csv_text.push_str(&format!("{}\n", labels[i]));
    }
    fs::write(dir.join("data.csv"), csv_text)?;

    #[derive(Serialize)]
    struct Provenance<'a> {
        preset: &'a str,
        seed: u64,
        n: usize,
        config: &'a RunConfig,
    }
    write_json(
        &dir.join("provenance.json"),
        &Provenance { preset: p.name, seed: cfg.seed, n: cfg.n, config: cfg },
    )?;
    println!("wrote {} rows to {}", cfg.n, dir.join("data.csv").display());
    Ok(())
}

fn grid_rows(
    cfg: &RunConfig,
    data: &DatasetXY,
    models: &[ModelId],
) -> (Vec<(ModelId, usize, FitReport)>, Vec<String>) {
    let controls = cfg.controls();
    let mut cells = Vec::new();
    for (mi, m) in models.iter().enumerate() {
        for g in cfg.gmin..=cfg.gmax {
            cells.push((mi, *m, g));
        }
    }
    let outcomes: Vec<_> = cells
        .par_iter()
        .map(|&(mi, model, g)| {
            let mut rng =
                ChaCha8Rng::seed_from_u64(mix_seed(cfg.seed, &[mi as u64, g as u64]));
            (model, g, run_protocol(&model, data, g, &controls, &mut rng))
        })
        .collect();
    let mut rows = Vec::new();
    let mut failures = Vec::new();
    for (model, g, res) in outcomes {
        match res {
            Ok(rep) => rows.push((model, g, rep)),
            Err(e) => failures.push(format!("{} G={g}: {e}", model.code())),
        }
    }
    (rows, failures)
}

fn to_result_rows(
    data: &DatasetXY,
    rows: &[(ModelId, usize, FitReport)],
) -> Vec<ResultRow> {
    rows.iter()
        .map(|(model, g, rep)| {
            let ari = data
                .labels
                .as_ref()
                .and_then(|t| adjusted_rand_index(&rep.map_labels, t).ok());
            ResultRow {
                model: model.code(),
                g: *g,
                loglik: rep.loglik(),
                n_params: rep.n_params,
                bic: rep.bic,
                ari,
                converged: rep.converged,
                n_iter: rep.n_iter,
            }
        })
        .collect()
}

fn best_of<'a>(
    rows: &'a [(ModelId, usize, FitReport)],
    pred: impl Fn(&ModelId) -> bool,
) -> Option<&'a (ModelId, usize, FitReport)> {
    rows.iter()
        .filter(|(m, _, _)| pred(m))
        .max_by(|a, b| a.2.bic.partial_cmp(&b.2.bic).unwrap())
}

/// `fit`: one model at one G.
pub fn cmd_fit(cfg: &RunConfig) -> Result<()> {
    let models = parse_models(&cfg.models)?;
    if models.len() != 1 {
        return Err(Error::Usage("fit expects exactly one --models entry".into()));
    }
    if cfg.gmin != cfg.gmax {
        return Err(Error::Usage("fit expects --gmin equal to --gmax".into()));
    }
    let data = load_dataset(cfg)?;
    let (rows, failures) = grid_rows(cfg, &data, &models);
    let dir = ensure_out_dir(&cfg.out)?;
    let result_rows = to_result_rows(&data, &rows);
    let winner = rows.first().map(|(m, g, rep)| Winner {
        model: m.code(),
        g: *g,
        bic: rep.bic,
        ari: result_rows.first().and_then(|r| r.ari),
    });
    write_json(
        &dir.join("result.json"),
        &ResultDoc { config: cfg, rows: result_rows, winner, winner_fmr: None, failures },
    )?;
    if let Some((_, _, rep)) = rows.first() {
        write_labels_csv(&dir.join("labels.csv"), rep)?;
        println!(
            "fit {}: loglik {:.4}, BIC {:.4}",
            models[0].code(),
            rep.loglik(),
            rep.bic
        );
        Ok(())
    } else {
        Err(Error::AllFitsFailed("the requested fit failed".into()))
    }
}

/// `select`: fit every requested (model, G) cell, rank by BIC within the
/// CWM and FMR classes, and write the winner's partition.
pub fn cmd_select(cfg: &RunConfig) -> Result<()> {
    let models = parse_models(&cfg.models)?;
    let data = load_dataset(cfg)?;
    let (rows, failures) = grid_rows(cfg, &data, &models);
    if rows.is_empty() {
        return Err(Error::AllFitsFailed(failures.join("; ")));
    }
    let dir = ensure_out_dir(&cfg.out)?;

    let mut result_rows = to_result_rows(&data, &rows);
    result_rows.sort_by(|a, b| {
        let class = |m: &str| usize::from(m.starts_with("FMR"));
        class(&a.model)
            .cmp(&class(&b.model))
            .then(b.bic.total_cmp(&a.bic))
    });

    let best_cwm = best_of(&rows, |m| m.is_cwm());
    let best_fmr = best_of(&rows, |m| !m.is_cwm());
    let to_winner = |cell: &(ModelId, usize, FitReport)| Winner {
        model: cell.0.code(),
        g: cell.1,
        bic: cell.2.bic,
        ari: data
            .labels
            .as_ref()
            .and_then(|t| adjusted_rand_index(&cell.2.map_labels, t).ok()),
    };
    let winner = best_cwm.or(best_fmr).map(to_winner);
    let winner_fmr = match (best_cwm, best_fmr) {
        (Some(_), Some(f)) => Some(to_winner(f)),
        _ => None,
    };

    // ranked CSV mirror of the rows
    let mut csv_text =
        String::from("model,G,loglik,n_params,bic,ari,converged,n_iter\n");
    for r in &result_rows {
        csv_text.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            r.model,
            r.g,
            fmt_full(r.loglik),
            r.n_params,
            fmt_full(r.bic),
            r.ari.map(|a| fmt_full(a)).unwrap_or_default(),
            r.converged,
            r.n_iter
        ));
    }
    fs::write(dir.join("ranked.csv"), csv_text)?;

    if let Some(cell) = best_cwm.or(best_fmr) {
        write_labels_csv(&dir.join("winner_labels.csv"), &cell.2)?;
    }
    write_json(
        &dir.join("result.json"),
        &ResultDoc { config: cfg, rows: result_rows, winner: winner.clone(), winner_fmr, failures },
    )?;
    if let Some(w) = winner {
        println!(
            "winner: {} with G={} (BIC {:.3}{})",
            w.model,
            w.g,
            w.bic,
            w.ari.map(|a| format!(", ARI {a:.3}")).unwrap_or_default()
        );
    }
    Ok(())
}

/// `study`: replicated simulation studies against a generator preset.
/// Selection mode tallies the BIC-chosen G per model; recovery mode fits the
/// generating model and reports coefficient averages and ARI.
pub fn cmd_study(cfg: &RunConfig) -> Result<()> {
    let name = cfg
        .preset
        .as_ref()
        .ok_or_else(|| Error::Usage("--preset is required for study".into()))?;
    let p = preset(name)?;
    let dir = ensure_out_dir(&cfg.out)?;
    let mode = cfg.mode.as_deref().unwrap_or("selection");
    let controls = FitControls { use_aitken: true, ..cfg.controls() };

    match mode {
        "selection" => {
            let models = parse_models(&cfg.models)?;
            let grid = SelectionGrid::new(models, (cfg.gmin..=cfg.gmax).collect())?;
            let result = selection_study(
                &grid,
                &|rng| simulate_cwm(&p.params, cfg.n, rng),
                cfg.replicates,
                &controls,
                cfg.seed,
                p.name,
            )?;
            fs::write(dir.join("tally.csv"), result.tally_csv())?;

            #[derive(Serialize)]
            struct Summary<'a> {
                config: &'a RunConfig,
                generator: &'a str,
                winners: Vec<(String, usize)>,
                mean_ari: Vec<(String, Option<f64>)>,
                failures: &'a [String],
                cells: &'a [crate::toolkit::CellOutcome],
            }
            write_json(
                &dir.join("summary.json"),
                &Summary {
                    config: cfg,
                    generator: &result.generator,
                    winners: result
                        .winners
                        .iter()
                        .map(|(m, g)| (m.code(), *g))
                        .collect(),
                    mean_ari: result
                        .models
                        .iter()
                        .zip(&result.mean_ari)
                        .map(|(m, a)| (m.code(), *a))
                        .collect(),
                    failures: &result.failures,
                    cells: &result.cells,
                },
            )?;
            println!(
                "study complete: {} models x {} G values x {} replicates -> {}",
                result.models.len(),
                result.g_values.len(),
                result.n_replicates,
                dir.join("tally.csv").display()
            );
        }
        "recovery" => {
            let result = recovery_study(
                &p,
                cfg.replicates,
                cfg.n,
                &(cfg.gmin..=cfg.gmax).collect::<Vec<_>>(),
                &controls,
                cfg.seed,
            )?;
            #[derive(Serialize)]
            struct Recovery<'a> {
                config: &'a RunConfig,
                generator: &'a str,
                mean_coeffs: Vec<Vec<Vec<f64>>>,
                true_coeffs: Vec<Vec<Vec<f64>>>,
                mean_ari: f64,
                chosen_g: &'a [usize],
                failures: &'a [String],
            }
            let matrix_rows = |m: &nalgebra::DMatrix<f64>| -> Vec<Vec<f64>> {
                (0..m.nrows())
                    .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
                    .collect()
            };
            write_json(
                &dir.join("recovery.json"),
                &Recovery {
                    config: cfg,
                    generator: p.name,
                    mean_coeffs: result.mean_coeffs.iter().map(matrix_rows).collect(),
                    true_coeffs: p
                        .params
                        .groups
                        .iter()
                        .map(|g| matrix_rows(&g.reg.coeffs))
                        .collect(),
                    mean_ari: result.per_replicate_ari.iter().sum::<f64>()
                        / result.per_replicate_ari.len() as f64,
                    chosen_g: &result.chosen_g,
                    failures: &result.failures,
                },
            )?;
            println!(
                "recovery study complete -> {}",
                dir.join("recovery.json").display()
            );
        }
        other => {
            return Err(Error::Usage(format!(
                "unknown study mode '{other}' (selection, recovery)"
            )))
        }
    }
    Ok(())
}

/// `eval`: ARI between a dataset's label column and a predicted partition
/// written by `fit`/`select`.
pub fn cmd_eval(cfg: &RunConfig, pred_path: &str) -> Result<()> {
    let data = load_dataset(cfg)?;
    let truth = data
        .labels
        .clone()
        .ok_or_else(|| Error::Usage("eval needs --labels naming the truth column".into()))?;
    let pred = ingest_labels_csv(pred_path)?;
    if pred.len() != truth.len() {
        return Err(Error::Data(format!(
            "{} predictions for {} observations",
            pred.len(),
            truth.len()
        )));
    }
    let ari = adjusted_rand_index(&pred, &truth)?;
    let dir = ensure_out_dir(&cfg.out)?;
    #[derive(Serialize)]
    struct EvalDoc<'a> {
        config: &'a RunConfig,
        n: usize,
        ari: f64,
    }
    write_json(&dir.join("eval.json"), &EvalDoc { config: cfg, n: truth.len(), ari })?;
    println!("ARI = {ari:.4}");
    Ok(())
}

fn ingest_labels_csv(path: &str) -> Result<Vec<usize>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {path}: {e}")))?;
    let headers = reader
        .headers()
        .map_err(|e| Error::Data(format!("{path}: bad header: {e}")))?
        .clone();
    let col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("label"))
        .ok_or_else(|| Error::Data(format!("{path}: no 'label' column")))?;
    let mut out = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Data(format!("{path}: {e}")))?;
        let raw = record
            .get(col)
            .ok_or_else(|| Error::Data(format!("{path}: short row")))?;
        let v: usize = raw
            .parse()
            .map_err(|_| Error::Data(format!("{path}: bad label '{raw}'")))?;
        out.push(v);
    }
    Ok(out)
}

//! CSV ingestion with named column-mapping presets for the two benchmark
//! datasets.

use nalgebra::DMatrix;

use crate::data::DatasetXY;
use crate::error::{Error, Result};

/// Column mapping: each variable lists acceptable header spellings, matched
/// case-insensitively in order.
pub struct ColumnPreset {
    pub name: &'static str,
    pub responses: Vec<Vec<&'static str>>,
    pub covariates: Vec<Vec<&'static str>>,
    pub labels: Option<Vec<&'static str>>,
}

/// Built-in column presets: "ais" (blood responses, biometrical covariates,
/// sex labels) and "pulpfiber" (paper-property responses, fiber covariates).
pub fn column_preset(name: &str) -> Option<ColumnPreset> {
    match name.to_ascii_lowercase().as_str() {
        "ais" => Some(ColumnPreset {
            name: "ais",
            responses: vec![vec!["rcc"], vec!["wcc"], vec!["ferr", "fe"]],
            covariates: vec![
                vec!["bmi"],
                vec!["ssf"],
                vec!["pcBfat", "bfat", "bft"],
                vec!["lbm"],
            ],
            labels: Some(vec!["sex"]),
        }),
        "pulpfiber" => Some(ColumnPreset {
            name: "pulpfiber",
            responses: vec![vec!["Y2", "em"], vec!["Y3", "sf"]],
            covariates: vec![vec!["X2", "lff"], vec!["X4", "zst"]],
            labels: None,
        }),
        _ => None,
    }
}

fn find_column(headers: &[String], candidates: &[&str]) -> Option<usize> {
    for cand in candidates {
        if let Some(idx) = headers
            .iter()
            .position(|h| h.trim().eq_ignore_ascii_case(cand))
        {
            return Some(idx);
        }
    }
    None
}

/// Reads a headered CSV into a dataset, selecting the named response and
/// covariate columns and, optionally, a label column. Label values may be
/// integers or arbitrary categories; categories are coded in order of first
/// appearance.
pub fn ingest_csv(
    path: &str,
    responses: &[String],
    covariates: &[String],
    labels: Option<&str>,
) -> Result<DatasetXY> {
    for r in responses {
        if covariates.iter().any(|c| c.eq_ignore_ascii_case(r)) {
            return Err(Error::Usage(format!(
                "column '{r}' appears in both --responses and --covariates"
            )));
        }
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::Data(format!("cannot read {path}: {e}")))?;
    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| Error::Data(format!("{path}: bad header: {e}")))?
        .iter()
        .map(|s| s.to_string())
        .collect();

    let locate = |name: &String| -> Result<usize> {
        find_column(&headers, &[name.as_str()]).ok_or_else(|| {
            Error::Data(format!(
                "{path}: column '{name}' not found; header has [{}]",
                headers.join(", ")
            ))
        })
    };
    let resp_idx: Vec<usize> = responses.iter().map(locate).collect::<Result<_>>()?;
    let cov_idx: Vec<usize> = covariates.iter().map(locate).collect::<Result<_>>()?;
    let label_idx = match labels {
        Some(name) => Some(locate(&name.to_string())?),
        None => None,
    };

    let mut xs: Vec<Vec<f64>> = Vec::new();
    let mut ys: Vec<Vec<f64>> = Vec::new();
    let mut label_vals: Vec<usize> = Vec::new();
    let mut categories: Vec<String> = Vec::new();

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e
                .position()
                .map(|p| p.line().to_string())
                .unwrap_or_else(|| "?".into());
            Error::Data(format!("{path}: line {line}: {e}"))
        })?;
        let line = record
            .position()
            .map(|p| p.line())
            .unwrap_or(0);
        let parse_cell = |idx: usize| -> Result<f64> {
            let raw = record.get(idx).ok_or_else(|| {
                Error::Data(format!("{path}: line {line}: missing field {idx}"))
            })?;
            raw.parse::<f64>().map_err(|_| {
                Error::Data(format!(
                    "{path}: line {line}: non-numeric value '{raw}' in column '{}'",
                    headers[idx]
                ))
            })
        };
        ys.push(resp_idx.iter().map(|&i| parse_cell(i)).collect::<Result<_>>()?);
        xs.push(cov_idx.iter().map(|&i| parse_cell(i)).collect::<Result<_>>()?);
        if let Some(li) = label_idx {
            let raw = record
                .get(li)
                .ok_or_else(|| Error::Data(format!("{path}: line {line}: missing label")))?;
            let val = match raw.parse::<f64>() {
                Ok(v) if v >= 0.0 && v.fract() == 0.0 => v as usize,
                _ => {
                    let pos = categories.iter().position(|c| c == raw).unwrap_or_else(|| {
                        categories.push(raw.to_string());
                        categories.len() - 1
                    });
                    pos
                }
            };
            label_vals.push(val);
        }
    }
    if xs.is_empty() {
        return Err(Error::Data(format!("{path}: no data rows after the header")));
    }

    let n = xs.len();
    let x = DMatrix::from_fn(n, cov_idx.len(), |i, j| xs[i][j]);
    let y = DMatrix::from_fn(n, resp_idx.len(), |i, j| ys[i][j]);
    DatasetXY::new(x, y, label_idx.map(|_| label_vals))
}

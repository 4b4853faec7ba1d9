//! Model identifiers, parameter counting, BIC, and the adjusted Rand index.

use std::collections::HashMap;

use crate::dists::Family;
use crate::error::{Error, Result};

/// A fit target: one of the 25 CWM family pairs or one of the 5 FMRs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ModelId {
    Cwm { x: Family, y: Family },
    Fmr { y: Family },
}

impl ModelId {
    pub fn code(&self) -> String {
        match self {
            ModelId::Cwm { x, y } => format!("{}-{}", x.code(), y.code()),
            ModelId::Fmr { y } => format!("FMR-{}", y.code()),
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let up = s.trim().to_ascii_uppercase();
        if let Some(rest) = up.strip_prefix("FMR-").or_else(|| up.strip_prefix("FMR:")) {
            return Ok(ModelId::Fmr { y: Family::parse(rest)? });
        }
        let parts: Vec<&str> = up.split('-').collect();
        if parts.len() != 2 {
            return Err(Error::Usage(format!(
                "model '{s}' is not of the form X-Y or FMR-Y"
            )));
        }
        Ok(ModelId::Cwm { x: Family::parse(parts[0])?, y: Family::parse(parts[1])? })
    }

    pub fn is_cwm(&self) -> bool {
        matches!(self, ModelId::Cwm { .. })
    }

    pub fn y_family(&self) -> Family {
        match self {
            ModelId::Cwm { y, .. } | ModelId::Fmr { y } => *y,
        }
    }

    pub fn x_family(&self) -> Option<Family> {
        match self {
            ModelId::Cwm { x, .. } => Some(*x),
            ModelId::Fmr { .. } => None,
        }
    }

    /// All 25 CWM family pairs.
    pub fn all_cwm() -> Vec<ModelId> {
        let mut out = Vec::with_capacity(25);
        for x in Family::ALL {
            for y in Family::ALL {
                out.push(ModelId::Cwm { x, y });
            }
        }
        out
    }

    /// The five FMR baselines.
    pub fn all_fmr() -> Vec<ModelId> {
        Family::ALL.iter().map(|&y| ModelId::Fmr { y }).collect()
    }

    /// The full grid: 25 CWMs followed by 5 FMRs.
    pub fn all() -> Vec<ModelId> {
        let mut out = Self::all_cwm();
        out.extend(Self::all_fmr());
        out
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.code())
    }
}

/// Number of free parameters of a model:
/// (G-1) mixing weights, plus for CWMs the covariate block
/// G(d + d(d+1)/2) with G d skew terms when X is skewed and the family's
/// concentration count, plus the response block G((d+1)p + p(p+1)/2) with
/// G p skew terms when Y is skewed and the Y concentration count.
pub fn count_params(model: &ModelId, g: usize, d: usize, p: usize) -> usize {
    let mut k = g - 1;
    if let ModelId::Cwm { x, .. } = model {
        k += g * (d + d * (d + 1) / 2);
        if x.is_skewed() {
            k += g * d;
        }
        k += g * x.n_concentration();
    }
    let y = model.y_family();
    k += g * ((d + 1) * p + p * (p + 1) / 2);
    if y.is_skewed() {
        k += g * p;
    }
    k += g * y.n_concentration();
    k
}

/// BIC in the maximized convention: 2 loglik - k log N.
pub fn bic(loglik: f64, n_params: usize, n: usize) -> f64 {
    2.0 * loglik - (n_params as f64) * (n as f64).ln()
}

/// Pair-counting adjusted Rand index between two partitions.
pub fn adjusted_rand_index(labels_a: &[usize], labels_b: &[usize]) -> Result<f64> {
    if labels_a.len() != labels_b.len() {
        return Err(Error::Dimension(format!(
            "partitions have lengths {} and {}",
            labels_a.len(),
            labels_b.len()
        )));
    }
    let n = labels_a.len();
    if n == 0 {
        return Err(Error::Data("empty partitions".into()));
    }
    let mut cont: HashMap<(usize, usize), f64> = HashMap::new();
    let mut row: HashMap<usize, f64> = HashMap::new();
    let mut col: HashMap<usize, f64> = HashMap::new();
    for (&a, &b) in labels_a.iter().zip(labels_b) {
        *cont.entry((a, b)).or_insert(0.0) += 1.0;
        *row.entry(a).or_insert(0.0) += 1.0;
        *col.entry(b).or_insert(0.0) += 1.0;
    }
    let choose2 = |x: f64| x * (x - 1.0) / 2.0;
    let sum_cells: f64 = cont.values().map(|&v| choose2(v)).sum();
    let sum_rows: f64 = row.values().map(|&v| choose2(v)).sum();
    let sum_cols: f64 = col.values().map(|&v| choose2(v)).sum();
    let total = choose2(n as f64);
    let expected = sum_rows * sum_cols / total;
    let max_index = 0.5 * (sum_rows + sum_cols);
    if (max_index - expected).abs() < 1e-12 {
        // identical degenerate partitions agree perfectly
        return Ok(if sum_cells == max_index { 1.0 } else { 0.0 });
    }
    Ok((sum_cells - expected) / (max_index - expected))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn model_codes_round_trip() {
        for m in ModelId::all() {
            assert_eq!(ModelId::parse(&m.code()).unwrap(), m);
        }
        assert_eq!(ModelId::all_cwm().len(), 25);
        assert_eq!(ModelId::all_fmr().len(), 5);
        assert!(ModelId::parse("XYZ").is_err());
    }

    #[test]
    fn count_params_hand_counts() {
        // N-N CWM, G=2, d=3, p=2: 1 + 2(3+6) + 2(8+3) = 41
        let nn = ModelId::Cwm { x: Family::Normal, y: Family::Normal };
        assert_eq!(count_params(&nn, 2, 3, 2), 41);
        // GH-GH adds 2(3 skew + 2 conc) and 2(2 skew + 2 conc): 41 + 18 = 59
        let gh = ModelId::Cwm { x: Family::GenHyperbolic, y: Family::GenHyperbolic };
        assert_eq!(count_params(&gh, 2, 3, 2), 59);
        // FMR Normal, G=1, d=3, p=2: 8 + 3 = 11
        let fmr = ModelId::Fmr { y: Family::Normal };
        assert_eq!(count_params(&fmr, 1, 3, 2), 11);
    }

    #[test]
    fn fmr_always_smaller_than_matching_cwm() {
        for y in Family::ALL {
            for x in Family::ALL {
                for g in 1..=3 {
                    let cwm = count_params(&ModelId::Cwm { x, y }, g, 3, 2);
                    let fmr = count_params(&ModelId::Fmr { y }, g, 3, 2);
                    assert!(fmr < cwm);
                }
            }
        }
    }

    #[test]
    fn bic_conventions() {
        assert_eq!(bic(0.0, 0, 100), 0.0);
        let n = 50;
        let base = bic(-10.0, 4, n);
        let plus_one = bic(-10.0, 5, n);
        assert!((base - plus_one - (n as f64).ln()).abs() < 1e-12);
    }

    #[test]
    fn ari_perfect_and_degenerate() {
        let a = vec![0, 0, 1, 1, 2, 2];
        assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        // permuted labels still perfect
        let b = vec![5, 5, 9, 9, 7, 7];
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 1.0);
        // constant vs balanced two groups: 0
        let a = vec![0, 0, 0, 1, 1, 1];
        let b = vec![3, 3, 3, 3, 3, 3];
        assert_eq!(adjusted_rand_index(&a, &b).unwrap(), 0.0);
        assert!(adjusted_rand_index(&a, &[0, 1]).is_err());
    }

    #[test]
    fn ari_symmetric() {
        let a = vec![0, 0, 1, 1, 2, 2, 0, 1];
        let b = vec![1, 1, 1, 0, 2, 2, 0, 0];
        let ab = adjusted_rand_index(&a, &b).unwrap();
        let ba = adjusted_rand_index(&b, &a).unwrap();
        assert!((ab - ba).abs() < 1e-15);
    }

    #[test]
    fn ari_random_shuffles_center_at_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let a: Vec<usize> = (0..200).map(|i| i % 2).collect();
        let mut b = a.clone();
        let reps = 10_000;
        let mut sum = 0.0;
        for _ in 0..reps {
            b.shuffle(&mut rng);
            sum += adjusted_rand_index(&a, &b).unwrap();
        }
        let mean = sum / reps as f64;
        assert!(mean.abs() < 0.01, "mean ARI under shuffling = {mean}");
    }
}

//! Soft-label initialization: best-of-10 k-means hard starts and random
//! soft starts.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::data::DatasetXY;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InitScheme {
    /// Best of 10 k-means runs on the standardized concatenated (x, y)
    /// rows, converted to a 0/1 matrix.
    KMeansHard,
    /// Independent uniform draws, rows normalized to sum to one.
    RandomSoft,
}

/// N x G soft labels under the requested scheme.
pub fn init_labels<R: Rng + ?Sized>(
    data: &DatasetXY,
    g: usize,
    scheme: InitScheme,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if g == 0 {
        return Err(Error::InvalidParam("G must be at least 1".into()));
    }
    let n = data.n();
    if g == 1 {
        return Ok(DMatrix::from_element(n, 1, 1.0));
    }
    match scheme {
        InitScheme::RandomSoft => {
            let mut z = DMatrix::from_fn(n, g, |_, _| rng.gen::<f64>().max(1e-6));
            for i in 0..n {
                let s: f64 = (0..g).map(|j| z[(i, j)]).sum();
                for j in 0..g {
                    z[(i, j)] /= s;
                }
            }
            Ok(z)
        }
        InitScheme::KMeansHard => {
            let std = data.standardize();
            let points: Vec<DVector<f64>> = (0..n)
                .map(|i| {
                    let mut v = DVector::zeros(std.d() + std.p());
                    v.rows_mut(0, std.d()).copy_from(&std.x_row(i));
                    v.rows_mut(std.d(), std.p()).copy_from(&std.y_row(i));
                    v
                })
                .collect();
            let labels = kmeans_best_of(&points, g, 10, rng)?;
            let mut z = DMatrix::zeros(n, g);
            for (i, &l) in labels.iter().enumerate() {
                z[(i, l)] = 1.0;
            }
            Ok(z)
        }
    }
}

/// Lloyd iterations from random data-point centers; keeps the lowest
/// within-cluster sum of squares across `n_starts` runs. Starts that end
/// with an empty cluster are redrawn.
pub(crate) fn kmeans_best_of<R: Rng + ?Sized>(
    points: &[DVector<f64>],
    k: usize,
    n_starts: usize,
    rng: &mut R,
) -> Result<Vec<usize>> {
    let n = points.len();
    if k > n {
        return Err(Error::InvalidParam(format!("k={k} exceeds n={n}")));
    }
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut completed = 0;
    let mut attempts = 0;
    while completed < n_starts && attempts < n_starts * 20 {
        attempts += 1;
        if let Some((wcss, labels)) = kmeans_once(points, k, rng) {
            if best.as_ref().map(|(b, _)| wcss < *b).unwrap_or(true) {
                best = Some((wcss, labels));
            }
            completed += 1;
        }
    }
    best.map(|(_, l)| l)
        .ok_or_else(|| Error::AllFitsFailed("k-means kept producing empty clusters".into()))
}

fn kmeans_once<R: Rng + ?Sized>(
    points: &[DVector<f64>],
    k: usize,
    rng: &mut R,
) -> Option<(f64, Vec<usize>)> {
    let n = points.len();
    let mut centers: Vec<DVector<f64>> = (0..k)
        .map(|_| points[rng.gen_range(0..n)].clone())
        .collect();
    let mut labels = vec![0usize; n];
    for _ in 0..100 {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let mut best = 0;
            let mut bd = f64::INFINITY;
            for (c, center) in centers.iter().enumerate() {
                let d = (p - center).norm_squared();
                if d < bd {
                    bd = d;
                    best = c;
                }
            }
            if labels[i] != best {
                labels[i] = best;
                changed = true;
            }
        }
        let mut counts = vec![0usize; k];
        let dim = points[0].len();
        let mut sums = vec![DVector::<f64>::zeros(dim); k];
        for (i, p) in points.iter().enumerate() {
            counts[labels[i]] += 1;
            sums[labels[i]] += p;
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        for c in 0..k {
            centers[c] = &sums[c] / counts[c] as f64;
        }
        if !changed {
            break;
        }
    }
    let wcss: f64 = points
        .iter()
        .enumerate()
        .map(|(i, p)| (p - &centers[labels[i]]).norm_squared())
        .sum();
    Some((wcss, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toolkit::adjusted_rand_index;
    use nalgebra::DMatrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn g1_is_all_ones() {
        let data = DatasetXY::new(
            DMatrix::from_element(5, 2, 1.0),
            DMatrix::from_element(5, 1, 0.0),
            None,
        )
        .unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for scheme in [InitScheme::KMeansHard, InitScheme::RandomSoft] {
            let z = init_labels(&data, 1, scheme, &mut rng).unwrap();
            assert!(z.iter().all(|&v| v == 1.0));
        }
    }

    #[test]
    fn rows_always_sum_to_one() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let data = DatasetXY::new(
            DMatrix::from_fn(30, 2, |_, _| rng.gen_range(-1.0..1.0)),
            DMatrix::from_fn(30, 1, |_, _| rng.gen_range(-1.0..1.0)),
            None,
        )
        .unwrap();
        for scheme in [InitScheme::KMeansHard, InitScheme::RandomSoft] {
            let z = init_labels(&data, 3, scheme, &mut rng).unwrap();
            for i in 0..30 {
                let s: f64 = (0..3).map(|j| z[(i, j)]).sum();
                assert!((s - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn kmeans_separates_distant_blobs() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 100;
        // two blobs 10 sigma apart in both blocks
        let x = DMatrix::from_fn(n, 2, |i, _| {
            let c = if i < n / 2 { 0.0 } else { 10.0 };
            c + rng.gen_range(-1.0..1.0)
        });
        let y = DMatrix::from_fn(n, 1, |i, _| {
            let c = if i < n / 2 { 0.0 } else { 10.0 };
            c + rng.gen_range(-1.0..1.0)
        });
        let truth: Vec<usize> = (0..n).map(|i| usize::from(i >= n / 2)).collect();
        let data = DatasetXY::new(x, y, None).unwrap();
        let z = init_labels(&data, 2, InitScheme::KMeansHard, &mut rng).unwrap();
        let hard: Vec<usize> = (0..n)
            .map(|i| if z[(i, 0)] > 0.5 { 0 } else { 1 })
            .collect();
        let ari = adjusted_rand_index(&hard, &truth).unwrap();
        assert!(ari >= 0.9, "ARI {ari}");
    }
}

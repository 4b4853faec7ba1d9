//! Paired covariate/response datasets.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// N observations of a d-dimensional covariate and a p-dimensional response,
/// with optional ground-truth labels.
#[derive(Clone, Debug, PartialEq)]
pub struct DatasetXY {
    pub x: DMatrix<f64>,
    pub y: DMatrix<f64>,
    pub labels: Option<Vec<usize>>,
}

impl DatasetXY {
    pub fn new(x: DMatrix<f64>, y: DMatrix<f64>, labels: Option<Vec<usize>>) -> Result<Self> {
        if x.nrows() != y.nrows() {
            return Err(Error::Dimension(format!(
                "x has {} rows, y has {}",
                x.nrows(),
                y.nrows()
            )));
        }
        if x.nrows() == 0 {
            return Err(Error::Data("empty dataset".into()));
        }
        if x.ncols() == 0 || y.ncols() == 0 {
            return Err(Error::Data("x and y need at least one column each".into()));
        }
        if let Some(l) = &labels {
            if l.len() != x.nrows() {
                return Err(Error::Dimension(format!(
                    "{} labels for {} rows",
                    l.len(),
                    x.nrows()
                )));
            }
        }
        Ok(Self { x, y, labels })
    }

    pub fn n(&self) -> usize {
        self.x.nrows()
    }

    pub fn d(&self) -> usize {
        self.x.ncols()
    }

    pub fn p(&self) -> usize {
        self.y.ncols()
    }

    pub fn x_row(&self, i: usize) -> DVector<f64> {
        self.x.row(i).transpose()
    }

    pub fn y_row(&self, i: usize) -> DVector<f64> {
        self.y.row(i).transpose()
    }

    /// Column-wise z-scoring of both blocks; constant columns are only
    /// centered.
    pub fn standardize(&self) -> DatasetXY {
        let scale = |m: &DMatrix<f64>| {
            let n = m.nrows() as f64;
            let mut out = m.clone();
            for j in 0..m.ncols() {
                let col = m.column(j);
                let mean = col.sum() / n;
                let var = col.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0);
                let sd = var.sqrt();
                for i in 0..m.nrows() {
                    out[(i, j)] = if sd > 0.0 {
                        (m[(i, j)] - mean) / sd
                    } else {
                        m[(i, j)] - mean
                    };
                }
            }
            out
        };
        DatasetXY {
            x: scale(&self.x),
            y: scale(&self.y),
            labels: self.labels.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::dmatrix;

    #[test]
    fn shape_accessors() {
        let d = DatasetXY::new(
            dmatrix![1.0, 2.0; 3.0, 4.0; 5.0, 6.0],
            dmatrix![0.5; 1.5; 2.5],
            Some(vec![1, 1, 2]),
        )
        .unwrap();
        assert_eq!((d.n(), d.d(), d.p()), (3, 2, 1));
    }

    #[test]
    fn rejects_mismatches() {
        assert!(DatasetXY::new(dmatrix![1.0; 2.0], dmatrix![1.0], None).is_err());
        assert!(
            DatasetXY::new(dmatrix![1.0; 2.0], dmatrix![1.0; 2.0], Some(vec![1])).is_err()
        );
    }

    #[test]
    fn standardize_gives_unit_scale() {
        let d = DatasetXY::new(
            dmatrix![1.0; 2.0; 3.0; 4.0],
            dmatrix![10.0; 20.0; 30.0; 40.0],
            None,
        )
        .unwrap();
        let s = d.standardize();
        let mean: f64 = s.x.column(0).sum() / 4.0;
        assert!(mean.abs() < 1e-12);
        let var: f64 = s.x.column(0).iter().map(|v| v * v).sum::<f64>() / 3.0;
        assert!((var - 1.0).abs() < 1e-12);
    }
}

//! Dense symmetric positive-definite kernel: Cholesky factorization,
//! quadratic forms, determinants, and solves.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

/// Ridge added to near-singular scatter matrices, as a multiple of
/// trace/dim.
const RIDGE_SCALE: f64 = 1e-8;

/// A validated SPD matrix carrying its Cholesky factor.
#[derive(Clone, Debug)]
pub struct SpdMatrix {
    mat: DMatrix<f64>,
    chol: Cholesky<f64, Dyn>,
    log_det: f64,
    regularized: bool,
}

impl SpdMatrix {
    /// Validates symmetry (1e-12 relative), factorizes, and regularizes a
    /// near-singular input once with a trace-scaled ridge before giving up.
    pub fn new(mat: DMatrix<f64>) -> Result<Self> {
        let (r, c) = mat.shape();
        if r != c || r == 0 {
            return Err(Error::Dimension(format!("expected square matrix, got {r}x{c}")));
        }
        let scale = mat.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
        for i in 0..r {
            for j in (i + 1)..r {
                if (mat[(i, j)] - mat[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NotSpd(format!(
                        "asymmetric entry ({i},{j}): {} vs {}",
                        mat[(i, j)],
                        mat[(j, i)]
                    )));
                }
            }
        }
        // Work with the symmetrized copy so factorization sees an exactly
        // symmetric matrix.
        let mut sym = mat.clone();
        for i in 0..r {
            for j in (i + 1)..r {
                let v = 0.5 * (mat[(i, j)] + mat[(j, i)]);
                sym[(i, j)] = v;
                sym[(j, i)] = v;
            }
        }
        if let Some(ch) = Cholesky::new(sym.clone()) {
            let log_det = 2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
            if log_det.is_finite() {
                return Ok(Self {
                    mat: sym,
                    chol: ch,
                    log_det,
                    regularized: false,
                });
            }
        }
        let ridge = RIDGE_SCALE * sym.trace() / r as f64;
        if !(ridge > 0.0) {
            return Err(Error::NotSpd(format!(
                "factorization failed and trace {} admits no ridge",
                sym.trace()
            )));
        }
        let mut ridged = sym;
        for i in 0..r {
            ridged[(i, i)] += ridge;
        }
        match Cholesky::new(ridged.clone()) {
            Some(ch) => {
                let log_det =
                    2.0 * ch.l_dirty().diagonal().iter().map(|v| v.ln()).sum::<f64>();
                Ok(Self {
                    mat: ridged,
                    chol: ch,
                    log_det,
                    regularized: true,
                })
            }
            None => Err(Error::NotSpd(
                "factorization failed even after ridge regularization".into(),
            )),
        }
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(DMatrix::identity(dim, dim)).expect("identity is SPD")
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mat
    }

    /// 2 * sum(log diag L).
    pub fn log_det(&self) -> f64 {
        self.log_det
    }

    /// True when the constructor had to add the diagnostic ridge.
    pub fn was_regularized(&self) -> bool {
        self.regularized
    }

    /// Quadratic form delta(x; mu, Sigma) = (x-mu)' Sigma^{-1} (x-mu),
    /// via a triangular solve against L.
    pub fn mahalanobis(&self, x: &DVector<f64>, mu: &DVector<f64>) -> Result<f64> {
        if x.len() != self.dim() || mu.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "mahalanobis with dims x={}, mu={}, sigma={}",
                x.len(),
                mu.len(),
                self.dim()
            )));
        }
        Ok(self.quad_form(&(x - mu)))
    }

    /// rho(alpha; Sigma) = alpha' Sigma^{-1} alpha.
    pub fn skew_norm(&self, alpha: &DVector<f64>) -> Result<f64> {
        if alpha.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "skew_norm with dims alpha={}, sigma={}",
                alpha.len(),
                self.dim()
            )));
        }
        Ok(self.quad_form(alpha))
    }

    /// diff' Sigma^{-1} diff for a pre-centered vector.
    #[inline]
    pub fn quad_form(&self, diff: &DVector<f64>) -> f64 {
        let mut z = diff.clone();
        self.chol
            .l_dirty()
            .solve_lower_triangular_unchecked_mut(&mut z);
        z.norm_squared()
    }

    /// Solves sigma * X = rhs.
    pub fn solve(&self, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        if rhs.nrows() != self.dim() {
            return Err(Error::Dimension(format!(
                "solve rhs has {} rows, sigma is {}x{}",
                rhs.nrows(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(rhs))
    }

    pub fn solve_vec(&self, rhs: &DVector<f64>) -> Result<DVector<f64>> {
        if rhs.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "solve rhs has {} entries, sigma is {}x{}",
                rhs.len(),
                self.dim(),
                self.dim()
            )));
        }
        Ok(self.chol.solve(rhs))
    }

    /// L z, mapping a standard normal draw to covariance Sigma.
    pub fn correlate(&self, z: &DVector<f64>) -> DVector<f64> {
        self.chol.l_dirty().lower_triangle() * z
    }
}

/// Free-function aliases for the SPD operations.
pub fn mahalanobis(x: &DVector<f64>, mu: &DVector<f64>, sigma: &SpdMatrix) -> Result<f64> {
    sigma.mahalanobis(x, mu)
}

pub fn skew_norm(alpha: &DVector<f64>, sigma: &SpdMatrix) -> Result<f64> {
    sigma.skew_norm(alpha)
}

pub fn log_det_spd(sigma: &SpdMatrix) -> f64 {
    sigma.log_det()
}

pub fn solve_spd(sigma: &SpdMatrix, rhs: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    sigma.solve(rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{dmatrix, dvector};

    #[test]
    fn mahalanobis_basics() {
        let eye = SpdMatrix::identity(2);
        let mu = dvector![0.5, -1.0];
        assert_eq!(eye.mahalanobis(&mu, &mu).unwrap(), 0.0);
        let x = dvector![1.5, -1.0];
        assert!((eye.mahalanobis(&x, &mu).unwrap() - 1.0).abs() < 1e-14);

        // diag(2,2): (1,1) quadratic form = 1/2 + 1/2 = 1
        let s = SpdMatrix::new(dmatrix![2.0, 0.0; 0.0, 2.0]).unwrap();
        let d = s
            .mahalanobis(&dvector![1.0, 1.0], &dvector![0.0, 0.0])
            .unwrap();
        assert!((d - 1.0).abs() < 1e-14);
    }

    #[test]
    fn skew_norm_closed_forms() {
        let eye = SpdMatrix::identity(2);
        assert_eq!(eye.skew_norm(&dvector![0.0, 0.0]).unwrap(), 0.0);
        assert!((eye.skew_norm(&dvector![2.0, 0.0]).unwrap() - 4.0).abs() < 1e-14);
        // [[1,.5],[.5,1]]^{-1} (1,1)' . (1,1) = 4/3
        let s = SpdMatrix::new(dmatrix![1.0, 0.5; 0.5, 1.0]).unwrap();
        let r = s.skew_norm(&dvector![1.0, 1.0]).unwrap();
        assert!((r - 4.0 / 3.0).abs() < 1e-13, "{r}");
    }

    #[test]
    fn log_det_values() {
        assert!(SpdMatrix::identity(3).log_det().abs() < 1e-14);
        let s = SpdMatrix::new(dmatrix![2.0, 0.0; 0.0, 3.0]).unwrap();
        assert!((s.log_det() - 6.0f64.ln()).abs() < 1e-13);
        let s = SpdMatrix::new(dmatrix![2.0, 1.0; 1.0, 2.0]).unwrap();
        assert!((s.log_det() - 3.0f64.ln()).abs() < 1e-13);
    }

    #[test]
    fn log_det_scaling_law() {
        let m = dmatrix![2.0, 0.3, 0.1; 0.3, 1.5, -0.2; 0.1, -0.2, 1.1];
        let s1 = SpdMatrix::new(m.clone()).unwrap();
        let c = 3.7;
        let s2 = SpdMatrix::new(m * c).unwrap();
        assert!((s2.log_det() - (3.0 * c.ln() + s1.log_det())).abs() < 1e-12);
    }

    #[test]
    fn solve_round_trip() {
        let m = dmatrix![4.0, 1.0, 0.5, 0.0;
                         1.0, 3.0, 0.2, 0.1;
                         0.5, 0.2, 5.0, -0.3;
                         0.0, 0.1, -0.3, 2.0];
        let s = SpdMatrix::new(m.clone()).unwrap();
        let rhs = dmatrix![1.0, 2.0; -1.0, 0.5; 3.0, 0.0; 0.2, -0.7];
        let x = s.solve(&rhs).unwrap();
        let resid = (&m * &x - &rhs).norm();
        assert!(resid <= 1e-10 * rhs.norm(), "residual {resid}");
        // identity and scalar cases
        let eye = SpdMatrix::identity(2);
        let r2 = dmatrix![4.0; 7.0];
        assert!((eye.solve(&r2).unwrap() - &r2).norm() < 1e-14);
    }

    #[test]
    fn permutation_invariance_of_mahalanobis() {
        let m = dmatrix![2.0, 0.4, 0.1; 0.4, 1.2, -0.3; 0.1, -0.3, 0.9];
        let x = dvector![0.3, -0.7, 1.9];
        let mu = dvector![0.0, 0.2, 0.5];
        let s = SpdMatrix::new(m.clone()).unwrap();
        let base = s.mahalanobis(&x, &mu).unwrap();
        // permute coordinates (2,0,1)
        let perm = [2usize, 0, 1];
        let mut mp = m.clone();
        for i in 0..3 {
            for j in 0..3 {
                mp[(i, j)] = m[(perm[i], perm[j])];
            }
        }
        let xp = dvector![x[perm[0]], x[perm[1]], x[perm[2]]];
        let mup = dvector![mu[perm[0]], mu[perm[1]], mu[perm[2]]];
        let sp = SpdMatrix::new(mp).unwrap();
        assert!((sp.mahalanobis(&xp, &mup).unwrap() - base).abs() < 1e-12);
    }

    #[test]
    fn regularizes_singular_scatter() {
        // rank-1 matrix: needs the ridge
        let m = dmatrix![1.0, 1.0; 1.0, 1.0];
        let s = SpdMatrix::new(m).unwrap();
        assert!(s.was_regularized());
        assert!(s.log_det().is_finite());
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(SpdMatrix::new(dmatrix![1.0, 0.9; 0.2, 1.0]).is_err());
        assert!(SpdMatrix::new(dmatrix![-1.0, 0.0; 0.0, -2.0]).is_err());
        let s = SpdMatrix::identity(2);
        assert!(s.mahalanobis(&dvector![1.0], &dvector![0.0, 0.0]).is_err());
    }
}

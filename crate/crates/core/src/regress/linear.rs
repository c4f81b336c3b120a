use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Damping added to the normal equations when the design is rank deficient.
pub const RIDGE_LAMBDA: f64 = 1e-8;

/// Relative size below which a diagonal entry of R counts as zero.
const RANK_TOL: f64 = 1e-10;

/// Ordinary least squares with an intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta0: f64,
    pub betas: Vec<f64>,
    /// Set when the fit fell back to ridge damping.
    pub regularized: bool,
}

impl LinearModel {
    pub fn fit(x: &DMatrix<f64>, y: &[f64]) -> Result<LinearModel> {
        let (n, p) = x.shape();
        if n != y.len() {
            return Err(Error::LengthMismatch { left: n, right: y.len() });
        }
        if n == 0 {
            return Err(Error::invalid("cannot fit a linear model to zero samples"));
        }
        let mut a = DMatrix::from_element(n, p + 1, 1.0);
        a.view_mut((0, 1), (n, p)).copy_from(x);
        let target = DVector::from_column_slice(y);

        let coef = if n > p {
            let qr = a.clone().qr();
            let r = qr.r();
            let scale = r.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
            let full_rank = scale > 0.0 && r.diagonal().iter().all(|v| v.abs() > RANK_TOL * scale);
            if full_rank {
                let qty = qr.q().transpose() * &target;
                r.solve_upper_triangular(&qty)
            } else {
                None
            }
        } else {
            None
        };

        let (coef, regularized) = match coef {
            Some(c) => (c, false),
            None => (ridge(&a, &target)?, true),
        };
        if coef.iter().any(|c| !c.is_finite()) {
            return Err(Error::FitFailed("linear coefficients are not finite".into()));
        }
        Ok(LinearModel {
            beta0: coef[0],
            betas: coef.iter().skip(1).copied().collect(),
            regularized,
        })
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.betas.len());
        self.beta0 + self.betas.iter().zip(x).map(|(b, v)| b * v).sum::<f64>()
    }
}

fn ridge(a: &DMatrix<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
    let k = a.ncols();
    let gram = a.transpose() * a + DMatrix::identity(k, k) * RIDGE_LAMBDA;
    let rhs = a.transpose() * y;
    gram.clone()
        .cholesky()
        .map(|c| c.solve(&rhs))
        .or_else(|| gram.lu().solve(&rhs))
        .ok_or_else(|| Error::FitFailed("ridge system is singular".into()))
}

use nalgebra::{DMatrix, DVector};
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Relative singular-value threshold below which a design is treated as rank deficient.
pub const RANK_TOL: f64 = 1e-10;

/// Least-squares fit. With an intercept, `coef[0]` is the intercept and
/// `coef[1..]` follow the predictor columns.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OlsFit {
    pub coef: Vec<f64>,
    pub residuals: Vec<f64>,
    pub rss: f64,
    pub n: usize,
    pub k: usize,
    pub intercept: bool,
    /// `(XᵀX)⁻¹` over all fitted parameters.
    #[serde(skip)]
    unscaled_cov: DMatrix<f64>,
}

impl OlsFit {
    pub fn n_params(&self) -> usize {
        self.k + usize::from(self.intercept)
    }

    pub fn df_resid(&self) -> usize {
        self.n - self.n_params()
    }

    /// Unbiased residual variance `rss / (n - params)`.
    pub fn sigma2(&self) -> Result<f64> {
        match self.df_resid() {
            0 => Err(Error::InsufficientData("no residual degrees of freedom".into())),
            df => Ok(self.rss / df as f64),
        }
    }

    fn param_index(&self, predictor: usize) -> usize {
        predictor + usize::from(self.intercept)
    }

    /// Coefficient of predictor column `j`.
    pub fn slope(&self, j: usize) -> f64 {
        self.coef[self.param_index(j)]
    }

    pub fn intercept_value(&self) -> Option<f64> {
        self.intercept.then(|| self.coef[0])
    }

    pub fn std_error(&self, j: usize) -> Result<f64> {
        let i = self.param_index(j);
        Ok((self.sigma2()? * self.unscaled_cov[(i, i)]).sqrt())
    }

    /// Two-sided `(1 - alpha)` t-interval for predictor `j`.
    pub fn conf_interval(&self, j: usize, alpha: f64) -> Result<(f64, f64)> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
        }
        let se = self.std_error(j)?;
        let dist = StudentsT::new(0.0, 1.0, self.df_resid() as f64)
            .map_err(|e| Error::Numerical(e.to_string()))?;
        let q = dist.inverse_cdf(1.0 - alpha / 2.0);
        let b = self.slope(j);
        Ok((b - q * se, b + q * se))
    }
}

/// Least squares of `y` on the columns of `x`. Rank is judged on the
/// singular values of the triangular factor of a thin QR.
pub fn ols(y: &[f64], x: &DMatrix<f64>, intercept: bool) -> Result<OlsFit> {
    let n = y.len();
    if x.nrows() != n {
        return Err(Error::InvalidArgument(format!("{} rows in design but {} responses", x.nrows(), n)));
    }
    let k = x.ncols();
    let m = k + usize::from(intercept);
    if n <= m {
        return Err(Error::InsufficientData(format!("{n} observations for {m} parameters")));
    }
    let design = if intercept {
        let mut d = DMatrix::from_element(n, m, 1.0);
        d.view_mut((0, 1), (n, k)).copy_from(x);
        d
    } else {
        x.clone()
    };
    let yv = DVector::from_column_slice(y);
    let (coef, unscaled_cov) = solve_least_squares(&design, &yv)?;
    let fitted = &design * &coef;
    let residuals: Vec<f64> = yv.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    let rss = residuals.iter().map(|r| r * r).sum();
    Ok(OlsFit { coef: coef.iter().copied().collect(), residuals, rss, n, k, intercept, unscaled_cov })
}

/// Least squares on predictor columns given as slices.
pub fn ols_columns(y: &[f64], cols: &[Vec<f64>], intercept: bool) -> Result<OlsFit> {
    let n = y.len();
    if let Some(bad) = cols.iter().find(|c| c.len() != n) {
        return Err(Error::InvalidArgument(format!("predictor of length {} for {} responses", bad.len(), n)));
    }
    let x = DMatrix::from_fn(n, cols.len(), |i, j| cols[j][i]);
    ols(y, &x, intercept)
}

fn solve_least_squares(design: &DMatrix<f64>, y: &DVector<f64>) -> Result<(DVector<f64>, DMatrix<f64>)> {
    let m = design.ncols();
    if m == 0 {
        return Ok((DVector::zeros(0), DMatrix::zeros(0, 0)));
    }
    let qr = design.clone().qr();
    let r = qr.r();
    let qty = qr.q().transpose() * y;
    let svd = r.svd(true, true);
    let sv = &svd.singular_values;
    let smax = sv.max();
    let rank = sv.iter().filter(|&&s| s > RANK_TOL * smax).count();
    if smax == 0.0 || rank < m {
        return Err(Error::SingularDesign { rank, cols: m });
    }
    let u = svd.u.as_ref().expect("requested");
    let vt = svd.v_t.as_ref().expect("requested");
    let inv_s = DMatrix::from_diagonal(&sv.map(|s| 1.0 / s));
    let v = vt.transpose();
    let coef = &v * &inv_s * u.transpose() * qty;
    let unscaled = &v * (&inv_s * &inv_s) * vt;
    Ok((coef, unscaled))
}

//! Sample statistics and hypothesis tests.

mod invariance;
mod ks;
mod ols;

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::Node;

pub use invariance::{
    context_groups, design, fit_rows, invariance_test_regression, invariance_test_residual_ks, nested_f_test,
    regression_invariance, residual_ks_invariance, InvarianceTest,
};
pub use ks::{kolmogorov_q, ks_statistic, ks_two_sample};
pub use ols::{ols, ols_columns, OlsFit, RANK_TOL};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub p_value: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub df: Option<(f64, f64)>,
    pub description: String,
}

impl TestReport {
    pub fn new(statistic: f64, p_value: f64, df: Option<(f64, f64)>, description: String) -> Self {
        let p_value = if p_value.is_nan() { 1.0 } else { p_value.clamp(0.0, 1.0) };
        TestReport { statistic, p_value, df, description }
    }

    pub fn rejects(&self, alpha: f64) -> bool {
        self.p_value <= alpha
    }
}

/// Pearson correlation. Errors on fewer than three points or a constant input.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("correlation inputs differ in length".into()));
    }
    let n = x.len();
    if n < 3 {
        return Err(Error::InsufficientData(format!("{n} pooled rows; correlation needs at least 3")));
    }
    let mx = x.iter().sum::<f64>() / n as f64;
    let my = y.iter().sum::<f64>() / n as f64;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (da, db) = (a - mx, b - my);
        sxy += da * db;
        sxx += da * da;
        syy += db * db;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("a column is constant over the pooled rows".into()));
    }
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Correlation of columns `s` and `t` over the rows whose context is in `ctx_ids`.
pub fn conditional_correlation(ds: &Dataset, s: Node, t: Node, ctx_ids: &[&str]) -> Result<f64> {
    let rows = ds.rows_in(ctx_ids)?;
    correlation_on_rows(ds, s, t, &rows)
}

pub fn correlation_on_rows(ds: &Dataset, s: Node, t: Node, rows: &[usize]) -> Result<f64> {
    for n in [s, t] {
        if n >= ds.p() {
            return Err(Error::NodeOutOfRange { index: n, p: ds.p() });
        }
    }
    if rows.is_empty() {
        return Err(Error::InsufficientData("empty pool of rows".into()));
    }
    pearson(&ds.gather(s, rows), &ds.gather(t, rows))
}

fn std_normal() -> Normal {
    Normal::standard()
}

/// Two-sided test of zero correlation via `atanh(r)·√(n−3)`.
pub fn fisher_z_test(r: f64, n: usize) -> Result<TestReport> {
    if !(-1.0..=1.0).contains(&r) {
        return Err(Error::InvalidArgument(format!("correlation {r} outside [-1, 1]")));
    }
    if n < 4 {
        return Err(Error::InsufficientData(format!("Fisher z needs n >= 4, got {n}")));
    }
    if r.abs() == 1.0 {
        return Ok(TestReport::new(r.signum() * f64::INFINITY, 0.0, None, "perfect correlation".into()));
    }
    let z = r.signum() * r.abs().atanh() * ((n - 3) as f64).sqrt();
    let p = 2.0 * std_normal().sf(z.abs());
    Ok(TestReport::new(z, p, None, format!("Fisher z, n={n}")))
}

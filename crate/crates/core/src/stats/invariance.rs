use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, FisherSnedecor};

use super::ks::ks_two_sample;
use super::ols::{ols, OlsFit};
use super::TestReport;
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};

/// Which test decides whether `t ~ S` is invariant across contexts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InvarianceTest {
    /// Equal coefficients (Chow F) and equal residual variances (pairwise F).
    #[default]
    Regression,
    /// KS of each context's pooled-fit residuals against the rest.
    #[serde(alias = "residual_ks", alias = "residualks")]
    Ks,
}

impl InvarianceTest {
    pub fn run(self, ds: &Dataset, groups: &[Vec<usize>], t: Node, s: &NodeSet) -> Result<TestReport> {
        match self {
            InvarianceTest::Regression => regression_invariance(ds, groups, t, s),
            InvarianceTest::Ks => residual_ks_invariance(ds, groups, t, s),
        }
    }
}

impl std::str::FromStr for InvarianceTest {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "regression" => Ok(InvarianceTest::Regression),
            "ks" | "residual-ks" => Ok(InvarianceTest::Ks),
            _ => Err(Error::InvalidArgument(format!("unknown invariance test `{s}`"))),
        }
    }
}

/// Row indices of every non-empty context, in registry order.
pub fn context_groups(ds: &Dataset) -> Vec<Vec<usize>> {
    ds.rows_by_context().into_iter().filter(|g| !g.is_empty()).collect()
}

/// Predictor matrix for the columns `s` over `rows`.
pub fn design(ds: &Dataset, rows: &[usize], s: &NodeSet) -> DMatrix<f64> {
    let cols: Vec<&[f64]> = s.iter().map(|j| ds.column(j)).collect();
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| cols[j][rows[i]])
}

/// OLS of column `t` on columns `s` over `rows`, with intercept.
pub fn fit_rows(ds: &Dataset, rows: &[usize], t: Node, s: &NodeSet) -> Result<OlsFit> {
    ols(&ds.gather(t, rows), &design(ds, rows, s), true)
}

fn check_inputs(ds: &Dataset, groups: &[Vec<usize>], t: Node, s: &NodeSet) -> Result<()> {
    let p = ds.p();
    for n in s.iter().chain(std::iter::once(t)) {
        if n >= p {
            return Err(Error::NodeOutOfRange { index: n, p });
        }
    }
    if s.contains(t) {
        return Err(Error::InvalidArgument("target cannot be among its own predictors".into()));
    }
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!("{} context(s); invariance needs at least 2", groups.len())));
    }
    let need = s.len() + 2;
    if let Some(g) = groups.iter().find(|g| g.len() < need) {
        return Err(Error::InsufficientData(format!(
            "a context has {} rows, at least {need} needed for {} predictors",
            g.len(),
            s.len()
        )));
    }
    Ok(())
}

fn f_dist(d1: f64, d2: f64) -> Result<FisherSnedecor> {
    FisherSnedecor::new(d1, d2).map_err(|e| Error::Numerical(e.to_string()))
}

/// Chow-type F test for equal coefficients across groups combined with
/// pairwise F tests for equal residual variances (Bonferroni over pairs);
/// the two parts are combined by Bonferroni.
pub fn regression_invariance(ds: &Dataset, groups: &[Vec<usize>], t: Node, s: &NodeSet) -> Result<TestReport> {
    check_inputs(ds, groups, t, s)?;
    let m = s.len() + 1;
    let k = groups.len();
    let all: Vec<usize> = groups.concat();
    let pooled = fit_rows(ds, &all, t, s)?;
    let fits = groups.iter().map(|g| fit_rows(ds, g, t, s)).collect::<Result<Vec<_>>>()?;
    let rss_within: f64 = fits.iter().map(|f| f.rss).sum();
    if !(rss_within > 0.0) {
        return Err(Error::Numerical("per-context fits are exact; residual variance is zero".into()));
    }

    let d1 = ((k - 1) * m) as f64;
    let d2 = (all.len() - k * m) as f64;
    let f_coef = ((pooled.rss - rss_within).max(0.0) / d1) / (rss_within / d2);
    let p_coef = f_dist(d1, d2)?.sf(f_coef);

    let mut p_var_min: f64 = 1.0;
    let mut pairs = 0usize;
    for i in 0..k {
        for j in (i + 1)..k {
            let (fi, fj) = (&fits[i], &fits[j]);
            let (vi, vj) = (fi.sigma2()?, fj.sigma2()?);
            if !(vj > 0.0) {
                return Err(Error::Numerical("zero residual variance in a context".into()));
            }
            let dist = f_dist(fi.df_resid() as f64, fj.df_resid() as f64)?;
            let ratio = vi / vj;
            let p = (2.0 * dist.cdf(ratio).min(dist.sf(ratio))).min(1.0);
            p_var_min = p_var_min.min(p);
            pairs += 1;
        }
    }
    let p_var = (p_var_min * pairs as f64).min(1.0);
    let p = (2.0 * p_coef.min(p_var)).min(1.0);
    Ok(TestReport::new(
        f_coef,
        p,
        Some((d1, d2)),
        format!("coefficient equality p={p_coef:.4e}; residual variance equality p={p_var:.4e} over {pairs} pair(s)"),
    ))
}

/// Pooled fit of `t ~ S`, then KS of each group's residuals against all other
/// residuals. With two groups the single comparison is used as is; otherwise
/// the smallest p-value is Bonferroni-corrected over the groups.
pub fn residual_ks_invariance(ds: &Dataset, groups: &[Vec<usize>], t: Node, s: &NodeSet) -> Result<TestReport> {
    check_inputs(ds, groups, t, s)?;
    let all: Vec<usize> = groups.concat();
    let pooled = fit_rows(ds, &all, t, s)?;
    let mut offset = 0;
    let mut per_group = Vec::with_capacity(groups.len());
    for g in groups {
        per_group.push(&pooled.residuals[offset..offset + g.len()]);
        offset += g.len();
    }
    let comparisons = if groups.len() == 2 { 1 } else { groups.len() };
    let mut d_max: f64 = 0.0;
    let mut p_min: f64 = 1.0;
    for (k, own) in per_group.iter().enumerate().take(comparisons) {
        let rest: Vec<f64> = per_group
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != k)
            .flat_map(|(_, r)| r.iter().copied())
            .collect();
        let r = ks_two_sample(own, &rest)?;
        d_max = d_max.max(r.statistic);
        p_min = p_min.min(r.p_value);
    }
    let p = (p_min * comparisons as f64).min(1.0);
    Ok(TestReport::new(d_max, p, None, format!("residual KS over {comparisons} comparison(s)")))
}

/// Pooled partial F test that adding `extra` to `t ~ S` explains nothing.
pub fn nested_f_test(ds: &Dataset, rows: &[usize], t: Node, s: &NodeSet, extra: &NodeSet) -> Result<TestReport> {
    let extra = NodeSet::new(extra.iter().filter(|&j| !s.contains(j) && j != t));
    if extra.is_empty() {
        return Ok(TestReport::new(0.0, 1.0, None, "no additional predictors".into()));
    }
    let full = s.union(&extra);
    let small = fit_rows(ds, rows, t, s)?;
    let big = fit_rows(ds, rows, t, &full)?;
    let q = extra.len() as f64;
    let d2 = big.df_resid() as f64;
    if !(big.rss > 0.0) || d2 < 1.0 {
        return Err(Error::Numerical("full regression leaves no residual variance".into()));
    }
    let f = ((small.rss - big.rss).max(0.0) / q) / (big.rss / d2);
    let p = f_dist(q, d2)?.sf(f);
    Ok(TestReport::new(f, p, Some((q, d2)), format!("partial F for {} added predictor(s)", extra.len())))
}

pub fn invariance_test_regression(ds: &Dataset, t: Node, s: &NodeSet) -> Result<TestReport> {
    regression_invariance(ds, &context_groups(ds), t, s)
}

pub fn invariance_test_residual_ks(ds: &Dataset, t: Node, s: &NodeSet) -> Result<TestReport> {
    residual_ks_invariance(ds, &context_groups(ds), t, s)
}

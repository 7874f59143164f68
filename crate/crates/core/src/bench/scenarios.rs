use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::models::{chain_sem, common_cause_sem, contexts_on};
use crate::data::{DataContext, Dataset};
use crate::error::{Error, Result};
use crate::icp::{icp_target, IcpConfig, IcpResult};
use crate::sem::{equal_pooled_moments, simulate, stream_rng, InterventionKind, LinearSem};
use crate::stats::{correlation_on_rows, fit_rows, ks_two_sample};
use crate::graph::NodeSet;

pub const FIGURE1_N: usize = 100;

/// One graph/intervention combination of the scatterplot demonstration.
#[derive(Debug, Clone, Serialize)]
pub struct Figure1Cell {
    pub name: String,
    pub graph: String,
    /// Standard deviation of the intervention `W = 1 + σ_w N(0,1)` on `s`.
    pub sigma_w: f64,
    pub corr_obs: f64,
    pub corr_int: f64,
    /// KS p-value for `X_t` between the two contexts.
    pub ks_p_raw: f64,
    /// KS p-value after centring `X_t` within each context; only a change of
    /// shape or spread counts.
    pub ks_p_centered: f64,
    #[serde(skip)]
    pub data: Dataset,
}

impl Figure1Cell {
    pub fn detects_change(&self, alpha: f64) -> bool {
        self.ks_p_centered <= alpha
    }
}

fn centered(x: Vec<f64>) -> Vec<f64> {
    let m = x.iter().sum::<f64>() / x.len() as f64;
    x.into_iter().map(|v| v - m).collect()
}

/// The four cells: chain and common cause, each with `σ_w = 1` and `σ_w = 0.3`,
/// `n` rows per context. Cell `k` draws from stream `k` of `seed`.
pub fn figure1_scenarios(seed: u64, n: usize) -> Result<Vec<Figure1Cell>> {
    let cells: [(&str, &str, fn() -> LinearSem, f64); 4] = [
        ("a", "chain", chain_sem, 1.0),
        ("b", "chain", chain_sem, 0.3),
        ("c", "common_cause", common_cause_sem, 1.0),
        ("d", "common_cause", common_cause_sem, 0.3),
    ];
    cells
        .iter()
        .enumerate()
        .map(|(k, &(name, graph, build, sigma_w))| {
            let sem = build();
            let ctxs = contexts_on(&sem, &[0], InterventionKind::Hard, 1.0, sigma_w * sigma_w);
            let data = simulate(&sem, &ctxs, n, stream_rng(seed, k as u64).random())?;
            let (obs, int) = (data.rows_of(0), data.rows_of(1));
            let (t_obs, t_int) = (data.gather(2, &obs), data.gather(2, &int));
            Ok(Figure1Cell {
                name: name.into(),
                graph: graph.into(),
                sigma_w,
                corr_obs: correlation_on_rows(&data, 0, 2, &obs)?,
                corr_int: correlation_on_rows(&data, 0, 2, &int)?,
                ks_p_raw: ks_two_sample(&t_obs, &t_int)?.p_value,
                ks_p_centered: ks_two_sample(&centered(t_obs), &centered(t_int))?.p_value,
                data,
            })
        })
        .collect()
}

fn standardized(x: Vec<f64>) -> Vec<f64> {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    let sd = (x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
    x.into_iter().map(|v| (v - m) / sd).collect()
}

/// `cell,context,s,t` with `s` and `t` standardized within each context.
pub fn figure1_scatter_csv(cells: &[Figure1Cell]) -> String {
    let mut out = String::from("cell,context,s,t\n");
    for c in cells {
        for (k, ctx) in c.data.contexts().iter().enumerate() {
            let rows = c.data.rows_of(k);
            let s = standardized(c.data.gather(0, &rows));
            let t = standardized(c.data.gather(2, &rows));
            for (a, b) in s.iter().zip(&t) {
                out.push_str(&format!("{},{},{a},{b}\n", c.name, ctx.id));
            }
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConfoundedParams {
    pub beta_su: f64,
    pub beta_tu: f64,
    pub beta_ts: f64,
    /// Standard deviation of the hidden `u`; 0 removes it.
    pub sigma_u: f64,
    /// Hard intervention on `s` replacing its mechanism by `N(mean, var)`.
    pub shift_mean: f64,
    pub shift_var: f64,
}

impl Default for ConfoundedParams {
    fn default() -> Self {
        ConfoundedParams { beta_su: 0.8, beta_tu: 0.6, beta_ts: 0.5, sigma_u: 1.0, shift_mean: 1.0, shift_var: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ConfoundedReport {
    pub params: ConfoundedParams,
    pub n_per_context: usize,
    /// Sample covariance of the `t ~ s` residual with `X_s`; zero by construction.
    pub cov_resid_s: f64,
    pub cov_resid_u: f64,
    pub se_resid_u: f64,
    /// `β_tu σ_u² (1 − ρ²_su)` on the pooled population moments.
    pub closed_form: f64,
    /// ICP for `t` on the observed columns `s, t`.
    pub icp: IcpResult,
}

impl ConfoundedReport {
    /// Deviation of the sample covariance from the closed form in standard errors.
    pub fn z_score(&self) -> f64 {
        let d = self.cov_resid_u - self.closed_form;
        if d == 0.0 {
            0.0
        } else {
            d / self.se_resid_u
        }
    }
}

/// `u -> s`, `u -> t`, `s -> t`, with `u` hidden and a hard intervention on `s`
/// cutting `u -> s`. `X_u = σ_u z` with `z` standard normal; `σ_u = 0` zeroes
/// both the column and its effects. `n` rows per context.
pub fn confounded_scenario(seed: u64, n: usize, params: ConfoundedParams) -> Result<ConfoundedReport> {
    if n < 100 {
        return Err(Error::InvalidArgument(format!("n must be at least 100, got {n}")));
    }
    let ConfoundedParams { beta_su, beta_tu, beta_ts, sigma_u, shift_mean, shift_var } = params;
    let sem = LinearSem::from_edges(
        &["u", "s", "t"],
        &[("u", "s", beta_su * sigma_u), ("u", "t", beta_tu * sigma_u), ("s", "t", beta_ts)],
    )?;
    let ctxs = contexts_on(&sem, &[1], InterventionKind::Hard, shift_mean, shift_var);
    let full = simulate(&sem, &ctxs, n, seed)?;

    let pooled = equal_pooled_moments(&sem, &ctxs)?;
    let rho = pooled.correlation(0, 1);
    let closed_form = beta_tu * sigma_u * sigma_u * pooled.variance(0) * (1.0 - rho * rho);

    let rows: Vec<usize> = (0..full.n()).collect();
    let fit = fit_rows(&full, &rows, 2, &NodeSet::singleton(1))?;
    let r = &fit.residuals;
    let xu: Vec<f64> = full.column(0).iter().map(|z| sigma_u * z).collect();
    let (cov_resid_u, se_resid_u) = covariance_with_se(r, &xu);
    let (cov_resid_s, _) = covariance_with_se(r, full.column(1));

    let observed = Dataset::from_indices(
        vec!["s".into(), "t".into()],
        DMatrix::from_fn(full.n(), 2, |i, j| full.value(i, j + 1)),
        full.row_context().to_vec(),
        vec![DataContext::observational("obs"), DataContext::intervention("s", 0)],
    )?;
    let icp = icp_target(&observed, 1, &IcpConfig::default())?;
    Ok(ConfoundedReport { params, n_per_context: n, cov_resid_s, cov_resid_u, se_resid_u, closed_form, icp })
}

/// Sample covariance and its standard error from the spread of the centred products.
fn covariance_with_se(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let prods: Vec<f64> = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).collect();
    let cov = prods.iter().sum::<f64>() / (n - 1.0);
    let mean = prods.iter().sum::<f64>() / n;
    let var = prods.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (cov, (var / n).sqrt())
}

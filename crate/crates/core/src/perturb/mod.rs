//! Perturbation graphs and transitive-reduction pruning.
//!
//! An edge `s -> t` claims that intervening on `s` changes `t`; it is an
//! ancestor claim, not a parent claim. [`transitive_reduce`] applies the
//! path-correlation pruning rule, which is known to be inconsistent.

mod tr;
mod wright;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::export::dot_lines;
use crate::graph::{DiGraph, Node};
use crate::sem::{equal_pooled_moments, population_moments, ContextSpec, LinearSem};
use crate::stats::{correlation_on_rows, fisher_z_test, ks_two_sample};

pub use tr::{tr_criterion, tr_witness, transitive_reduce, RemovedEdge, TrResult};
pub use wright::{standardize, unit_variance_sem, wright_path_sum, STANDARDIZED_TOL};

/// Threshold under which population-level quantities count as zero.
pub const ORACLE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PgMode {
    /// Edge iff the pooled correlation is nonzero.
    Rice,
    /// Additionally require a distribution change at the target.
    #[default]
    Strict,
}

impl std::str::FromStr for PgMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "rice" => Ok(PgMode::Rice),
            "strict" => Ok(PgMode::Strict),
            _ => Err(Error::InvalidArgument(format!("unknown mode `{s}` (expected rice or strict)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PgEdge {
    pub source: Node,
    pub target: Node,
    /// Pooled correlation over the observational and source-intervention contexts.
    pub weight: f64,
    /// Bonferroni-adjusted Fisher-z p-value for zero correlation.
    pub pvalue_corr: f64,
    /// Bonferroni-adjusted p-value for no change at the target (Strict mode).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pvalue_change: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationGraph {
    pub labels: Vec<String>,
    pub mode: PgMode,
    pub alpha: f64,
    /// Sorted by `(source, target)`.
    pub edges: Vec<PgEdge>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl PerturbationGraph {
    /// Graph from explicit weighted edges; p-values are set to 0.
    pub fn from_weights(labels: Vec<String>, edges: &[(Node, Node, f64)]) -> Result<Self> {
        let pg = PerturbationGraph {
            labels,
            mode: PgMode::Rice,
            alpha: 0.05,
            edges: edges
                .iter()
                .map(|&(source, target, weight)| PgEdge {
                    source,
                    target,
                    weight,
                    pvalue_corr: 0.0,
                    pvalue_change: None,
                })
                .collect(),
            warnings: Vec::new(),
        };
        pg.validated()
    }

    /// Checks indices, weights and p-values, and sorts edges.
    pub fn validated(mut self) -> Result<Self> {
        let p = self.labels.len();
        DiGraph::new(self.labels.clone(), std::iter::empty())?;
        let mut seen = std::collections::BTreeSet::new();
        for e in &self.edges {
            for n in [e.source, e.target] {
                if n >= p {
                    return Err(Error::NodeOutOfRange { index: n, p });
                }
            }
            if e.source == e.target {
                return Err(Error::SelfLoop(e.source));
            }
            if !seen.insert((e.source, e.target)) {
                return Err(Error::Format(format!("duplicate edge {} -> {}", e.source, e.target)));
            }
            if !(-1.0..=1.0).contains(&e.weight) {
                return Err(Error::Format(format!("edge weight {} outside [-1, 1]", e.weight)));
            }
            let ps = std::iter::once(e.pvalue_corr).chain(e.pvalue_change);
            for pv in ps {
                if !(0.0..=1.0).contains(&pv) {
                    return Err(Error::Format(format!("p-value {pv} outside [0, 1]")));
                }
            }
        }
        self.edges.sort_by_key(|e| (e.source, e.target));
        Ok(self)
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn edge(&self, s: Node, t: Node) -> Option<&PgEdge> {
        self.edges
            .binary_search_by_key(&(s, t), |e| (e.source, e.target))
            .ok()
            .map(|i| &self.edges[i])
    }

    pub fn has_edge(&self, s: Node, t: Node) -> bool {
        self.edge(s, t).is_some()
    }

    pub fn weight(&self, s: Node, t: Node) -> Option<f64> {
        self.edge(s, t).map(|e| e.weight)
    }

    pub fn digraph(&self) -> DiGraph {
        DiGraph::new(self.labels.clone(), self.edges.iter().map(|e| (e.source, e.target)))
            .expect("validated edges")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let pg: PerturbationGraph = serde_json::from_str(text)?;
        pg.validated()
    }

    pub fn to_dot(&self) -> String {
        let attrs: Vec<String> = self.edges.iter().map(|e| format!("label=\"{:.3}\"", e.weight)).collect();
        dot_lines(
            &self.labels,
            self.edges.iter().zip(&attrs).map(|(e, a)| (e.source, e.target, a.as_str())),
        )
    }
}

struct PairStat {
    s: Node,
    t: Node,
    r: f64,
    p_corr: f64,
    p_change: Option<f64>,
}

/// Perturbation graph from pooled data. For every source `s` with an
/// intervention context and every `t ≠ s`: the pooled correlation over
/// `{∅, ctx(s)}` is Fisher-z tested; Strict mode also KS-tests column `t`
/// between the two contexts. Both p-values are Bonferroni-adjusted over the
/// `p(p−1)` ordered pairs before comparing with `alpha`.
pub fn build_perturbation_graph(ds: &Dataset, alpha: f64, mode: PgMode) -> Result<PerturbationGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {alpha}")));
    }
    let obs = ds.observational()?;
    let obs_rows = ds.rows_of(obs);
    let p = ds.p();
    let mut warnings = Vec::new();
    let mut sources = Vec::new();
    for s in 0..p {
        match ds.contexts_targeting(s).as_slice() {
            [] => warnings.push(format!("no intervention context for `{}`; it has no outgoing edges", ds.labels()[s])),
            [k, rest @ ..] => {
                if !rest.is_empty() {
                    warnings.push(format!(
                        "several contexts intervene on `{}`; using `{}`",
                        ds.labels()[s],
                        ds.contexts()[*k].id
                    ));
                }
                sources.push((s, ds.rows_of(*k)));
            }
        }
    }
    let pairs: Vec<(Node, Node, &Vec<usize>)> = sources
        .iter()
        .flat_map(|(s, rows)| (0..p).filter(move |&t| t != *s).map(move |t| (*s, t, rows)))
        .collect();
    let m = (p * p.saturating_sub(1)).max(1) as f64;
    let stats = pairs
        .par_iter()
        .map(|&(s, t, int_rows)| {
            let pooled: Vec<usize> = obs_rows.iter().chain(int_rows).copied().collect();
            let r = correlation_on_rows(ds, s, t, &pooled)?;
            let p_corr = (fisher_z_test(r, pooled.len())?.p_value * m).min(1.0);
            let p_change = match mode {
                PgMode::Rice => None,
                PgMode::Strict => {
                    let ks = ks_two_sample(&ds.gather(t, &obs_rows), &ds.gather(t, int_rows))?;
                    Some((ks.p_value * m).min(1.0))
                }
            };
            Ok(PairStat { s, t, r, p_corr, p_change })
        })
        .collect::<Result<Vec<_>>>()?;

    let edges = stats
        .into_iter()
        .filter(|st| st.p_corr <= alpha && st.p_change.is_none_or(|pc| pc <= alpha))
        .map(|st| PgEdge { source: st.s, target: st.t, weight: st.r, pvalue_corr: st.p_corr, pvalue_change: st.p_change })
        .collect();
    PerturbationGraph { labels: ds.labels().to_vec(), mode, alpha, edges, warnings }.validated()
}

/// Exact counterpart of [`build_perturbation_graph`]: weights are pooled
/// population correlations over equally weighted `{∅, ctx(s)}`, and "nonzero"
/// and "changed" use [`ORACLE_TOL`]. P-values are 0 for detected effects.
pub fn population_perturbation_graph(
    sem: &LinearSem,
    contexts: &[ContextSpec],
    mode: PgMode,
) -> Result<PerturbationGraph> {
    let obs = contexts
        .iter()
        .find(|c| c.intervention.is_none())
        .ok_or(Error::MissingObservational)?;
    let obs_m = population_moments(sem, obs)?;
    let p = sem.p();
    let mut edges = Vec::new();
    let mut warnings = Vec::new();
    for s in 0..p {
        let Some(ctx) = contexts.iter().find(|c| c.target() == Some(s)) else {
            warnings.push(format!("no intervention context for `{}`", sem.labels()[s]));
            continue;
        };
        let pooled = equal_pooled_moments(sem, &[obs.clone(), ctx.clone()])?;
        let int_m = population_moments(sem, ctx)?;
        for t in (0..p).filter(|&t| t != s) {
            let r = pooled.correlation(s, t);
            let changed = (obs_m.mean[t] - int_m.mean[t]).abs() > ORACLE_TOL
                || (obs_m.variance(t) - int_m.variance(t)).abs() > ORACLE_TOL;
            let keep = r.abs() > ORACLE_TOL && (mode == PgMode::Rice || changed);
            if keep {
                edges.push(PgEdge {
                    source: s,
                    target: t,
                    weight: r.clamp(-1.0, 1.0),
                    pvalue_corr: 0.0,
                    pvalue_change: (mode == PgMode::Strict).then_some(0.0),
                });
            }
        }
    }
    PerturbationGraph { labels: sem.labels().to_vec(), mode, alpha: ORACLE_TOL, edges, warnings }
        .validated()
}

#[cfg(test)]
mod tests;

//! Invariant causal prediction: for a target `t`, every predictor set `S` is
//! tested for invariance of `t ~ S` across contexts, and the intersection of
//! the accepted sets estimates the parents of `t`.

mod oracle;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::graph::export::dot_lines;
use crate::graph::{DiGraph, Node, NodeSet};
use crate::stats::{fit_rows, nested_f_test, InvarianceTest, TestReport};

pub use oracle::{population_accepted_sets, population_invariance};

/// Which variables the residual of `t ~ S` must be unrelated to.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ResidualScope {
    /// Only invariance of `t ~ S` across contexts is tested.
    #[default]
    Predictors,
    /// Additionally, no variable outside `S` may improve the pooled fit
    /// (partial F test, combined with the invariance test by Bonferroni).
    /// Parents that are invariant-irrelevant, such as an unintervened root,
    /// are then required in every accepted set.
    AllVariables,
}

impl std::str::FromStr for ResidualScope {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "predictors" => Ok(ResidualScope::Predictors),
            "all-variables" | "all" => Ok(ResidualScope::AllVariables),
            _ => Err(Error::InvalidArgument(format!("unknown residual scope `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IcpConfig {
    pub alpha: f64,
    pub test: InvarianceTest,
    /// Largest predictor set tried. Truncating loses the coverage guarantee.
    pub max_set_size: Option<usize>,
    /// Refuse targets with more candidate predictors than this.
    pub max_p: usize,
    pub residual_scope: ResidualScope,
    /// In [`icp_graph`], test each target at `alpha / p`.
    pub bonferroni_targets: bool,
}

impl Default for IcpConfig {
    fn default() -> Self {
        IcpConfig {
            alpha: 0.05,
            test: InvarianceTest::Regression,
            max_set_size: None,
            max_p: 20,
            residual_scope: ResidualScope::Predictors,
            bonferroni_targets: false,
        }
    }
}

impl IcpConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        if self.max_p < 1 {
            return Err(Error::InvalidArgument("max_p must be at least 1".into()));
        }
        // subsets are indexed by u64 masks
        if self.max_p > 63 {
            return Err(Error::InvalidArgument("max_p above 63 is not supported".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetTest {
    pub set: NodeSet,
    pub p_value: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateInterval {
    pub node: Node,
    pub lower: f64,
    pub upper: f64,
}

impl CandidateInterval {
    /// The interval excludes 0.
    pub fn significant(&self) -> bool {
        self.lower > 0.0 || self.upper < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpResult {
    pub target: Node,
    pub labels: Vec<String>,
    /// Contexts entering the tests; those intervening on the target are left out.
    pub contexts: Vec<String>,
    pub accepted_sets: Vec<NodeSet>,
    pub estimate: NodeSet,
    /// One entry per candidate, in node order. Empty until
    /// [`icp_confidence_intervals`] runs.
    pub ci: Vec<CandidateInterval>,
    /// Every tested set, by size then lexicographically.
    pub pvals: Vec<SubsetTest>,
    pub defensive_empty: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

impl IcpResult {
    pub fn candidates(&self) -> Vec<Node> {
        (0..self.labels.len()).filter(|&j| j != self.target).collect()
    }

    pub fn interval(&self, j: Node) -> Option<&CandidateInterval> {
        self.ci.iter().find(|c| c.node == j)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// `target,candidate,lower,upper,significant` rows.
    pub fn ci_csv_rows(&self) -> Vec<String> {
        self.ci
            .iter()
            .map(|c| {
                format!(
                    "{},{},{},{},{}",
                    self.labels[self.target],
                    self.labels[c.node],
                    c.lower,
                    c.upper,
                    c.significant()
                )
            })
            .collect()
    }
}

pub const CI_CSV_HEADER: &str = "target,candidate,lower,upper,significant";

/// Subsets of `candidates` with at most `max_size` members, by size and then
/// lexicographically.
pub fn enumerate_subsets(candidates: &[Node], max_size: usize) -> Vec<NodeSet> {
    fn extend(cands: &[Node], start: usize, k: usize, cur: &mut Vec<Node>, out: &mut Vec<NodeSet>) {
        if cur.len() == k {
            out.push(NodeSet::new(cur.iter().copied()));
            return;
        }
        for i in start..cands.len() {
            cur.push(cands[i]);
            extend(cands, i + 1, k, cur, out);
            cur.pop();
        }
    }
    let mut sorted = candidates.to_vec();
    sorted.sort_unstable();
    let mut out = Vec::new();
    for k in 0..=max_size.min(sorted.len()) {
        extend(&sorted, 0, k, &mut Vec::with_capacity(k), &mut out);
    }
    out
}

/// Row groups of the contexts used for target `t`: non-empty and not
/// intervening on `t`.
fn target_groups(ds: &Dataset, t: Node) -> (Vec<String>, Vec<Vec<usize>>) {
    ds.rows_by_context()
        .into_iter()
        .enumerate()
        .filter(|(k, rows)| !rows.is_empty() && ds.contexts()[*k].target != Some(t))
        .map(|(k, rows)| (ds.contexts()[k].id.clone(), rows))
        .unzip()
}

fn test_subset(
    ds: &Dataset,
    groups: &[Vec<usize>],
    all_rows: &[usize],
    t: Node,
    s: &NodeSet,
    rest: &NodeSet,
    cfg: &IcpConfig,
) -> Result<f64> {
    let inv = cfg.test.run(ds, groups, t, s)?;
    match cfg.residual_scope {
        ResidualScope::Predictors => Ok(inv.p_value),
        ResidualScope::AllVariables => {
            let nested: TestReport = nested_f_test(ds, all_rows, t, s, rest)?;
            Ok((2.0 * inv.p_value.min(nested.p_value)).min(1.0))
        }
    }
}

/// Tests every predictor set for `t` and intersects the accepted ones.
pub fn icp_target(ds: &Dataset, t: Node, cfg: &IcpConfig) -> Result<IcpResult> {
    cfg.validate()?;
    let p = ds.p();
    if t >= p {
        return Err(Error::NodeOutOfRange { index: t, p });
    }
    let candidates: Vec<Node> = (0..p).filter(|&j| j != t).collect();
    if candidates.len() > cfg.max_p {
        return Err(Error::TooManyCandidates { candidates: candidates.len(), cap: cfg.max_p });
    }
    let (contexts, groups) = target_groups(ds, t);
    if groups.len() < 2 {
        return Err(Error::InsufficientData(format!(
            "target `{}` has {} usable context(s); at least 2 needed",
            ds.labels()[t],
            groups.len()
        )));
    }
    let all_rows: Vec<usize> = groups.concat();
    let subsets = enumerate_subsets(&candidates, cfg.max_set_size.unwrap_or(candidates.len()));
    let all = NodeSet::new(candidates.iter().copied());
    let pvals = subsets
        .par_iter()
        .map(|s| {
            let rest = NodeSet::new(all.iter().filter(|&j| !s.contains(j)));
            let p_value = test_subset(ds, &groups, &all_rows, t, s, &rest, cfg)?;
            Ok(SubsetTest { set: s.clone(), p_value, accepted: p_value > cfg.alpha })
        })
        .collect::<Result<Vec<_>>>()?;

    let accepted_sets: Vec<NodeSet> = pvals.iter().filter(|r| r.accepted).map(|r| r.set.clone()).collect();
    let mut warnings = Vec::new();
    if cfg.max_set_size.is_some_and(|k| k < candidates.len()) {
        warnings.push("predictor sets were truncated; the coverage guarantee does not apply".into());
    }
    let (estimate, defensive_empty) = match accepted_sets.split_first() {
        Some((first, rest)) => (rest.iter().fold(first.clone(), |acc, s| acc.intersection(s)), false),
        None => {
            warnings.push("every predictor set was rejected; returning the empty set".into());
            (NodeSet::empty(), true)
        }
    };
    Ok(IcpResult {
        target: t,
        labels: ds.labels().to_vec(),
        contexts,
        accepted_sets,
        estimate,
        ci: Vec::new(),
        pvals,
        defensive_empty,
        warnings,
    })
}

/// Fills `res.ci`: for each candidate, the envelope of its `(1 − alpha)` OLS
/// intervals over the accepted sets containing it, fitted on the pooled rows.
/// The envelope is widened to include 0 when some accepted set omits the
/// candidate; candidates in no accepted set get `[0, 0]`.
pub fn icp_confidence_intervals(ds: &Dataset, mut res: IcpResult, cfg: &IcpConfig) -> Result<IcpResult> {
    let (_, groups) = target_groups(ds, res.target);
    let rows: Vec<usize> = groups.concat();
    let t = res.target;
    let fits = res
        .accepted_sets
        .par_iter()
        .map(|s| fit_rows(ds, &rows, t, s).map(|f| (s, f)))
        .collect::<Result<Vec<_>>>()?;
    let mut ci = Vec::new();
    for j in res.candidates() {
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        let mut omitted = false;
        for (s, fit) in &fits {
            match s.as_slice().iter().position(|&n| n == j) {
                Some(k) => {
                    let (lo, hi) = fit.conf_interval(k, cfg.alpha)?;
                    lower = lower.min(lo);
                    upper = upper.max(hi);
                }
                None => omitted = true,
            }
        }
        if omitted || fits.is_empty() {
            lower = lower.min(0.0);
            upper = upper.max(0.0);
        }
        ci.push(CandidateInterval { node: j, lower, upper });
    }
    res.ci = ci;
    Ok(res)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetOutcome {
    pub target: Node,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub result: Option<IcpResult>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Nodewise estimate: `s -> t` iff `s` is in the estimate for `t`. May contain
/// 2-cycles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IcpGraph {
    pub labels: Vec<String>,
    pub edges: Vec<[Node; 2]>,
    pub targets: Vec<TargetOutcome>,
}

impl IcpGraph {
    pub fn digraph(&self) -> DiGraph {
        DiGraph::new(self.labels.clone(), self.edges.iter().map(|e| (e[0], e[1]))).expect("validated edges")
    }

    pub fn has_edge(&self, s: Node, t: Node) -> bool {
        self.edges.contains(&[s, t])
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("graph serializes")
    }

    /// Edges labelled with their interval; significant ones drawn bold.
    pub fn to_dot(&self) -> String {
        let attrs: Vec<String> = self
            .edges
            .iter()
            .map(|&[s, t]| {
                let ci = self.targets[t].result.as_ref().and_then(|r| r.interval(s));
                match ci {
                    Some(c) if c.significant() => format!("label=\"[{:.3}, {:.3}]\", style=bold", c.lower, c.upper),
                    Some(c) => format!("label=\"[{:.3}, {:.3}]\"", c.lower, c.upper),
                    None => String::new(),
                }
            })
            .collect();
        dot_lines(&self.labels, self.edges.iter().zip(&attrs).map(|(e, a)| (e[0], e[1], a.as_str())))
    }

    pub fn ci_csv(&self) -> String {
        let mut out = String::from(CI_CSV_HEADER);
        out.push('\n');
        for r in self.targets.iter().filter_map(|o| o.result.as_ref()) {
            for row in r.ci_csv_rows() {
                out.push_str(&row);
                out.push('\n');
            }
        }
        out
    }
}

/// Runs [`icp_target`] and [`icp_confidence_intervals`] for every node. A
/// failing target is recorded and the others still run.
pub fn icp_graph(ds: &Dataset, cfg: &IcpConfig) -> Result<IcpGraph> {
    cfg.validate()?;
    let mut node_cfg = cfg.clone();
    if cfg.bonferroni_targets {
        node_cfg.alpha = cfg.alpha / ds.p() as f64;
    }
    let targets: Vec<TargetOutcome> = (0..ds.p())
        .into_par_iter()
        .map(|t| {
            match icp_target(ds, t, &node_cfg).and_then(|r| icp_confidence_intervals(ds, r, &node_cfg)) {
                Ok(r) => TargetOutcome { target: t, result: Some(r), error: None },
                Err(e) => TargetOutcome { target: t, result: None, error: Some(e.to_string()) },
            }
        })
        .collect();
    let mut edges = Vec::new();
    for o in &targets {
        if let Some(r) = &o.result {
            edges.extend(r.estimate.iter().map(|s| [s, o.target]));
        }
    }
    edges.sort_unstable();
    Ok(IcpGraph { labels: ds.labels().to_vec(), edges, targets })
}

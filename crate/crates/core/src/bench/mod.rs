//! Monte Carlo experiments: fixed or random models, simulated contexts,
//! perturbation-graph pruning and/or invariant prediction, scored against
//! the true graph.

mod models;
mod scenarios;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, DiGraph, Node};
use crate::icp::{icp_graph, IcpConfig};
use crate::perturb::{build_perturbation_graph, transitive_reduce, unit_variance_sem, PgMode};
use crate::sem::{simulate, stream_rng, ContextConfig, ContextSpec, InterventionKind, LinearSem, NodeRef, SemConfig};

pub use models::{
    chain_sem, common_cause_sem, contexts_on, figure2_sem, figure3a_sem, figure3b_sem, hard_everywhere, meat_analogue,
    signed_coefficient, BETA_TU, BETA_US, MEAT_EDGES, MEAT_LABELS, MEAT_N,
};
pub use scenarios::{
    confounded_scenario, figure1_scatter_csv, figure1_scenarios, ConfoundedParams, ConfoundedReport, Figure1Cell,
    FIGURE1_N,
};

/// Smallest coefficient magnitude a random model may use.
pub const MIN_ABS_COEFF: f64 = 0.3;

/// Node count: fixed, or drawn uniformly from an inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeCount {
    Fixed(usize),
    Range([usize; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RandomDagParams {
    pub p: NodeCount,
    pub edge_prob: f64,
    /// Magnitude range; signs are balanced.
    pub coeff_range: [f64; 2],
    #[serde(default = "one")]
    pub noise_var: f64,
}

fn one() -> f64 {
    1.0
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SemSource {
    Fixed(SemConfig),
    /// Edge coefficients as given; noise variances chosen so every node has
    /// variance 1. Noise fields must be absent.
    UnitVariance(SemConfig),
    Random(RandomDagParams),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InterventionPlan {
    #[serde(default)]
    pub kind: InterventionKind,
    #[serde(default = "one")]
    pub mean: f64,
    #[serde(default = "one")]
    pub var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ContextPlan {
    List(Vec<ContextConfig>),
    /// Observational plus one intervention per node, named after it.
    AllNodes(InterventionPlan),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    PerturbTr,
    Icp,
    Both,
}

impl Method {
    fn runs_tr(self) -> bool {
        matches!(self, Method::PerturbTr | Method::Both)
    }

    fn runs_icp(self) -> bool {
        matches!(self, Method::Icp | Method::Both)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub name: String,
    pub sem: SemSource,
    pub contexts: ContextPlan,
    pub n_per_context: usize,
    pub replications: usize,
    pub seed: u64,
    pub method: Method,
    /// Level of the perturbation-graph tests.
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub pg_mode: PgMode,
    #[serde(default)]
    pub icp: IcpConfig,
    /// An edge whose presence rate is reported per method.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watch_edge: Option<[NodeRef; 2]>,
}

fn default_alpha() -> f64 {
    0.05
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ExperimentSpec = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.replications < 1 {
            return bad("replications must be at least 1".into());
        }
        if self.n_per_context < 2 {
            return bad("n_per_context must be at least 2".into());
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return bad(format!("alpha must lie in (0,1), got {}", self.alpha));
        }
        self.icp.validate()?;
        match &self.sem {
            SemSource::Random(r) => {
                let [lo, hi] = r.coeff_range;
                if !(lo >= MIN_ABS_COEFF && hi >= lo && hi.is_finite()) {
                    return bad(format!("coeff_range must satisfy {MIN_ABS_COEFF} <= lo <= hi, got [{lo}, {hi}]"));
                }
                if !(0.0..=1.0).contains(&r.edge_prob) {
                    return bad("edge_prob must lie in [0,1]".into());
                }
                if !(r.noise_var > 0.0) {
                    return bad("noise_var must be positive".into());
                }
                let (a, b) = r.p.bounds();
                if a < 2 || b < a {
                    return bad("p must be at least 2 (and the range ordered)".into());
                }
                if self.watch_edge.is_some() {
                    return bad("watch_edge needs a fixed model".into());
                }
                if matches!(self.contexts, ContextPlan::List(_)) {
                    return bad("random models need the all_nodes context plan".into());
                }
            }
            SemSource::UnitVariance(c) if c.noise_var.is_some() || c.noise_mean.is_some() => {
                return bad("unit_variance models take no noise fields".into());
            }
            _ => {
                // resolve everything once so errors surface before any replication
                let sem = self.fixed_sem()?.expect("fixed source");
                self.contexts_for(&sem)?;
                self.watched(&sem)?;
            }
        }
        Ok(())
    }

    fn fixed_sem(&self) -> Result<Option<LinearSem>> {
        match &self.sem {
            SemSource::Fixed(c) => c.build().map(Some),
            SemSource::UnitVariance(c) => {
                let base = c.build()?;
                let dag = base.dag().clone();
                unit_variance_sem(dag, |s, t| base.beta(s, t)).map(Some)
            }
            SemSource::Random(_) => Ok(None),
        }
    }

    fn contexts_for(&self, sem: &LinearSem) -> Result<Vec<ContextSpec>> {
        match &self.contexts {
            ContextPlan::List(list) => {
                let specs = list.iter().map(|c| c.resolve(sem.labels())).collect::<Result<Vec<_>>>()?;
                crate::sem::check_unique_ids(&specs)?;
                Ok(specs)
            }
            ContextPlan::AllNodes(plan) => {
                let all: Vec<Node> = (0..sem.p()).collect();
                Ok(contexts_on(sem, &all, plan.kind, plan.mean, plan.var))
            }
        }
    }

    fn watched(&self, sem: &LinearSem) -> Result<Option<(Node, Node)>> {
        let Some([a, b]) = &self.watch_edge else { return Ok(None) };
        let resolve = |r: &NodeRef| {
            r.resolve(sem.labels())
                .ok_or_else(|| Error::InvalidArgument(format!("watch_edge: unknown node `{r}`")))
        };
        Ok(Some((resolve(a)?, resolve(b)?)))
    }
}

impl NodeCount {
    fn bounds(self) -> (usize, usize) {
        match self {
            NodeCount::Fixed(p) => (p, p),
            NodeCount::Range([a, b]) => (a, b),
        }
    }
}

/// Confusion counts over the `p(p−1)` ordered pairs.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct EdgeCounts {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
    pub tn: usize,
    /// Unordered pairs whose connection differs (missing, extra or reversed).
    pub shd: usize,
}

impl EdgeCounts {
    pub fn score(truth: &DiGraph, est: &DiGraph) -> Self {
        let p = truth.p();
        let mut c = EdgeCounts::default();
        for s in 0..p {
            for t in 0..p {
                if s == t {
                    continue;
                }
                match (truth.has_edge(s, t), est.has_edge(s, t)) {
                    (true, true) => c.tp += 1,
                    (false, true) => c.fp += 1,
                    (true, false) => c.fn_ += 1,
                    (false, false) => c.tn += 1,
                }
                if s < t && (truth.has_edge(s, t), truth.has_edge(t, s)) != (est.has_edge(s, t), est.has_edge(t, s)) {
                    c.shd += 1;
                }
            }
        }
        c
    }

    /// `None` when nothing was estimated.
    pub fn precision(&self) -> Option<f64> {
        let d = self.tp + self.fp;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }

    /// `None` when there is nothing to find.
    pub fn recall(&self) -> Option<f64> {
        let d = self.tp + self.fn_;
        (d > 0).then(|| self.tp as f64 / d as f64)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub edges: Vec<[Node; 2]>,
    pub vs_parents: EdgeCounts,
    /// Against the transitive closure of the true graph.
    pub vs_ancestors: EdgeCounts,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watched_present: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub replication: usize,
    pub p: usize,
    pub true_edges: Vec<[Node; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr: Option<MethodRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icp: Option<MethodRecord>,
    /// Per node: estimate ⊆ true parents; `None` if the target failed.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coverage: Vec<Option<bool>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Mean with Monte Carlo standard error over the defined values.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub se: f64,
    pub count: usize,
}

impl Estimate {
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Estimate> {
        let v: Vec<f64> = values.into_iter().collect();
        if v.is_empty() {
            return None;
        }
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let se = if v.len() > 1 {
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0) / n).sqrt()
        } else {
            0.0
        };
        Some(Estimate { mean, se, count: v.len() })
    }

    fn of_bools(values: impl IntoIterator<Item = bool>) -> Option<Estimate> {
        Estimate::of(values.into_iter().map(|b| if b { 1.0 } else { 0.0 }))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub precision: Option<Estimate>,
    pub recall: Option<Estimate>,
    pub shd: Option<Estimate>,
    pub ancestor_precision: Option<Estimate>,
    pub ancestor_recall: Option<Estimate>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub watched_rate: Option<Estimate>,
}

impl MethodSummary {
    fn of<'a>(recs: impl Iterator<Item = &'a MethodRecord> + Clone) -> Self {
        MethodSummary {
            precision: Estimate::of(recs.clone().filter_map(|r| r.vs_parents.precision())),
            recall: Estimate::of(recs.clone().filter_map(|r| r.vs_parents.recall())),
            shd: Estimate::of(recs.clone().map(|r| r.vs_parents.shd as f64)),
            ancestor_precision: Estimate::of(recs.clone().filter_map(|r| r.vs_ancestors.precision())),
            ancestor_recall: Estimate::of(recs.clone().filter_map(|r| r.vs_ancestors.recall())),
            watched_rate: Estimate::of_bools(recs.filter_map(|r| r.watched_present)),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSummary {
    pub name: String,
    pub replications: usize,
    pub failed: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tr: Option<MethodSummary>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub icp: Option<MethodSummary>,
    /// Frequency of estimate ⊆ parents, per node index.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub coverage: Vec<Option<Estimate>>,
}

impl ExperimentSummary {
    pub fn min_coverage(&self) -> Option<f64> {
        self.coverage.iter().flatten().map(|e| e.mean).reduce(f64::min)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub summary: ExperimentSummary,
    pub records: Vec<ReplicationRecord>,
}

impl ExperimentResult {
    /// One line per replication.
    pub fn records_csv(&self) -> String {
        let mut out = String::from(
            "replication,p,error,tr_tp,tr_fp,tr_fn,tr_shd,tr_anc_tp,tr_anc_fp,tr_watched,icp_tp,icp_fp,icp_fn,icp_shd,icp_watched,covered_all\n",
        );
        let opt = |v: Option<String>| v.unwrap_or_default();
        for r in &self.records {
            let m = |rec: &Option<MethodRecord>, f: &dyn Fn(&MethodRecord) -> String| opt(rec.as_ref().map(f));
            let covered = (!r.coverage.is_empty() && r.coverage.iter().all(Option::is_some))
                .then(|| r.coverage.iter().all(|c| *c == Some(true)).to_string());
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
                r.replication,
                r.p,
                r.error.as_deref().map(|e| format!("\"{}\"", e.replace('"', "'"))).unwrap_or_default(),
                m(&r.tr, &|x| x.vs_parents.tp.to_string()),
                m(&r.tr, &|x| x.vs_parents.fp.to_string()),
                m(&r.tr, &|x| x.vs_parents.fn_.to_string()),
                m(&r.tr, &|x| x.vs_parents.shd.to_string()),
                m(&r.tr, &|x| x.vs_ancestors.tp.to_string()),
                m(&r.tr, &|x| x.vs_ancestors.fp.to_string()),
                m(&r.tr, &|x| opt(x.watched_present.map(|b| b.to_string()))),
                m(&r.icp, &|x| x.vs_parents.tp.to_string()),
                m(&r.icp, &|x| x.vs_parents.fp.to_string()),
                m(&r.icp, &|x| x.vs_parents.fn_.to_string()),
                m(&r.icp, &|x| x.vs_parents.shd.to_string()),
                m(&r.icp, &|x| opt(x.watched_present.map(|b| b.to_string()))),
                opt(covered),
            ));
        }
        out
    }
}

fn closure(dag: &Dag) -> DiGraph {
    let reach = dag.reachability();
    let mut edges = Vec::new();
    for (s, row) in reach.iter().enumerate() {
        for (t, &r) in row.iter().enumerate() {
            if r && s != t {
                edges.push((s, t));
            }
        }
    }
    DiGraph::new(dag.labels().to_vec(), edges).expect("closure of a DAG")
}

fn record_for(truth: &Dag, est: DiGraph, watched: Option<(Node, Node)>) -> MethodRecord {
    MethodRecord {
        edges: est.edges().map(|(s, t)| [s, t]).collect(),
        vs_parents: EdgeCounts::score(truth, &est),
        vs_ancestors: EdgeCounts::score(&closure(truth), &est),
        watched_present: watched.map(|(s, t)| est.has_edge(s, t)),
    }
}

fn replicate(spec: &ExperimentSpec, fixed: Option<&LinearSem>, r: usize) -> ReplicationRecord {
    let mut rng = stream_rng(spec.seed, r as u64);
    let sem = match (fixed, &spec.sem) {
        (Some(sem), _) => sem.clone(),
        (None, SemSource::Random(params)) => {
            let (a, b) = params.p.bounds();
            let p = rng.random_range(a..=b);
            let dag = Dag::random(p, params.edge_prob, &mut rng);
            let [lo, hi] = params.coeff_range;
            let sem = LinearSem::with_coefficients(dag, |_, _| signed_coefficient(&mut rng, lo, hi))
                .and_then(|m| m.with_noise_var(nalgebra::DVector::from_element(p, params.noise_var)));
            match sem {
                Ok(m) => m,
                Err(e) => return failed_record(r, p, &e),
            }
        }
        (None, _) => unreachable!("fixed sources are built once"),
    };
    let p = sem.p();
    let truth = sem.dag();
    let mut rec = ReplicationRecord {
        replication: r,
        p,
        true_edges: truth.edges().map(|(s, t)| [s, t]).collect(),
        tr: None,
        icp: None,
        coverage: Vec::new(),
        error: None,
    };
    let outcome = (|| -> Result<()> {
        let watched = spec.watched(&sem)?;
        let ctxs = spec.contexts_for(&sem)?;
        let ds = simulate(&sem, &ctxs, spec.n_per_context, rng.random())?;
        if spec.method.runs_tr() {
            let pg = build_perturbation_graph(&ds, spec.alpha, spec.pg_mode)?;
            let tr = transitive_reduce(&pg)?;
            rec.tr = Some(record_for(truth, tr.kept_graph(), watched));
        }
        if spec.method.runs_icp() {
            let g = icp_graph(&ds, &spec.icp)?;
            rec.coverage = g
                .targets
                .iter()
                .map(|o| {
                    let pa = truth.parents(o.target).expect("node in range");
                    o.result.as_ref().map(|res| res.estimate.is_subset(&pa))
                })
                .collect();
            rec.icp = Some(record_for(truth, g.digraph(), watched));
        }
        Ok(())
    })();
    if let Err(e) = outcome {
        rec.error = Some(e.to_string());
    }
    rec
}

fn failed_record(r: usize, p: usize, e: &Error) -> ReplicationRecord {
    ReplicationRecord {
        replication: r,
        p,
        true_edges: Vec::new(),
        tr: None,
        icp: None,
        coverage: Vec::new(),
        error: Some(e.to_string()),
    }
}

/// Runs every replication and aggregates. Replication `r` draws everything
/// (model, then a sampling seed) from stream `r` of `spec.seed`, so results
/// do not depend on scheduling. Failures are recorded, not fatal.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentResult> {
    spec.validate()?;
    let fixed = spec.fixed_sem()?;
    let records: Vec<ReplicationRecord> =
        (0..spec.replications).into_par_iter().map(|r| replicate(spec, fixed.as_ref(), r)).collect();

    let ok = || records.iter().filter(|r| r.error.is_none());
    let max_p = records.iter().map(|r| r.p).max().unwrap_or(0);
    let coverage = if spec.method.runs_icp() {
        (0..max_p)
            .map(|t| Estimate::of_bools(ok().filter_map(|r| r.coverage.get(t).copied().flatten())))
            .collect()
    } else {
        Vec::new()
    };
    let summary = ExperimentSummary {
        name: spec.name.clone(),
        replications: records.len(),
        failed: records.iter().filter(|r| r.error.is_some()).count(),
        tr: spec.method.runs_tr().then(|| MethodSummary::of(ok().filter_map(|r| r.tr.as_ref()))),
        icp: spec.method.runs_icp().then(|| MethodSummary::of(ok().filter_map(|r| r.icp.as_ref()))),
        coverage,
    };
    Ok(ExperimentResult { summary, records })
}

#[cfg(test)]
mod tests;

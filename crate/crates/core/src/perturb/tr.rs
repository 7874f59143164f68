use serde::{Deserialize, Serialize};

use super::{PerturbationGraph, PgEdge};
use crate::error::{Error, Result};
use crate::graph::export::dot_lines;
use crate::graph::{DiGraph, Node, PATH_CAP};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemovedEdge {
    pub source: Node,
    pub target: Node,
    pub weight: f64,
    /// Alternative path whose weakest edge is strongest.
    pub witness: Vec<Node>,
    /// Smallest `|weight|` along the witness path.
    pub witness_min: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrResult {
    pub labels: Vec<String>,
    /// Ranked by `|weight|` descending, ties by `(source, target)`.
    pub kept: Vec<PgEdge>,
    /// In `(source, target)` order.
    pub removed: Vec<RemovedEdge>,
}

impl TrResult {
    pub fn is_removed(&self, s: Node, t: Node) -> bool {
        self.removed.iter().any(|r| r.source == s && r.target == t)
    }

    pub fn is_kept(&self, s: Node, t: Node) -> bool {
        self.kept.iter().any(|e| e.source == s && e.target == t)
    }

    pub fn kept_graph(&self) -> DiGraph {
        DiGraph::new(self.labels.clone(), self.kept.iter().map(|e| (e.source, e.target))).expect("validated edges")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    /// Kept edges solid, removed edges dashed, all in `(source, target)` order.
    pub fn to_dot(&self) -> String {
        let mut lines: Vec<(Node, Node, String)> = self
            .kept
            .iter()
            .map(|e| (e.source, e.target, format!("label=\"{:.3}\"", e.weight)))
            .chain(
                self.removed
                    .iter()
                    .map(|r| (r.source, r.target, format!("label=\"{:.3}\", style=dashed", r.weight))),
            )
            .collect();
        lines.sort_by_key(|l| (l.0, l.1));
        dot_lines(&self.labels, lines.iter().map(|(s, t, a)| (*s, *t, a.as_str())))
    }
}

/// The alternative path maximizing its smallest `|weight|`, if any path exists.
/// Ties go to the lexicographically first path.
pub fn tr_witness(pg: &PerturbationGraph, s: Node, t: Node) -> Result<Option<(Vec<Node>, f64)>> {
    if pg.edge(s, t).is_none() {
        return Err(Error::EdgeAbsent(s, t));
    }
    let g = pg.digraph();
    let paths = g.alternative_paths(s, t, PATH_CAP)?;
    let mut best: Option<(Vec<Node>, f64)> = None;
    for path in paths {
        let min = path
            .windows(2)
            .map(|w| pg.weight(w[0], w[1]).expect("path edges exist").abs())
            .fold(f64::INFINITY, f64::min);
        if best.as_ref().is_none_or(|(_, b)| min > *b) {
            best = Some((path, min));
        }
    }
    Ok(best)
}

/// True when some alternative path has every edge stronger than the direct one.
pub fn tr_criterion(pg: &PerturbationGraph, s: Node, t: Node) -> Result<bool> {
    let direct = pg.weight(s, t).ok_or(Error::EdgeAbsent(s, t))?.abs();
    Ok(tr_witness(pg, s, t)?.is_some_and(|(_, min)| min > direct))
}

/// Evaluates the criterion for every edge against the original graph, then
/// removes all flagged edges at once.
pub fn transitive_reduce(pg: &PerturbationGraph) -> Result<TrResult> {
    let mut kept = Vec::new();
    let mut removed = Vec::new();
    for e in &pg.edges {
        match tr_witness(pg, e.source, e.target)? {
            Some((witness, min)) if min > e.weight.abs() => removed.push(RemovedEdge {
                source: e.source,
                target: e.target,
                weight: e.weight,
                witness,
                witness_min: min,
            }),
            _ => kept.push(e.clone()),
        }
    }
    kept.sort_by(|a, b| {
        b.weight
            .abs()
            .total_cmp(&a.weight.abs())
            .then((a.source, a.target).cmp(&(b.source, b.target)))
    });
    Ok(TrResult { labels: pg.labels.clone(), kept, removed })
}

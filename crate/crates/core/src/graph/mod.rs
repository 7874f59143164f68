//! Directed graphs over indexed nodes.
//!
//! [`DiGraph`] is a general directed graph (2-cycles allowed) used for
//! estimated structures; [`Dag`] wraps it with a validated acyclicity
//! invariant and adds the ancestral machinery: ancestors, d-separation and
//! the graph-theoretic transitive reduction.
//!
//! Node identity is the index. Labels are carried for display and
//! serialization only.

mod dsep;
pub(crate) mod export;
mod paths;
mod reduce;

use std::collections::{BTreeSet, HashSet, VecDeque};
use std::ops::Deref;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use export::GraphJson;
pub use paths::PATH_CAP;

pub type Node = usize;

/// Sorted, duplicate-free set of node indices.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeSet(Vec<Node>);

impl NodeSet {
    pub fn new(nodes: impl IntoIterator<Item = Node>) -> Self {
        let mut v: Vec<Node> = nodes.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        NodeSet(v)
    }

    pub fn empty() -> Self {
        NodeSet(Vec::new())
    }

    pub fn singleton(n: Node) -> Self {
        NodeSet(vec![n])
    }

    /// Members selected by the set bits of `mask`, indexed into `universe`.
    pub fn from_mask(universe: &[Node], mask: u64) -> Self {
        NodeSet::new(
            universe
                .iter()
                .enumerate()
                .filter(|(i, _)| mask >> i & 1 == 1)
                .map(|(_, &n)| n),
        )
    }

    pub fn contains(&self, n: Node) -> bool {
        self.0.binary_search(&n).is_ok()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = Node> + '_ {
        self.0.iter().copied()
    }

    pub fn as_slice(&self) -> &[Node] {
        &self.0
    }

    pub fn insert(&mut self, n: Node) {
        if let Err(pos) = self.0.binary_search(&n) {
            self.0.insert(pos, n);
        }
    }

    pub fn union(&self, other: &NodeSet) -> NodeSet {
        NodeSet::new(self.iter().chain(other.iter()))
    }

    pub fn intersection(&self, other: &NodeSet) -> NodeSet {
        NodeSet(self.iter().filter(|&n| other.contains(n)).collect())
    }

    pub fn is_subset(&self, other: &NodeSet) -> bool {
        self.iter().all(|n| other.contains(n))
    }

    pub fn is_disjoint(&self, other: &NodeSet) -> bool {
        self.iter().all(|n| !other.contains(n))
    }

    pub fn max(&self) -> Option<Node> {
        self.0.last().copied()
    }
}

impl FromIterator<Node> for NodeSet {
    fn from_iter<I: IntoIterator<Item = Node>>(iter: I) -> Self {
        NodeSet::new(iter)
    }
}

impl<'a> IntoIterator for &'a NodeSet {
    type Item = &'a Node;
    type IntoIter = std::slice::Iter<'a, Node>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.iter()
    }
}

/// Labelled directed graph without self-loops. Cycles are permitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DiGraph {
    labels: Vec<String>,
    edges: BTreeSet<(Node, Node)>,
    succ: Vec<Vec<Node>>,
    pred: Vec<Vec<Node>>,
}

impl DiGraph {
    pub fn new(labels: Vec<String>, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        let p = labels.len();
        let mut seen = HashSet::with_capacity(p);
        for l in &labels {
            if !seen.insert(l.as_str()) {
                return Err(Error::DuplicateLabel(l.clone()));
            }
        }
        let mut set = BTreeSet::new();
        for (s, t) in edges {
            for n in [s, t] {
                if n >= p {
                    return Err(Error::NodeOutOfRange { index: n, p });
                }
            }
            if s == t {
                return Err(Error::SelfLoop(s));
            }
            set.insert((s, t));
        }
        let mut succ = vec![Vec::new(); p];
        let mut pred = vec![Vec::new(); p];
        // BTreeSet iteration is sorted, so adjacency lists come out sorted.
        for &(s, t) in &set {
            succ[s].push(t);
            pred[t].push(s);
        }
        for list in pred.iter_mut() {
            list.sort_unstable();
        }
        Ok(DiGraph { labels, edges: set, succ, pred })
    }

    /// Graph on `p` nodes labelled `x0, x1, ...`.
    pub fn with_default_labels(p: usize, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        DiGraph::new(default_labels(p), edges)
    }

    pub fn empty(labels: Vec<String>) -> Result<Self> {
        DiGraph::new(labels, std::iter::empty())
    }

    pub fn p(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn label(&self, n: Node) -> &str {
        &self.labels[n]
    }

    pub fn index_of(&self, label: &str) -> Option<Node> {
        self.labels.iter().position(|l| l == label)
    }

    /// Edges in sorted `(source, target)` order.
    pub fn edges(&self) -> impl Iterator<Item = (Node, Node)> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<(Node, Node)> {
        &self.edges
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_edge(&self, s: Node, t: Node) -> bool {
        self.edges.contains(&(s, t))
    }

    pub(crate) fn check_node(&self, n: Node) -> Result<()> {
        if n >= self.p() {
            Err(Error::NodeOutOfRange { index: n, p: self.p() })
        } else {
            Ok(())
        }
    }

    pub fn successors(&self, n: Node) -> &[Node] {
        &self.succ[n]
    }

    pub fn predecessors(&self, n: Node) -> &[Node] {
        &self.pred[n]
    }

    pub fn parents(&self, t: Node) -> Result<NodeSet> {
        self.check_node(t)?;
        Ok(NodeSet(self.pred[t].clone()))
    }

    pub fn children(&self, s: Node) -> Result<NodeSet> {
        self.check_node(s)?;
        Ok(NodeSet(self.succ[s].clone()))
    }

    /// Kahn's algorithm with a smallest-index-first queue; `None` if cyclic.
    pub fn topological_order(&self) -> Option<Vec<Node>> {
        let p = self.p();
        let mut indeg: Vec<usize> = self.pred.iter().map(Vec::len).collect();
        let mut ready: BTreeSet<Node> = (0..p).filter(|&n| indeg[n] == 0).collect();
        let mut order = Vec::with_capacity(p);
        while let Some(n) = ready.pop_first() {
            order.push(n);
            for &c in &self.succ[n] {
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    ready.insert(c);
                }
            }
        }
        (order.len() == p).then_some(order)
    }

    pub fn is_acyclic(&self) -> bool {
        self.topological_order().is_some()
    }

    /// Nodes reachable from `s` along directed edges, `s` included.
    pub fn reachable_from(&self, s: Node) -> Result<NodeSet> {
        self.check_node(s)?;
        Ok(NodeSet::new(bfs(&self.succ, s)))
    }

    /// Nodes from which `t` is reachable, `t` included.
    pub fn reaching(&self, t: Node) -> Result<NodeSet> {
        self.check_node(t)?;
        Ok(NodeSet::new(bfs(&self.pred, t)))
    }

    /// Reflexive-transitive closure as a dense boolean matrix.
    pub fn reachability(&self) -> Vec<Vec<bool>> {
        (0..self.p())
            .map(|s| {
                let mut row = vec![false; self.p()];
                for n in bfs(&self.succ, s) {
                    row[n] = true;
                }
                row
            })
            .collect()
    }

    /// Same edges with labels permuted: node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[Node]) -> Result<DiGraph> {
        if perm.len() != self.p() {
            return Err(Error::InvalidArgument("permutation length mismatch".into()));
        }
        let mut labels = vec![String::new(); self.p()];
        for (i, &j) in perm.iter().enumerate() {
            labels[j] = self.labels[i].clone();
        }
        DiGraph::new(labels, self.edges().map(|(s, t)| (perm[s], perm[t])))
    }
}

fn bfs(adj: &[Vec<Node>], start: Node) -> Vec<Node> {
    let mut seen = vec![false; adj.len()];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    let mut out = Vec::new();
    while let Some(n) = queue.pop_front() {
        out.push(n);
        for &m in &adj[n] {
            if !seen[m] {
                seen[m] = true;
                queue.push_back(m);
            }
        }
    }
    out
}

pub fn default_labels(p: usize) -> Vec<String> {
    (0..p).map(|i| format!("x{i}")).collect()
}

/// Directed acyclic graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    graph: DiGraph,
    topo: Vec<Node>,
}

impl Deref for Dag {
    type Target = DiGraph;
    fn deref(&self) -> &DiGraph {
        &self.graph
    }
}

impl Dag {
    pub fn new(labels: Vec<String>, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        Dag::from_digraph(DiGraph::new(labels, edges)?)
    }

    pub fn with_default_labels(p: usize, edges: impl IntoIterator<Item = (Node, Node)>) -> Result<Self> {
        Dag::new(default_labels(p), edges)
    }

    pub fn from_digraph(graph: DiGraph) -> Result<Self> {
        let topo = graph.topological_order().ok_or(Error::Cycle)?;
        Ok(Dag { graph, topo })
    }

    /// Convenience for small literal graphs: `Dag::from_labels(&["s","u","t"], &[("s","u"),("u","t")])`.
    pub fn from_labels(labels: &[&str], edges: &[(&str, &str)]) -> Result<Self> {
        let owned: Vec<String> = labels.iter().map(|s| s.to_string()).collect();
        let idx = |l: &str| {
            labels
                .iter()
                .position(|x| *x == l)
                .ok_or_else(|| Error::InvalidArgument(format!("unknown label `{l}`")))
        };
        let e = edges
            .iter()
            .map(|(s, t)| Ok((idx(s)?, idx(t)?)))
            .collect::<Result<Vec<_>>>()?;
        Dag::new(owned, e)
    }

    /// Random DAG: a uniformly random topological order, then each forward
    /// pair becomes an edge independently with probability `edge_prob`.
    pub fn random<R: Rng + ?Sized>(p: usize, edge_prob: f64, rng: &mut R) -> Self {
        let mut order: Vec<Node> = (0..p).collect();
        for i in (1..p).rev() {
            let j = rng.random_range(0..=i);
            order.swap(i, j);
        }
        let mut edges = Vec::new();
        for i in 0..p {
            for j in (i + 1)..p {
                if rng.random_bool(edge_prob) {
                    edges.push((order[i], order[j]));
                }
            }
        }
        Dag::with_default_labels(p, edges).expect("forward edges of a total order are acyclic")
    }

    pub fn as_digraph(&self) -> &DiGraph {
        &self.graph
    }

    pub fn into_digraph(self) -> DiGraph {
        self.graph
    }

    pub fn topological_order(&self) -> &[Node] {
        &self.topo
    }

    /// Ancestors of `t`, including `t` itself.
    pub fn ancestors(&self, t: Node) -> Result<NodeSet> {
        self.reaching(t)
    }

    /// Descendants of `s`, including `s` itself.
    pub fn descendants(&self, s: Node) -> Result<NodeSet> {
        self.reachable_from(s)
    }

    pub fn ancestors_of_set(&self, set: &NodeSet) -> Result<NodeSet> {
        let mut out = NodeSet::empty();
        for n in set.iter() {
            out = out.union(&self.ancestors(n)?);
        }
        Ok(out)
    }

    /// Subgraph with every edge into `t` removed.
    pub fn without_incoming(&self, t: Node) -> Result<Dag> {
        self.check_node(t)?;
        Dag::new(self.labels().to_vec(), self.edges().filter(|&(_, b)| b != t))
    }
}

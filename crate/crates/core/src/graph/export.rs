use serde::{Deserialize, Serialize};

use super::{DiGraph, Node};
use crate::error::Result;

/// JSON exchange form: `{ "labels": [...], "edges": [[s, t], ...] }`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphJson {
    pub labels: Vec<String>,
    pub edges: Vec<[Node; 2]>,
}

impl From<&DiGraph> for GraphJson {
    fn from(g: &DiGraph) -> Self {
        GraphJson {
            labels: g.labels().to_vec(),
            edges: g.edges().map(|(s, t)| [s, t]).collect(),
        }
    }
}

impl TryFrom<GraphJson> for DiGraph {
    type Error = crate::error::Error;
    fn try_from(j: GraphJson) -> Result<Self> {
        DiGraph::new(j.labels, j.edges.into_iter().map(|[s, t]| (s, t)))
    }
}

pub(crate) fn quote(label: &str) -> String {
    format!("\"{}\"", label.replace('\\', "\\\\").replace('"', "\\\""))
}

/// DOT text for labelled edges. Edges must already be in the desired order;
/// `attrs` is emitted verbatim inside brackets when non-empty.
pub(crate) fn dot_lines<'a>(
    labels: &[String],
    edges: impl Iterator<Item = (Node, Node, &'a str)>,
) -> String {
    let mut out = String::from("digraph {\n");
    for (s, t, attrs) in edges {
        out.push_str("  ");
        out.push_str(&quote(&labels[s]));
        out.push_str(" -> ");
        out.push_str(&quote(&labels[t]));
        if !attrs.is_empty() {
            out.push_str(" [");
            out.push_str(attrs);
            out.push(']');
        }
        out.push_str(";\n");
    }
    out.push_str("}\n");
    out
}

impl DiGraph {
    /// DOT with one line per edge in sorted order, labels as node names.
    pub fn to_dot(&self) -> String {
        dot_lines(self.labels(), self.edges().map(|(s, t)| (s, t, "")))
    }

    pub fn to_json_value(&self) -> GraphJson {
        GraphJson::from(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("graph serializes")
    }

    pub fn from_json(text: &str) -> Result<DiGraph> {
        let j: GraphJson = serde_json::from_str(text)?;
        DiGraph::try_from(j)
    }
}

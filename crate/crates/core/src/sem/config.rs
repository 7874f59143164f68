//! JSON forms of models and contexts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::{ContextSpec, Intervention, InterventionKind, LinearSem};
use crate::error::{Error, Result};
use crate::graph::{Dag, Node};

/// A node named by label or by index.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NodeRef {
    Index(Node),
    Label(String),
}

impl NodeRef {
    pub fn resolve(&self, labels: &[String]) -> Option<Node> {
        match self {
            NodeRef::Index(i) => (*i < labels.len()).then_some(*i),
            NodeRef::Label(l) => labels.iter().position(|x| x == l),
        }
    }
}

impl std::fmt::Display for NodeRef {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            NodeRef::Index(i) => write!(f, "{i}"),
            NodeRef::Label(l) => f.write_str(l),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeConfig {
    pub from: NodeRef,
    pub to: NodeRef,
    pub beta: f64,
}

/// `{ "labels": [...], "edges": [{"from","to","beta"}], "noise_var": [...], "noise_mean": [...] }`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SemConfig {
    pub labels: Vec<String>,
    #[serde(default)]
    pub edges: Vec<EdgeConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_var: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub noise_mean: Option<Vec<f64>>,
}

impl SemConfig {
    pub fn build(&self) -> Result<LinearSem> {
        let p = self.labels.len();
        let mut pairs = Vec::with_capacity(self.edges.len());
        let mut coeff = DMatrix::zeros(p, p);
        for (i, e) in self.edges.iter().enumerate() {
            let node = |r: &NodeRef, field: &str| {
                r.resolve(&self.labels).ok_or_else(|| {
                    Error::InvalidModel(format!("edges[{i}].{field}: unknown node `{r}`"))
                })
            };
            let (s, t) = (node(&e.from, "from")?, node(&e.to, "to")?);
            pairs.push((s, t));
            coeff[(t, s)] = e.beta;
        }
        let dag = Dag::new(self.labels.clone(), pairs)?;
        let vec_or = |v: &Option<Vec<f64>>, name: &str, default: f64| -> Result<DVector<f64>> {
            match v {
                None => Ok(DVector::from_element(p, default)),
                Some(v) if v.len() == p => Ok(DVector::from_column_slice(v)),
                Some(v) => Err(Error::InvalidModel(format!("{name} has {} entries, expected {p}", v.len()))),
            }
        };
        LinearSem::new(
            dag,
            coeff,
            vec_or(&self.noise_mean, "noise_mean", 0.0)?,
            vec_or(&self.noise_var, "noise_var", 1.0)?,
        )
    }

    pub fn from_sem(sem: &LinearSem) -> Self {
        let labels = sem.labels().to_vec();
        let edges = sem
            .dag()
            .edges()
            .map(|(s, t)| EdgeConfig {
                from: NodeRef::Label(labels[s].clone()),
                to: NodeRef::Label(labels[t].clone()),
                beta: sem.beta(s, t),
            })
            .collect();
        SemConfig {
            labels,
            edges,
            noise_var: Some(sem.noise_var().iter().copied().collect()),
            noise_mean: Some(sem.noise_mean().iter().copied().collect()),
        }
    }
}

/// `{ "id": "s-hard", "target": "s", "kind": "hard", "mean": 1.0, "var": 0.09 }`;
/// a context without `target` is observational.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContextConfig {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub target: Option<NodeRef>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub kind: Option<InterventionKind>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub var: Option<f64>,
}

impl ContextConfig {
    pub fn resolve(&self, labels: &[String]) -> Result<ContextSpec> {
        let bad = |reason: String| Error::InvalidContext { id: self.id.clone(), reason };
        let Some(target) = &self.target else {
            if self.kind.is_some() || self.mean.is_some() || self.var.is_some() {
                return Err(bad("intervention fields given without a target".into()));
            }
            return Ok(ContextSpec::observational(&self.id));
        };
        let node = target
            .resolve(labels)
            .ok_or_else(|| bad(format!("unknown target node `{target}`")))?;
        let iv = Intervention {
            target: node,
            kind: self.kind.unwrap_or(InterventionKind::Hard),
            mean: self.mean.unwrap_or(0.0),
            var: self.var.unwrap_or(1.0),
        };
        if !(iv.var > 0.0 && iv.var.is_finite()) {
            return Err(bad(format!("intervention variance must be positive, got {}", iv.var)));
        }
        Ok(ContextSpec::intervention(&self.id, iv))
    }

    pub fn from_spec(spec: &ContextSpec, labels: &[String]) -> Self {
        match spec.intervention {
            None => ContextConfig { id: spec.id.clone(), target: None, kind: None, mean: None, var: None },
            Some(iv) => ContextConfig {
                id: spec.id.clone(),
                target: Some(NodeRef::Label(labels[iv.target].clone())),
                kind: Some(iv.kind),
                mean: Some(iv.mean),
                var: Some(iv.var),
            },
        }
    }
}

/// Parses a JSON array of contexts against `labels`.
pub fn parse_contexts(text: &str, labels: &[String]) -> Result<Vec<ContextSpec>> {
    let raw: Vec<ContextConfig> = serde_json::from_str(text)?;
    let specs = raw.iter().map(|c| c.resolve(labels)).collect::<Result<Vec<_>>>()?;
    super::check_unique_ids(&specs)?;
    Ok(specs)
}

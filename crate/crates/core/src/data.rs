//! Pooled multi-context datasets.

use std::collections::HashMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Node;

/// Conventional id of the observational context.
pub const OBSERVATIONAL_ID: &str = "obs";

/// A context as seen by the estimators: an id and, for interventional
/// regimes, the intervened node. Mechanism details are not needed downstream.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DataContext {
    pub id: String,
    pub target: Option<Node>,
}

impl DataContext {
    pub fn observational(id: impl Into<String>) -> Self {
        DataContext { id: id.into(), target: None }
    }

    pub fn intervention(id: impl Into<String>, target: Node) -> Self {
        DataContext { id: id.into(), target: Some(target) }
    }

    pub fn is_observational(&self) -> bool {
        self.target.is_none()
    }
}

/// `n × p` values with a context label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    labels: Vec<String>,
    values: DMatrix<f64>,
    row_context: Vec<usize>,
    contexts: Vec<DataContext>,
}

impl Dataset {
    /// Builds a dataset from row-wise context ids resolved against `contexts`.
    pub fn new(
        labels: Vec<String>,
        values: DMatrix<f64>,
        row_context_ids: &[String],
        contexts: Vec<DataContext>,
    ) -> Result<Self> {
        let index: HashMap<&str, usize> = contexts
            .iter()
            .enumerate()
            .map(|(i, c)| (c.id.as_str(), i))
            .collect();
        let row_context = row_context_ids
            .iter()
            .map(|id| index.get(id.as_str()).copied().ok_or_else(|| Error::UnknownContext(id.clone())))
            .collect::<Result<Vec<_>>>()?;
        Dataset::from_indices(labels, values, row_context, contexts)
    }

    pub fn from_indices(
        labels: Vec<String>,
        values: DMatrix<f64>,
        row_context: Vec<usize>,
        contexts: Vec<DataContext>,
    ) -> Result<Self> {
        let (n, p) = values.shape();
        if n == 0 {
            return Err(Error::InvalidDataset("dataset has no rows".into()));
        }
        if p != labels.len() {
            return Err(Error::InvalidDataset(format!(
                "{} columns but {} labels",
                p,
                labels.len()
            )));
        }
        if row_context.len() != n {
            return Err(Error::InvalidDataset("context label count differs from row count".into()));
        }
        let mut ids = std::collections::HashSet::new();
        for c in &contexts {
            if !ids.insert(c.id.as_str()) {
                return Err(Error::InvalidDataset(format!("duplicate context id `{}`", c.id)));
            }
            if let Some(t) = c.target {
                if t >= p {
                    return Err(Error::InvalidContext {
                        id: c.id.clone(),
                        reason: format!("target index {t} out of range"),
                    });
                }
            }
        }
        if let Some(&bad) = row_context.iter().find(|&&k| k >= contexts.len()) {
            return Err(Error::InvalidDataset(format!("row context index {bad} out of range")));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidDataset("non-finite value".into()));
        }
        Ok(Dataset { labels, values, row_context, contexts })
    }

    /// Stacks datasets over the same variables. Contexts with equal ids must agree.
    pub fn concat(parts: &[Dataset]) -> Result<Dataset> {
        let first = parts
            .first()
            .ok_or_else(|| Error::InvalidDataset("nothing to concatenate".into()))?;
        let p = first.p();
        let mut contexts: Vec<DataContext> = Vec::new();
        let mut rows: Vec<f64> = Vec::new();
        let mut row_context = Vec::new();
        for part in parts {
            if part.labels != first.labels {
                return Err(Error::InvalidDataset("column labels differ between parts".into()));
            }
            let mut remap = Vec::with_capacity(part.contexts.len());
            for c in &part.contexts {
                match contexts.iter().position(|x| x.id == c.id) {
                    Some(i) if contexts[i] == *c => remap.push(i),
                    Some(_) => {
                        return Err(Error::InvalidDataset(format!(
                            "context `{}` defined inconsistently",
                            c.id
                        )))
                    }
                    None => {
                        contexts.push(c.clone());
                        remap.push(contexts.len() - 1);
                    }
                }
            }
            for i in 0..part.n() {
                rows.extend(part.values.row(i).iter());
                row_context.push(remap[part.row_context[i]]);
            }
        }
        let n = row_context.len();
        let values = DMatrix::from_row_slice(n, p, &rows);
        Dataset::from_indices(first.labels.clone(), values, row_context, contexts)
    }

    pub fn n(&self) -> usize {
        self.values.nrows()
    }

    pub fn p(&self) -> usize {
        self.values.ncols()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn index_of(&self, label: &str) -> Option<Node> {
        self.labels.iter().position(|l| l == label)
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn value(&self, row: usize, col: Node) -> f64 {
        self.values[(row, col)]
    }

    pub fn column(&self, col: Node) -> &[f64] {
        let n = self.n();
        &self.values.as_slice()[col * n..(col + 1) * n]
    }

    pub fn contexts(&self) -> &[DataContext] {
        &self.contexts
    }

    pub fn row_context(&self) -> &[usize] {
        &self.row_context
    }

    pub fn context_id_of_row(&self, row: usize) -> &str {
        &self.contexts[self.row_context[row]].id
    }

    pub fn context_index(&self, id: &str) -> Result<usize> {
        self.contexts
            .iter()
            .position(|c| c.id == id)
            .ok_or_else(|| Error::UnknownContext(id.to_string()))
    }

    /// Row indices for each context, in registry order.
    pub fn rows_by_context(&self) -> Vec<Vec<usize>> {
        let mut groups = vec![Vec::new(); self.contexts.len()];
        for (i, &k) in self.row_context.iter().enumerate() {
            groups[k].push(i);
        }
        groups
    }

    pub fn rows_of(&self, context: usize) -> Vec<usize> {
        (0..self.n()).filter(|&i| self.row_context[i] == context).collect()
    }

    /// Rows whose context id is in `ids` (the pooled index set).
    pub fn rows_in(&self, ids: &[&str]) -> Result<Vec<usize>> {
        let wanted = ids
            .iter()
            .map(|id| self.context_index(id))
            .collect::<Result<Vec<_>>>()?;
        Ok((0..self.n()).filter(|&i| wanted.contains(&self.row_context[i])).collect())
    }

    /// The unique observational context.
    pub fn observational(&self) -> Result<usize> {
        let obs: Vec<usize> = (0..self.contexts.len())
            .filter(|&k| self.contexts[k].is_observational())
            .collect();
        match obs.as_slice() {
            [] => Err(Error::MissingObservational),
            [k] => Ok(*k),
            _ => Err(Error::InvalidDataset("more than one observational context".into())),
        }
    }

    /// Contexts that intervene on `node`.
    pub fn contexts_targeting(&self, node: Node) -> Vec<usize> {
        (0..self.contexts.len())
            .filter(|&k| self.contexts[k].target == Some(node))
            .collect()
    }

    /// Values of column `col` restricted to `rows`.
    pub fn gather(&self, col: Node, rows: &[usize]) -> Vec<f64> {
        let c = self.column(col);
        rows.iter().map(|&i| c[i]).collect()
    }
}

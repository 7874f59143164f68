//! Linear Gaussian structural equation models.
//!
//! `X_t = Σ_s coeff[t][s] X_s + ε_t` with independent `ε_t ~ N(noise_mean_t, noise_var_t)`.
//! The module offers both a seeded sampler and exact population moments,
//! which the tests use as an oracle for every sample statistic.

mod config;

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::{DataContext, Dataset};
use crate::error::{Error, Result};
use crate::graph::{Dag, Node};

pub use config::{parse_contexts, ContextConfig, EdgeConfig, NodeRef, SemConfig};

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InterventionKind {
    /// The mechanism is replaced: `X_s = W`.
    #[default]
    Hard,
    /// `W` is added to the mechanism: `X_s = W + Σ β X_pa + ε_s`.
    Soft,
}

/// Gaussian intervention variable `W ~ N(mean, var)` on `target`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intervention {
    pub target: Node,
    pub kind: InterventionKind,
    pub mean: f64,
    pub var: f64,
}

impl Intervention {
    pub fn hard(target: Node, mean: f64, var: f64) -> Self {
        Intervention { target, kind: InterventionKind::Hard, mean, var }
    }

    pub fn soft(target: Node, mean: f64, var: f64) -> Self {
        Intervention { target, kind: InterventionKind::Soft, mean, var }
    }

    fn validate(&self, p: usize) -> std::result::Result<(), String> {
        if self.target >= p {
            return Err(format!("target index {} out of range for {} nodes", self.target, p));
        }
        if !(self.var > 0.0 && self.var.is_finite()) {
            return Err(format!("intervention variance must be positive, got {}", self.var));
        }
        if !self.mean.is_finite() {
            return Err("intervention mean must be finite".into());
        }
        Ok(())
    }
}

/// A data regime: observational when `intervention` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContextSpec {
    pub id: String,
    pub intervention: Option<Intervention>,
}

impl ContextSpec {
    pub fn observational(id: impl Into<String>) -> Self {
        ContextSpec { id: id.into(), intervention: None }
    }

    pub fn intervention(id: impl Into<String>, iv: Intervention) -> Self {
        ContextSpec { id: id.into(), intervention: Some(iv) }
    }

    pub fn target(&self) -> Option<Node> {
        self.intervention.map(|iv| iv.target)
    }

    pub fn data_context(&self) -> DataContext {
        DataContext { id: self.id.clone(), target: self.target() }
    }
}

/// Rejects registries with repeated ids.
pub fn check_unique_ids(ctxs: &[ContextSpec]) -> Result<()> {
    let mut seen = std::collections::HashSet::new();
    for c in ctxs {
        if !seen.insert(c.id.as_str()) {
            return Err(Error::InvalidContext { id: c.id.clone(), reason: "duplicate context id".into() });
        }
    }
    Ok(())
}

/// Mean vector and covariance matrix of a Gaussian.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMoments {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianMoments {
    pub fn variance(&self, i: Node) -> f64 {
        self.cov[(i, i)]
    }

    pub fn covariance(&self, i: Node, j: Node) -> f64 {
        self.cov[(i, j)]
    }

    pub fn correlation(&self, i: Node, j: Node) -> f64 {
        self.cov[(i, j)] / (self.cov[(i, i)] * self.cov[(j, j)]).sqrt()
    }

    /// Log-density of `N(mean, cov)` at `x`.
    pub fn log_density(&self, x: &DVector<f64>) -> Result<f64> {
        let chol = self
            .cov
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Numerical("covariance is not positive definite".into()))?;
        let d = x - &self.mean;
        let z = chol.l().solve_lower_triangular(&d).expect("triangular factor is invertible");
        let log_det: f64 = chol.l().diagonal().iter().map(|v| v.ln()).sum::<f64>() * 2.0;
        let p = x.len() as f64;
        Ok(-0.5 * (p * (2.0 * std::f64::consts::PI).ln() + log_det + z.norm_squared()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSem {
    dag: Dag,
    coeff: DMatrix<f64>,
    noise_mean: DVector<f64>,
    noise_var: DVector<f64>,
}

impl LinearSem {
    pub fn new(dag: Dag, coeff: DMatrix<f64>, noise_mean: DVector<f64>, noise_var: DVector<f64>) -> Result<Self> {
        let p = dag.p();
        if coeff.shape() != (p, p) || noise_mean.len() != p || noise_var.len() != p {
            return Err(Error::InvalidModel(format!("parameter dimensions do not match {p} nodes")));
        }
        for t in 0..p {
            for s in 0..p {
                let b = coeff[(t, s)];
                if !b.is_finite() {
                    return Err(Error::InvalidModel(format!("coefficient {s} -> {t} is not finite")));
                }
                if b != 0.0 && !dag.has_edge(s, t) {
                    return Err(Error::InvalidModel(format!(
                        "nonzero coefficient {} -> {} without an edge",
                        dag.label(s),
                        dag.label(t)
                    )));
                }
            }
            if !(noise_var[t] > 0.0 && noise_var[t].is_finite()) {
                return Err(Error::InvalidModel(format!(
                    "noise variance of {} must be positive",
                    dag.label(t)
                )));
            }
            if !noise_mean[t].is_finite() {
                return Err(Error::InvalidModel(format!("noise mean of {} is not finite", dag.label(t))));
            }
        }
        Ok(LinearSem { dag, coeff, noise_mean, noise_var })
    }

    /// Model with the given `(source, target, coefficient)` triples, zero-mean unit-variance noise.
    /// The DAG is exactly the listed edges.
    pub fn from_edges(labels: &[&str], edges: &[(&str, &str, f64)]) -> Result<Self> {
        let pairs: Vec<(&str, &str)> = edges.iter().map(|&(s, t, _)| (s, t)).collect();
        let dag = Dag::from_labels(labels, &pairs)?;
        let p = dag.p();
        let mut coeff = DMatrix::zeros(p, p);
        for &(s, t, b) in edges {
            let (s, t) = (dag.index_of(s).unwrap(), dag.index_of(t).unwrap());
            coeff[(t, s)] = b;
        }
        LinearSem::new(dag, coeff, DVector::zeros(p), DVector::from_element(p, 1.0))
    }

    /// Unit-noise model on `dag` with coefficients looked up per edge.
    pub fn with_coefficients(dag: Dag, mut beta: impl FnMut(Node, Node) -> f64) -> Result<Self> {
        let p = dag.p();
        let mut coeff = DMatrix::zeros(p, p);
        for (s, t) in dag.edges() {
            coeff[(t, s)] = beta(s, t);
        }
        LinearSem::new(dag, coeff, DVector::zeros(p), DVector::from_element(p, 1.0))
    }

    pub fn with_noise_var(mut self, noise_var: DVector<f64>) -> Result<Self> {
        self.noise_var = noise_var;
        LinearSem::new(self.dag, self.coeff, self.noise_mean, self.noise_var)
    }

    pub fn with_noise_mean(mut self, noise_mean: DVector<f64>) -> Result<Self> {
        self.noise_mean = noise_mean;
        LinearSem::new(self.dag, self.coeff, self.noise_mean, self.noise_var)
    }

    pub fn p(&self) -> usize {
        self.dag.p()
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn labels(&self) -> &[String] {
        self.dag.labels()
    }

    pub fn coeff(&self) -> &DMatrix<f64> {
        &self.coeff
    }

    /// Coefficient of `s` in the equation of `t`.
    pub fn beta(&self, s: Node, t: Node) -> f64 {
        self.coeff[(t, s)]
    }

    pub fn noise_mean(&self) -> &DVector<f64> {
        &self.noise_mean
    }

    pub fn noise_var(&self) -> &DVector<f64> {
        &self.noise_var
    }

    /// The model after applying one intervention.
    pub fn intervene(&self, iv: &Intervention) -> Result<LinearSem> {
        iv.validate(self.p()).map_err(Error::InvalidModel)?;
        let s = iv.target;
        let mut out = self.clone();
        match iv.kind {
            InterventionKind::Hard => {
                out.dag = self.dag.without_incoming(s)?;
                out.coeff.row_mut(s).fill(0.0);
                out.noise_mean[s] = iv.mean;
                out.noise_var[s] = iv.var;
            }
            InterventionKind::Soft => {
                out.noise_mean[s] += iv.mean;
                out.noise_var[s] += iv.var;
            }
        }
        Ok(out)
    }

    /// The system generating data in `ctx`. Errors name the context.
    pub fn effective_system(&self, ctx: &ContextSpec) -> Result<LinearSem> {
        match &ctx.intervention {
            None => Ok(self.clone()),
            Some(iv) => {
                iv.validate(self.p())
                    .map_err(|reason| Error::InvalidContext { id: ctx.id.clone(), reason })?;
                self.intervene(iv)
            }
        }
    }

    /// `(I − B)⁻¹`, built row by row in topological order so it is exact for a DAG.
    /// Entry `(t, s)` is the total effect of `ε_s` on `X_t`.
    pub fn total_effects(&self) -> DMatrix<f64> {
        let p = self.p();
        let mut m = DMatrix::<f64>::zeros(p, p);
        for &t in self.dag.topological_order() {
            m[(t, t)] = 1.0;
            for &s in self.dag.predecessors(t) {
                let b = self.coeff[(t, s)];
                if b != 0.0 {
                    for j in 0..p {
                        m[(t, j)] += b * m[(s, j)];
                    }
                }
            }
        }
        m
    }

    /// Moments of the observational distribution of this system.
    pub fn moments(&self) -> GaussianMoments {
        let m = self.total_effects();
        let mean = &m * &self.noise_mean;
        let scaled = &m * DMatrix::from_diagonal(&self.noise_var);
        let mut cov = scaled * m.transpose();
        // symmetrize away round-off
        let ct = cov.transpose();
        cov = (cov + ct) * 0.5;
        GaussianMoments { mean, cov }
    }

    /// Sum of per-node conditional Gaussian log-densities (Markov factorisation).
    pub fn factorized_log_density(&self, x: &DVector<f64>) -> f64 {
        (0..self.p())
            .map(|t| {
                let mu = self.noise_mean[t]
                    + self.dag.predecessors(t).iter().map(|&s| self.coeff[(t, s)] * x[s]).sum::<f64>();
                let v = self.noise_var[t];
                let d = x[t] - mu;
                -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + d * d / v)
            })
            .sum()
    }

    /// Draws `n` rows from `ctx` using the supplied generator.
    pub fn sample_with(&self, ctx: &ContextSpec, n: usize, rng: &mut ChaCha8Rng) -> Result<DMatrix<f64>> {
        let sys = self.effective_system(ctx)?;
        let p = self.p();
        let sd: Vec<f64> = sys.noise_var.iter().map(|v| v.sqrt()).collect();
        let order = sys.dag.topological_order().to_vec();
        let mut out = DMatrix::zeros(n, p);
        let mut row = vec![0.0; p];
        for i in 0..n {
            for &t in &order {
                let z: f64 = StandardNormal.sample(rng);
                let mut x = sys.noise_mean[t] + sd[t] * z;
                for &s in sys.dag.predecessors(t) {
                    x += sys.coeff[(t, s)] * row[s];
                }
                row[t] = x;
            }
            for t in 0..p {
                out[(i, t)] = row[t];
            }
        }
        Ok(out)
    }
}

/// ChaCha8 generator on a numbered stream of `seed`. Streams are independent,
/// so per-context and per-replication draws never overlap.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn effective_system(sem: &LinearSem, ctx: &ContextSpec) -> Result<LinearSem> {
    sem.effective_system(ctx)
}

/// Exact moments of `X` in context `ctx`: `μ = (I−B)⁻¹ m`, `Σ = (I−B)⁻¹ D (I−B)⁻ᵀ`.
pub fn population_moments(sem: &LinearSem, ctx: &ContextSpec) -> Result<GaussianMoments> {
    Ok(sem.effective_system(ctx)?.moments())
}

/// Moments of the mixture that pools contexts with the given weights.
pub fn pooled_population_moments(sem: &LinearSem, ctxs: &[(ContextSpec, f64)]) -> Result<GaussianMoments> {
    if ctxs.is_empty() {
        return Err(Error::InvalidArgument("no contexts to pool".into()));
    }
    if ctxs.iter().any(|(_, w)| !(*w > 0.0 && w.is_finite())) {
        return Err(Error::InvalidArgument("pooling weights must be positive".into()));
    }
    let total: f64 = ctxs.iter().map(|(_, w)| w).sum();
    if (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("pooling weights sum to {total}, not 1")));
    }
    let p = sem.p();
    let mut mean = DVector::zeros(p);
    let mut second = DMatrix::zeros(p, p);
    for (ctx, w) in ctxs {
        let m = population_moments(sem, ctx)?;
        second += (&m.cov + &m.mean * m.mean.transpose()) * *w;
        mean += &m.mean * *w;
    }
    let cov = second - &mean * mean.transpose();
    Ok(GaussianMoments { mean, cov })
}

/// Equal-weight pooling of the given contexts.
pub fn equal_pooled_moments(sem: &LinearSem, ctxs: &[ContextSpec]) -> Result<GaussianMoments> {
    let w = 1.0 / ctxs.len().max(1) as f64;
    let weighted: Vec<(ContextSpec, f64)> = ctxs.iter().map(|c| (c.clone(), w)).collect();
    pooled_population_moments(sem, &weighted)
}

/// `n` draws from one context. Deterministic in `(sem, ctx, n, seed)`.
pub fn sample(sem: &LinearSem, ctx: &ContextSpec, n: usize, seed: u64) -> Result<Dataset> {
    simulate(sem, std::slice::from_ref(ctx), n, seed)
}

/// `n` draws from each context, context `k` on stream `k` of `seed`, stacked in registry order.
pub fn simulate(sem: &LinearSem, ctxs: &[ContextSpec], n: usize, seed: u64) -> Result<Dataset> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    if ctxs.is_empty() {
        return Err(Error::InvalidArgument("no contexts to simulate".into()));
    }
    check_unique_ids(ctxs)?;
    let p = sem.p();
    let mut values = DMatrix::zeros(n * ctxs.len(), p);
    let mut row_context = Vec::with_capacity(n * ctxs.len());
    for (k, ctx) in ctxs.iter().enumerate() {
        let mut rng = stream_rng(seed, k as u64);
        let block = sem.sample_with(ctx, n, &mut rng)?;
        values.view_mut((k * n, 0), (n, p)).copy_from(&block);
        row_context.extend(std::iter::repeat_n(k, n));
    }
    Dataset::from_indices(
        sem.labels().to_vec(),
        values,
        row_context,
        ctxs.iter().map(ContextSpec::data_context).collect(),
    )
}

/// Population mean and variance of one node in one context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeMoments {
    pub mean: f64,
    pub var: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub labels: Vec<String>,
    pub observational: Vec<NodeMoments>,
    pub intervened: Vec<NodeMoments>,
}

/// Per-node `E` and `Var` with and without the intervention.
pub fn intervention_moment_check(sem: &LinearSem, iv: &Intervention) -> Result<MomentReport> {
    let per_node = |m: &GaussianMoments| -> Vec<NodeMoments> {
        (0..sem.p()).map(|i| NodeMoments { mean: m.mean[i], var: m.cov[(i, i)] }).collect()
    };
    let obs = sem.moments();
    let int = sem.intervene(iv)?.moments();
    Ok(MomentReport {
        labels: sem.labels().to_vec(),
        observational: per_node(&obs),
        intervened: per_node(&int),
    })
}

#[cfg(test)]
mod tests;

use nalgebra::{DMatrix, DVector};

use super::{enumerate_subsets, ResidualScope};
use crate::error::{Error, Result};
use crate::graph::{Node, NodeSet};
use crate::perturb::ORACLE_TOL;
use crate::sem::{equal_pooled_moments, population_moments, ContextSpec, GaussianMoments, LinearSem};

/// Population projection of `t` on `s`: slopes and residual variance.
fn projection(m: &GaussianMoments, t: Node, s: &NodeSet) -> Result<(DVector<f64>, f64)> {
    let idx = s.as_slice();
    let sxx = DMatrix::from_fn(idx.len(), idx.len(), |i, j| m.cov[(idx[i], idx[j])]);
    let sxt = DVector::from_fn(idx.len(), |i, _| m.cov[(idx[i], t)]);
    let slopes = if idx.is_empty() {
        DVector::zeros(0)
    } else {
        sxx.cholesky()
            .ok_or_else(|| Error::Numerical("predictor covariance is singular".into()))?
            .solve(&sxt)
    };
    let resid = m.cov[(t, t)] - sxt.dot(&slopes);
    Ok((slopes, resid))
}

/// Exact counterpart of the invariance test for `t ~ S`: slopes, intercept
/// and residual variance agree across the contexts (those intervening on `t`
/// are left out) within `ORACLE_TOL`. Under [`ResidualScope::AllVariables`] the
/// pooled residual must also be uncorrelated with every variable outside `S`.
pub fn population_invariance(
    sem: &LinearSem,
    contexts: &[ContextSpec],
    t: Node,
    s: &NodeSet,
    scope: ResidualScope,
) -> Result<bool> {
    let used: Vec<ContextSpec> = contexts.iter().filter(|c| c.target() != Some(t)).cloned().collect();
    if used.len() < 2 {
        return Err(Error::InsufficientData("invariance needs at least 2 contexts".into()));
    }
    let mut first: Option<(DVector<f64>, f64, f64)> = None;
    for ctx in &used {
        let m = population_moments(sem, ctx)?;
        let (slopes, resid) = projection(&m, t, s)?;
        let intercept = m.mean[t] - s.iter().zip(slopes.iter()).map(|(j, b)| b * m.mean[j]).sum::<f64>();
        match &first {
            None => first = Some((slopes, intercept, resid)),
            Some((b0, a0, r0)) => {
                let same = (slopes - b0).amax() <= ORACLE_TOL
                    && (intercept - a0).abs() <= ORACLE_TOL
                    && (resid - r0).abs() <= ORACLE_TOL;
                if !same {
                    return Ok(false);
                }
            }
        }
    }
    if scope == ResidualScope::AllVariables {
        let pooled = equal_pooled_moments(sem, &used)?;
        let (slopes, _) = projection(&pooled, t, s)?;
        for j in (0..sem.p()).filter(|&j| j != t && !s.contains(j)) {
            let fitted: f64 = s.iter().zip(slopes.iter()).map(|(k, b)| b * pooled.cov[(k, j)]).sum();
            if (pooled.cov[(t, j)] - fitted).abs() > ORACLE_TOL {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// All predictor sets for `t` that pass [`population_invariance`], by size
/// then lexicographically.
pub fn population_accepted_sets(
    sem: &LinearSem,
    contexts: &[ContextSpec],
    t: Node,
    scope: ResidualScope,
) -> Result<Vec<NodeSet>> {
    let candidates: Vec<Node> = (0..sem.p()).filter(|&j| j != t).collect();
    let mut out = Vec::new();
    for s in enumerate_subsets(&candidates, candidates.len()) {
        if population_invariance(sem, contexts, t, &s, scope)? {
            out.push(s);
        }
    }
    Ok(out)
}

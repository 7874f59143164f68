use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Dag, Node, PATH_CAP};
use crate::sem::LinearSem;

/// Allowed deviation of a population variance from 1 for a standardized model.
pub const STANDARDIZED_TOL: f64 = 1e-9;

/// Rescales every node to unit population variance. Correlations are unchanged;
/// `β'_ts = β_ts σ_s / σ_t` and the noise of `t` is divided by `σ_t`.
pub fn standardize(sem: &LinearSem) -> LinearSem {
    let m = sem.moments();
    let p = sem.p();
    let sd: Vec<f64> = (0..p).map(|i| m.variance(i).sqrt()).collect();
    let coeff = DMatrix::from_fn(p, p, |t, s| sem.coeff()[(t, s)] * sd[s] / sd[t]);
    let noise_mean = DVector::from_fn(p, |t, _| sem.noise_mean()[t] / sd[t]);
    let noise_var = DVector::from_fn(p, |t, _| sem.noise_var()[t] / (sd[t] * sd[t]));
    LinearSem::new(sem.dag().clone(), coeff, noise_mean, noise_var).expect("rescaling keeps the model valid")
}

/// Model on `dag` whose coefficients are the given standardized path
/// coefficients: noise variances are chosen, in topological order, so that
/// every node has population variance 1. Errors if some node's explained
/// variance already reaches 1.
pub fn unit_variance_sem(dag: Dag, mut beta: impl FnMut(Node, Node) -> f64) -> Result<LinearSem> {
    let p = dag.p();
    let mut coeff = DMatrix::zeros(p, p);
    for (s, t) in dag.edges() {
        coeff[(t, s)] = beta(s, t);
    }
    let mut cov = DMatrix::<f64>::zeros(p, p);
    let mut noise_var = DVector::from_element(p, 1.0);
    for &t in dag.topological_order() {
        let pa = dag.predecessors(t);
        let mut explained = 0.0;
        for &a in pa {
            for &b in pa {
                explained += coeff[(t, a)] * coeff[(t, b)] * cov[(a, b)];
            }
        }
        if explained >= 1.0 {
            return Err(Error::InvalidModel(format!(
                "coefficients into {} explain variance {explained} >= 1",
                dag.label(t)
            )));
        }
        noise_var[t] = 1.0 - explained;
        cov[(t, t)] = 1.0;
        // covariance with every node placed earlier in the order
        for &v in dag.topological_order().iter().take_while(|&&v| v != t) {
            let c: f64 = pa.iter().map(|&a| coeff[(t, a)] * cov[(a, v)]).sum();
            cov[(t, v)] = c;
            cov[(v, t)] = c;
        }
    }
    LinearSem::new(dag, coeff, DVector::zeros(p), noise_var)
}

/// Sum over directed paths `s -> ... -> t` of the product of coefficients.
/// Requires a standardized model, where this equals the correlation when
/// `s` has no ancestors shared with `t` other than through `s`.
pub fn wright_path_sum(sem: &LinearSem, s: Node, t: Node) -> Result<f64> {
    let m = sem.moments();
    for i in 0..sem.p() {
        let v = m.variance(i);
        if (v - 1.0).abs() > STANDARDIZED_TOL {
            return Err(Error::NotStandardized { node: i, variance: v });
        }
    }
    let paths = sem.dag().directed_paths_capped(s, t, PATH_CAP)?;
    Ok(paths
        .iter()
        .map(|path| path.windows(2).map(|w| sem.beta(w[0], w[1])).product::<f64>())
        .sum())
}

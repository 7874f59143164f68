use rand::Rng;

use crate::data::Dataset;
use crate::error::Result;
use crate::graph::{Dag, Node};
use crate::perturb::unit_variance_sem;
use crate::sem::{simulate, stream_rng, ContextSpec, Intervention, InterventionKind, LinearSem};

pub const BETA_US: f64 = 1.8;
pub const BETA_TU: f64 = 0.9;

/// `s -> u -> t` with unit noise.
pub fn chain_sem() -> LinearSem {
    LinearSem::from_edges(&["s", "u", "t"], &[("s", "u", BETA_US), ("u", "t", BETA_TU)]).expect("valid model")
}

/// `s <- u -> t` with unit noise.
pub fn common_cause_sem() -> LinearSem {
    LinearSem::from_edges(&["s", "u", "t"], &[("u", "s", BETA_US), ("u", "t", BETA_TU)]).expect("valid model")
}

/// Standardized diamond `s -> {v, w} -> t` with all path coefficients −0.2,
/// plus the direct edge `s -> t` with coefficient −0.1 when `direct` is set.
pub fn figure2_sem(direct: bool) -> LinearSem {
    let mut edges = vec![("s", "v"), ("s", "w"), ("v", "t"), ("w", "t")];
    if direct {
        edges.push(("s", "t"));
    }
    let dag = Dag::from_labels(&["s", "v", "w", "t"], &edges).expect("valid graph");
    unit_variance_sem(dag, |s, t| if (s, t) == (0, 3) { -0.1 } else { -0.2 }).expect("explained variance below 1")
}

/// `v -> s -> u -> t`: the indirect path that conditioning on `u` removes.
pub fn figure3a_sem() -> LinearSem {
    LinearSem::from_edges(&["v", "s", "u", "t"], &[("v", "s", 1.0), ("s", "u", BETA_US), ("u", "t", BETA_TU)])
        .expect("valid model")
}

/// `v -> s -> t <- u`: both `s` and `u` are parents of `t`.
pub fn figure3b_sem() -> LinearSem {
    LinearSem::from_edges(&["v", "s", "u", "t"], &[("v", "s", 1.0), ("s", "t", BETA_US), ("u", "t", BETA_TU)])
        .expect("valid model")
}

/// Observational context `obs` plus one intervention per listed node, each
/// context named after its target.
pub fn contexts_on(sem: &LinearSem, nodes: &[Node], kind: InterventionKind, mean: f64, var: f64) -> Vec<ContextSpec> {
    let mut out = vec![ContextSpec::observational("obs")];
    for &n in nodes {
        let iv = Intervention { target: n, kind, mean, var };
        out.push(ContextSpec::intervention(sem.labels()[n].clone(), iv));
    }
    out
}

/// [`contexts_on`] every node with hard interventions `N(1, 1)`.
pub fn hard_everywhere(sem: &LinearSem) -> Vec<ContextSpec> {
    let all: Vec<Node> = (0..sem.p()).collect();
    contexts_on(sem, &all, InterventionKind::Hard, 1.0, 1.0)
}

/// Sign-balanced coefficient with `|β|` uniform on `[lo, hi]`.
pub fn signed_coefficient<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let mag = if hi > lo { rng.random_range(lo..=hi) } else { lo };
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

pub const MEAT_LABELS: [&str; 11] =
    ["moral", "nutr", "envir", "infer", "suff", "tax", "taste", "death", "sad", "guilty", "disg"];

/// Planted structure. The feedback loop between `infer` and `guilty` is kept
/// in one direction only.
pub const MEAT_EDGES: [(&str, &str); 6] = [
    ("moral", "tax"),
    ("tax", "guilty"),
    ("suff", "guilty"),
    ("taste", "guilty"),
    ("infer", "guilty"),
    ("guilty", "death"),
];

pub const MEAT_N: usize = 200;

/// Synthetic stand-in for the questionnaire study: 11 variables, one
/// observational and 11 single-variable hard-intervention contexts, 200 rows
/// each. Coefficients and data are drawn from `seed`.
pub fn meat_analogue(seed: u64) -> Result<(LinearSem, Dataset)> {
    let dag = Dag::from_labels(&MEAT_LABELS, &MEAT_EDGES)?;
    let mut rng = stream_rng(seed, 0);
    let sem = LinearSem::with_coefficients(dag, |_, _| signed_coefficient(&mut rng, 0.5, 1.5))?;
    let contexts = hard_everywhere(&sem);
    let ds = simulate(&sem, &contexts, MEAT_N, rng.random())?;
    Ok((sem, ds))
}

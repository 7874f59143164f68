use super::*;
use crate::graph::NodeSet;

fn fig2_spec(method: Method, n: usize, reps: usize) -> ExperimentSpec {
    let text = format!(
        r#"{{
        "name": "fig2b",
        "sem": {{"unit_variance": {{
            "labels": ["s", "v", "w", "t"],
            "edges": [
                {{"from": "s", "to": "v", "beta": -0.2}},
                {{"from": "s", "to": "w", "beta": -0.2}},
                {{"from": "v", "to": "t", "beta": -0.2}},
                {{"from": "w", "to": "t", "beta": -0.2}},
                {{"from": "s", "to": "t", "beta": -0.1}}
            ]}}}},
        "contexts": {{"all_nodes": {{"kind": "hard", "mean": 1.0, "var": 1.0}}}},
        "n_per_context": {n},
        "replications": {reps},
        "seed": 42,
        "method": "{}",
        "watch_edge": ["s", "t"]
    }}"#,
        match method {
            Method::PerturbTr => "perturb_tr",
            Method::Icp => "icp",
            Method::Both => "both",
        }
    );
    ExperimentSpec::from_json(&text).unwrap()
}

#[test]
fn canonical_models() {
    let a = figure2_sem(false);
    assert!((a.moments().correlation(0, 3) - 0.08).abs() < 1e-12);
    let b = figure2_sem(true);
    assert!((b.moments().correlation(0, 3) + 0.02).abs() < 1e-12);
    assert_eq!(figure3a_sem().dag().edge_count(), 3);
    assert!(figure3b_sem().dag().has_edge(2, 3));
    assert_eq!(hard_everywhere(&chain_sem()).len(), 4);
}

#[test]
fn meat_analogue_shape() {
    let (sem, ds) = meat_analogue(3).unwrap();
    assert_eq!(ds.p(), 11);
    assert_eq!(ds.contexts().len(), 12);
    assert_eq!(ds.n(), 12 * MEAT_N);
    assert_eq!(sem.dag().edge_count(), MEAT_EDGES.len());
    for (s, t) in sem.dag().edges() {
        let b = sem.beta(s, t).abs();
        assert!((0.5..=1.5).contains(&b));
    }
    assert_eq!(meat_analogue(3).unwrap().1, ds);
}

#[test]
fn figure1_cells_at_default_size() {
    let cells = figure1_scenarios(1, FIGURE1_N).unwrap();
    assert_eq!(cells.iter().map(|c| c.name.as_str()).collect::<Vec<_>>(), ["a", "b", "c", "d"]);
    assert!((cells[0].corr_obs - cells[0].corr_int).abs() < 0.15);
    assert_eq!(cells[1].data.n(), 2 * FIGURE1_N);
    let csv = figure1_scatter_csv(&cells);
    assert!(csv.starts_with("cell,context,s,t\n"));
    assert_eq!(csv.lines().count(), 1 + 4 * 2 * FIGURE1_N);
}

#[test]
fn confounded_degenerate_cases() {
    let none = confounded_scenario(5, 2000, ConfoundedParams { sigma_u: 0.0, ..Default::default() }).unwrap();
    assert_eq!(none.closed_form, 0.0);
    assert_eq!(none.cov_resid_u, 0.0);
    let unrelated = confounded_scenario(5, 2000, ConfoundedParams { beta_tu: 0.0, ..Default::default() }).unwrap();
    assert_eq!(unrelated.closed_form, 0.0);
    assert!(unrelated.z_score().abs() < 5.0);
    assert!(confounded_scenario(5, 50, ConfoundedParams::default()).is_err());
}

#[test]
fn confounded_generic_case() {
    let r = confounded_scenario(9, 20_000, ConfoundedParams::default()).unwrap();
    assert!(r.closed_form > 0.1);
    assert!(r.cov_resid_s.abs() < 1e-9);
    assert!(r.z_score().abs() < 5.0, "{r:?}");
    assert!(r.icp.defensive_empty);
    assert!(r.icp.estimate.is_empty());
}

#[test]
fn edge_counts() {
    let truth = Dag::with_default_labels(3, [(0, 1), (1, 2)]).unwrap();
    let est = DiGraph::with_default_labels(3, [(1, 0), (1, 2), (0, 2)]).unwrap();
    let c = EdgeCounts::score(&truth, &est);
    assert_eq!((c.tp, c.fp, c.fn_, c.tn), (1, 2, 1, 2));
    assert_eq!(c.tp + c.fp + c.fn_ + c.tn, 6);
    assert_eq!(c.shd, 2);
    assert_eq!(c.precision(), Some(1.0 / 3.0));
    assert_eq!(EdgeCounts::default().recall(), None);
}

#[test]
fn experiment_is_deterministic_and_scored() {
    let spec = fig2_spec(Method::Both, 300, 3);
    let a = run_experiment(&spec).unwrap();
    let b = run_experiment(&spec).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.records.len(), 3);
    for r in &a.records {
        assert!(r.error.is_none(), "{:?}", r.error);
        let c = r.tr.as_ref().unwrap().vs_parents;
        assert_eq!(c.tp + c.fp + c.fn_ + c.tn, 12);
        assert_eq!(r.coverage.len(), 4);
    }
    assert_eq!(a.summary.coverage.len(), 4);
    assert!(a.records_csv().lines().count() == 4);
    let one = ExperimentSpec { replications: 1, ..spec.clone() };
    assert_eq!(run_experiment(&one).unwrap().records[0], a.records[0]);
}

#[test]
fn random_models_respect_ranges() {
    let spec = ExperimentSpec::from_json(
        r#"{"name": "cov", "sem": {"random": {"p": [4, 6], "edge_prob": 0.3, "coeff_range": [0.5, 1.5]}},
            "contexts": {"all_nodes": {}}, "n_per_context": 100, "replications": 6, "seed": 1, "method": "icp"}"#,
    )
    .unwrap();
    let res = run_experiment(&spec).unwrap();
    for r in &res.records {
        assert!((4..=6).contains(&r.p));
        assert_eq!(r.coverage.len(), r.p);
    }
}

#[test]
fn spec_validation() {
    let base = fig2_spec(Method::PerturbTr, 100, 1);
    assert!(ExperimentSpec { replications: 0, ..base.clone() }.validate().is_err());
    let random = SemSource::Random(RandomDagParams {
        p: NodeCount::Fixed(4),
        edge_prob: 0.3,
        coeff_range: [0.1, 1.0],
        noise_var: 1.0,
    });
    let bad = ExperimentSpec { sem: random, watch_edge: None, ..base.clone() };
    assert!(bad.validate().unwrap_err().to_string().contains("coeff_range"));
    let bad_watch = ExperimentSpec { watch_edge: Some([NodeRef::Label("s".into()), NodeRef::Label("zz".into())]), ..base };
    assert!(bad_watch.validate().is_err());
    assert!(ExperimentSpec::from_json(r#"{"name": "x"}"#).is_err());
}

#[test]
fn unit_variance_source_matches_builder() {
    let spec = fig2_spec(Method::PerturbTr, 100, 1);
    let built = spec.fixed_sem().unwrap().unwrap();
    let reference = figure2_sem(true);
    assert!((built.noise_var() - reference.noise_var()).amax() < 1e-15);
    assert_eq!(built.dag().parents(3).unwrap(), NodeSet::new([0, 1, 2]));
}

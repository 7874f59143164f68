use super::*;
use nalgebra::DVector;
use crate::graph::Dag;
use crate::sem::{simulate, Intervention};

fn fig2(direct: Option<f64>) -> LinearSem {
    let mut edges = vec![("s", "v"), ("s", "w"), ("v", "t"), ("w", "t")];
    if direct.is_some() {
        edges.push(("s", "t"));
    }
    let dag = Dag::from_labels(&["s", "v", "w", "t"], &edges).unwrap();
    unit_variance_sem(dag, |s, t| if (s, t) == (0, 3) { direct.unwrap() } else { -0.2 }).unwrap()
}

fn all_hard(sem: &LinearSem, mean: f64, var: f64) -> Vec<ContextSpec> {
    let mut c = vec![ContextSpec::observational("obs")];
    for (i, l) in sem.labels().iter().enumerate() {
        c.push(ContextSpec::intervention(l.clone(), Intervention::hard(i, mean, var)));
    }
    c
}

#[test]
fn unit_variance_construction() {
    let sem = fig2(Some(-0.1));
    let m = sem.moments();
    for i in 0..4 {
        assert!((m.variance(i) - 1.0).abs() < 1e-14);
    }
    assert!((sem.noise_var()[1] - 0.96).abs() < 1e-15);
    let bad = Dag::with_default_labels(2, [(0, 1)]).unwrap();
    assert!(unit_variance_sem(bad, |_, _| 1.0).is_err());
}

#[test]
fn wright_sums_on_figure_2() {
    let a = fig2(None);
    assert!((wright_path_sum(&a, 0, 3).unwrap() - 0.08).abs() < 1e-12);
    assert!((a.moments().correlation(0, 3) - 0.08).abs() < 1e-12);
    let b = fig2(Some(-0.1));
    assert!((wright_path_sum(&b, 0, 3).unwrap() + 0.02).abs() < 1e-12);
    assert!((b.moments().correlation(0, 3) + 0.02).abs() < 1e-12);
    assert_eq!(wright_path_sum(&a, 3, 0).unwrap(), 0.0);
    assert_eq!(wright_path_sum(&a, 1, 2).unwrap(), 0.0);

    let raw = LinearSem::from_edges(&["s", "u", "t"], &[("s", "u", 1.8), ("u", "t", 0.9)]).unwrap();
    assert!(matches!(wright_path_sum(&raw, 0, 2), Err(Error::NotStandardized { .. })));
}

#[test]
fn standardize_preserves_correlations() {
    let raw = LinearSem::from_edges(&["s", "u", "t"], &[("s", "u", 1.8), ("u", "t", 0.9)]).unwrap();
    let std = standardize(&raw);
    let (a, b) = (raw.moments(), std.moments());
    for i in 0..3 {
        assert!((b.variance(i) - 1.0).abs() < 1e-12);
        for j in 0..3 {
            assert!((a.correlation(i, j) - b.correlation(i, j)).abs() < 1e-12);
        }
    }
    let again = standardize(&std);
    assert!((again.coeff() - std.coeff()).abs().max() < 1e-12);
    assert!((again.noise_var() - std.noise_var()).abs().max() < 1e-12);

    let single = LinearSem::from_edges(&["x"], &[]).unwrap().with_noise_var(DVector::from_element(1, 4.0)).unwrap();
    assert!((standardize(&single).noise_var()[0] - 1.0).abs() < 1e-15);
}


fn labels4() -> Vec<String> {
    ["s", "v", "w", "t"].iter().map(|s| s.to_string()).collect()
}

#[test]
fn criterion_on_figure_2_weights() {
    let path = [(0, 1, -0.2), (0, 2, -0.2), (1, 3, -0.2), (2, 3, -0.2)];
    let mut a = path.to_vec();
    a.push((0, 3, 0.08));
    let pg = PerturbationGraph::from_weights(labels4(), &a).unwrap();
    assert!(tr_criterion(&pg, 0, 3).unwrap());
    assert!(!tr_criterion(&pg, 0, 1).unwrap());

    let mut b = path.to_vec();
    b.push((0, 3, -0.02));
    let pg = PerturbationGraph::from_weights(labels4(), &b).unwrap();
    assert!(tr_criterion(&pg, 0, 3).unwrap());
    let (witness, min) = tr_witness(&pg, 0, 3).unwrap().unwrap();
    assert_eq!(witness, vec![0, 1, 3]);
    assert!((min - 0.2).abs() < 1e-15);

    let single = PerturbationGraph::from_weights(labels4(), &[(0, 3, 0.5)]).unwrap();
    assert!(!tr_criterion(&single, 0, 3).unwrap());
    assert!(matches!(tr_criterion(&single, 3, 0), Err(Error::EdgeAbsent(3, 0))));
}

#[test]
fn weak_link_on_some_path_keeps_edge() {
    // one path has a weak edge, the other is strong throughout
    let pg = PerturbationGraph::from_weights(
        labels4(),
        &[(0, 1, 0.9), (1, 3, 0.05), (0, 2, 0.6), (2, 3, 0.7), (0, 3, 0.3)],
    )
    .unwrap();
    assert!(tr_criterion(&pg, 0, 3).unwrap());
    assert_eq!(tr_witness(&pg, 0, 3).unwrap().unwrap().0, vec![0, 2, 3]);
    let pg = PerturbationGraph::from_weights(labels4(), &[(0, 1, 0.9), (1, 3, 0.05), (0, 3, 0.3)]).unwrap();
    assert!(!tr_criterion(&pg, 0, 3).unwrap());
}

#[test]
fn population_graphs_reproduce_figure_2() {
    for (direct, expect_true_edge) in [(None, false), (Some(-0.1), true)] {
        let sem = fig2(direct);
        let pg = population_perturbation_graph(&sem, &all_hard(&sem, 1.0, 1.0), PgMode::Strict).unwrap();
        let edges: Vec<_> = pg.edges.iter().map(|e| (e.source, e.target)).collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (0, 3), (1, 3), (2, 3)]);
        let tr = transitive_reduce(&pg).unwrap();
        assert_eq!(tr.removed.len(), 1);
        assert!(tr.is_removed(0, 3));
        assert_eq!(sem.dag().has_edge(0, 3), expect_true_edge);
        assert_eq!(tr.kept.len(), 4);
    }
}

#[test]
fn reduction_without_long_paths_removes_nothing() {
    let pg = PerturbationGraph::from_weights(labels4(), &[(0, 1, 0.5), (2, 3, -0.4), (0, 2, 0.1)]).unwrap();
    let tr = transitive_reduce(&pg).unwrap();
    assert!(tr.removed.is_empty());
    let order: Vec<_> = tr.kept.iter().map(|e| (e.source, e.target)).collect();
    assert_eq!(order, vec![(0, 1), (2, 3), (0, 2)]);
    let empty = PerturbationGraph::from_weights(labels4(), &[]).unwrap();
    assert!(transitive_reduce(&empty).unwrap().kept.is_empty());
}

#[test]
fn reduction_is_label_permutation_invariant() {
    let edges = [(0, 1, -0.3), (0, 2, -0.25), (1, 3, -0.4), (2, 3, 0.5), (0, 3, 0.1), (1, 2, 0.2)];
    let pg = PerturbationGraph::from_weights(labels4(), &edges).unwrap();
    let base = transitive_reduce(&pg).unwrap();
    let perm = [2, 0, 3, 1];
    let mut labels = vec![String::new(); 4];
    for (i, &j) in perm.iter().enumerate() {
        labels[j] = pg.labels[i].clone();
    }
    let moved: Vec<_> = edges.iter().map(|&(s, t, w)| (perm[s], perm[t], w)).collect();
    let permuted = transitive_reduce(&PerturbationGraph::from_weights(labels, &moved).unwrap()).unwrap();
    let back = |n: Node| perm.iter().position(|&x| x == n).unwrap();
    let mut removed: Vec<_> = permuted.removed.iter().map(|r| (back(r.source), back(r.target))).collect();
    removed.sort();
    let expect: Vec<_> = base.removed.iter().map(|r| (r.source, r.target)).collect();
    assert_eq!(removed, expect);
}

#[test]
fn json_and_dot_outputs() {
    let pg = PerturbationGraph::from_weights(labels4(), &[(0, 1, -0.2), (1, 3, -0.2), (0, 3, 0.08)]).unwrap();
    assert_eq!(PerturbationGraph::from_json(&pg.to_json()).unwrap(), pg);
    let tr = transitive_reduce(&pg).unwrap();
    let dot = tr.to_dot();
    assert!(dot.contains("\"s\" -> \"t\" [label=\"0.080\", style=dashed];"), "{dot}");
    assert!(dot.contains("\"s\" -> \"v\" [label=\"-0.200\"];"));
    let json = tr.to_json();
    assert!(json.contains("\"witness\""));
    assert!(PerturbationGraph::from_json(r#"{"labels":["a"],"mode":"rice","alpha":0.05,"edges":[{"source":0,"target":3,"weight":0.1,"pvalue_corr":0.0}]}"#).is_err());
}

#[test]
fn sample_graph_on_common_cause_and_empty_models() {
    let fork = LinearSem::from_edges(&["s", "u", "t"], &[("u", "s", 1.8), ("u", "t", 0.9)]).unwrap();
    let ctxs = vec![
        ContextSpec::observational("obs"),
        ContextSpec::intervention("s", Intervention::hard(0, 1.0, 0.09)),
    ];
    let ds = simulate(&fork, &ctxs, 5000, 3).unwrap();
    let strict = build_perturbation_graph(&ds, 0.05, PgMode::Strict).unwrap();
    assert!(!strict.has_edge(0, 2));
    let rice = build_perturbation_graph(&ds, 0.05, PgMode::Rice).unwrap();
    assert!(rice.has_edge(0, 2));
    assert!(rice.warnings.iter().any(|w| w.contains("`u`")));

    let empty = LinearSem::from_edges(&["a", "b", "c"], &[]).unwrap();
    let ds = simulate(&empty, &all_hard(&empty, 1.0, 1.0), 500, 4).unwrap();
    let pg = build_perturbation_graph(&ds, 0.05, PgMode::Strict).unwrap();
    assert!(pg.edges.is_empty());
}

#[test]
fn sample_graph_needs_observational_context() {
    let sem = LinearSem::from_edges(&["a", "b"], &[("a", "b", 1.0)]).unwrap();
    let ds = simulate(&sem, &[ContextSpec::intervention("a", Intervention::hard(0, 1.0, 1.0))], 50, 1).unwrap();
    assert!(matches!(build_perturbation_graph(&ds, 0.05, PgMode::Rice), Err(Error::MissingObservational)));
}

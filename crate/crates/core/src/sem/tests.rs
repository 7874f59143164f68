use super::*;
use crate::graph::NodeSet;

fn chain(bus: f64, btu: f64) -> LinearSem {
    LinearSem::from_edges(&["s", "u", "t"], &[("s", "u", bus), ("u", "t", btu)]).unwrap()
}

fn fig3a(bsv: f64, bus: f64, btu: f64) -> LinearSem {
    LinearSem::from_edges(
        &["v", "s", "u", "t"],
        &[("v", "s", bsv), ("s", "u", bus), ("u", "t", btu)],
    )
    .unwrap()
}

#[test]
fn effective_system_hard_soft_observational() {
    let sem = fig3a(0.7, 1.8, 0.9);
    let hard = sem
        .effective_system(&ContextSpec::intervention("s", Intervention::hard(1, 1.0, 0.5)))
        .unwrap();
    assert_eq!(hard.beta(0, 1), 0.0);
    assert!(!hard.dag().has_edge(0, 1));
    assert_eq!(hard.noise_mean()[1], 1.0);
    assert_eq!(hard.noise_var()[1], 0.5);

    let soft = sem
        .effective_system(&ContextSpec::intervention("s", Intervention::soft(1, 1.0, 0.5)))
        .unwrap();
    assert_eq!(soft.coeff(), sem.coeff());
    assert_eq!(soft.noise_mean()[1], 1.0);
    assert_eq!(soft.noise_var()[1], 1.5);

    assert_eq!(sem.effective_system(&ContextSpec::observational("obs")).unwrap(), sem);
}

#[test]
fn invalid_interventions_name_the_context() {
    let sem = chain(1.0, 1.0);
    let err = sem
        .effective_system(&ContextSpec::intervention("bad-ctx", Intervention::hard(7, 0.0, 1.0)))
        .unwrap_err();
    assert!(err.to_string().contains("bad-ctx"));
    assert!(sem
        .effective_system(&ContextSpec::intervention("z", Intervention::hard(0, 0.0, 0.0)))
        .is_err());
}

#[test]
fn model_validation() {
    let dag = Dag::with_default_labels(2, [(0, 1)]).unwrap();
    let mut coeff = DMatrix::zeros(2, 2);
    coeff[(0, 1)] = 1.0; // 1 -> 0 has no edge
    assert!(LinearSem::new(dag.clone(), coeff, DVector::zeros(2), DVector::from_element(2, 1.0)).is_err());
    let coeff = DMatrix::zeros(2, 2);
    assert!(LinearSem::new(dag.clone(), coeff.clone(), DVector::zeros(2), DVector::from_vec(vec![1.0, 0.0])).is_err());
    // zero coefficient on an existing edge is allowed
    assert!(LinearSem::new(dag, coeff, DVector::zeros(2), DVector::from_element(2, 1.0)).is_ok());
}

#[test]
fn identity_moments_without_edges() {
    let sem = LinearSem::with_coefficients(Dag::with_default_labels(3, []).unwrap(), |_, _| 0.0).unwrap();
    let m = population_moments(&sem, &ContextSpec::observational("obs")).unwrap();
    assert_eq!(m.cov, DMatrix::identity(3, 3));
    assert_eq!(m.mean, DVector::zeros(3));
}

#[test]
fn chain_and_fork_closed_forms() {
    let (bus, btu) = (1.8, 0.9);
    let m = chain(bus, btu).moments();
    let expected = btu * bus / (btu * btu * bus * bus + btu * btu + 1.0).sqrt();
    assert!((m.correlation(0, 2) - expected).abs() < 1e-12);

    let (bsv, bus, btu) = (1.0, 1.8, 0.9);
    let m = fig3a(bsv, bus, btu).moments();
    assert!((m.covariance(1, 3) - (bsv * bsv * btu * bus + btu * bus)).abs() < 1e-12);
}

#[test]
fn pooling_trivial_cases() {
    let sem = chain(1.8, 0.9);
    let obs = ContextSpec::observational("obs");
    let hard = ContextSpec::intervention("s", Intervention::hard(0, 1.0, 1.0));
    let single = pooled_population_moments(&sem, &[(hard.clone(), 1.0)]).unwrap();
    let direct = population_moments(&sem, &hard).unwrap();
    assert!((single.cov - direct.cov).abs().max() < 1e-14);
    let twice = pooled_population_moments(&sem, &[(obs.clone(), 0.5), (obs.clone(), 0.5)]).unwrap();
    assert!((twice.cov - sem.moments().cov).abs().max() < 1e-12);
    assert!(pooled_population_moments(&sem, &[]).is_err());
    assert!(pooled_population_moments(&sem, &[(obs.clone(), 0.3)]).is_err());
    assert!(pooled_population_moments(&sem, &[(obs, -1.0), (hard, 2.0)]).is_err());
}

#[test]
fn chain_pooled_correlation_with_centred_intervention() {
    // With a zero-mean unit-variance hard intervention the pooled and observational
    // distributions coincide, so the pooled correlation is the observational one.
    let sem = chain(1.8, 0.9);
    let m = equal_pooled_moments(
        &sem,
        &[ContextSpec::observational("obs"), ContextSpec::intervention("s", Intervention::hard(0, 0.0, 1.0))],
    )
    .unwrap();
    let expected = 1.62 / 4.4344f64.sqrt();
    assert!((m.correlation(0, 2) - expected).abs() < 1e-12);
    assert!((expected - 0.769_303_275_840_089_8).abs() < 1e-15);
}

#[test]
fn sampling_is_deterministic() {
    let sem = chain(1.8, 0.9);
    let ctx = ContextSpec::intervention("s", Intervention::hard(0, 1.0, 0.09));
    let a = sample(&sem, &ctx, 50, 11).unwrap();
    let b = sample(&sem, &ctx, 50, 11).unwrap();
    assert_eq!(a, b);
    let c = sample(&sem, &ctx, 50, 12).unwrap();
    assert_ne!(a.values(), c.values());
    assert!(sample(&sem, &ctx, 0, 1).is_err());
}

#[test]
fn simulate_uses_separate_streams() {
    let sem = chain(1.8, 0.9);
    let obs = ContextSpec::observational("obs");
    let obs2 = ContextSpec::observational("again");
    let ds = simulate(&sem, &[obs, obs2], 20, 5).unwrap();
    assert_eq!(ds.n(), 40);
    assert_ne!(ds.value(0, 0), ds.value(20, 0));
    assert_eq!(ds.context_id_of_row(25), "again");
}

fn mean_var(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    (m, x.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (n - 1.0))
}

#[test]
fn standard_normal_columns() {
    let sem = LinearSem::with_coefficients(Dag::with_default_labels(3, []).unwrap(), |_, _| 0.0).unwrap();
    let ds = sample(&sem, &ContextSpec::observational("obs"), 100_000, 3).unwrap();
    for j in 0..3 {
        let (m, v) = mean_var(ds.column(j));
        assert!(m.abs() < 0.02, "mean {m}");
        assert!((v - 1.0).abs() < 0.05, "var {v}");
    }
}

#[test]
fn hard_intervention_variance_in_sample() {
    let sem = chain(1.8, 0.9);
    let ctx = ContextSpec::intervention("s", Intervention::hard(0, 1.0, 0.09));
    let ds = sample(&sem, &ctx, 20_000, 4).unwrap();
    let (m, v) = mean_var(ds.column(0));
    assert!((m - 1.0).abs() < 0.01);
    assert!((v - 0.09).abs() < 0.005);
}

#[test]
fn moment_check_hard_formula() {
    // u -> s, s -> t, u -> t with common noise variance
    let (bsu, bts, btu, sigma2, mw, vw) = (0.8, 1.3, -0.6, 1.7, 2.0, 0.4);
    let sem = LinearSem::from_edges(&["u", "s", "t"], &[("u", "s", bsu), ("s", "t", bts), ("u", "t", btu)])
        .unwrap()
        .with_noise_var(DVector::from_element(3, sigma2))
        .unwrap();
    let r = intervention_moment_check(&sem, &Intervention::hard(1, mw, vw)).unwrap();
    assert!((r.intervened[2].mean - bts * mw).abs() < 1e-12);
    assert!((r.intervened[2].var - (bts * bts * vw + (1.0 + btu * btu) * sigma2)).abs() < 1e-12);
    assert_eq!(r.observational[2].mean, 0.0);

    let soft = intervention_moment_check(&sem, &Intervention::soft(1, mw, vw)).unwrap();
    assert!((soft.intervened[2].mean - bts * mw).abs() < 1e-12);
    let obs_var = (bts * bsu + btu).powi(2) * sigma2 + bts * bts * sigma2 + sigma2;
    assert!((soft.observational[2].var - obs_var).abs() < 1e-12);
    assert!((soft.intervened[2].var - (bts * bts * vw + obs_var)).abs() < 1e-12);
}

#[test]
fn replicating_intervention_on_root_changes_nothing() {
    let sem = chain(1.8, 0.9);
    let r = intervention_moment_check(&sem, &Intervention::hard(0, 0.0, 1.0)).unwrap();
    assert_eq!(r.observational, r.intervened);
}

#[test]
fn log_density_matches_factorisation() {
    let sem = fig3a(0.7, -1.2, 0.5).with_noise_var(DVector::from_vec(vec![1.0, 0.5, 2.0, 0.8])).unwrap();
    let sem = sem.with_noise_mean(DVector::from_vec(vec![0.3, -1.0, 0.0, 2.0])).unwrap();
    let m = sem.moments();
    let mut rng = stream_rng(9, 0);
    for _ in 0..100 {
        let x = DVector::from_fn(4, |_, _| {
            let z: f64 = StandardNormal.sample(&mut rng);
            2.0 * z
        });
        let joint = m.log_density(&x).unwrap();
        assert!((joint - sem.factorized_log_density(&x)).abs() < 1e-8);
    }
}

#[test]
fn hard_intervention_isolates_from_non_descendants() {
    let mut rng = stream_rng(21, 0);
    for _ in 0..30 {
        let dag = Dag::random(6, 0.5, &mut rng);
        let sem = LinearSem::with_coefficients(dag, |s, t| 0.3 + 0.1 * (s + t) as f64).unwrap();
        for s in 0..6 {
            let m = population_moments(&sem, &ContextSpec::intervention("x", Intervention::hard(s, 0.5, 2.0)))
                .unwrap();
            let desc: NodeSet = sem.dag().descendants(s).unwrap();
            for v in (0..6).filter(|&v| !desc.contains(v)) {
                assert_eq!(m.covariance(s, v), 0.0);
            }
        }
    }
}

#[test]
fn sample_covariance_within_five_standard_errors() {
    let sem = fig3a(1.0, 1.8, 0.9);
    for ctx in [
        ContextSpec::observational("obs"),
        ContextSpec::intervention("s", Intervention::soft(1, 1.0, 0.5)),
    ] {
        let m = population_moments(&sem, &ctx).unwrap();
        let n = 100_000;
        let ds = sample(&sem, &ctx, n, 8).unwrap();
        for i in 0..4 {
            for j in i..4 {
                let (xi, xj) = (ds.column(i), ds.column(j));
                let (mi, _) = mean_var(xi);
                let (mj, _) = mean_var(xj);
                let c = xi.iter().zip(xj).map(|(a, b)| (a - mi) * (b - mj)).sum::<f64>() / (n as f64 - 1.0);
                let se = ((m.cov[(i, i)] * m.cov[(j, j)] + m.cov[(i, j)].powi(2)) / n as f64).sqrt();
                assert!((c - m.cov[(i, j)]).abs() < 5.0 * se, "entry ({i},{j}): {c} vs {}", m.cov[(i, j)]);
            }
        }
    }
}

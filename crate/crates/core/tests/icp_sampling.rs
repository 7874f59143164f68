use perturb_icp::bench::{chain_sem, contexts_on, hard_everywhere};
use perturb_icp::graph::NodeSet;
use perturb_icp::icp::{icp_graph, icp_target, IcpConfig};
use perturb_icp::sem::{simulate, InterventionKind};
use perturb_icp::LinearSem;

const SEEDS: u64 = 100;

#[test]
fn chain_target_estimate() {
    let sem = chain_sem();
    let ctxs = contexts_on(&sem, &[0, 1], InterventionKind::Hard, 1.0, 1.0);
    let cfg = IcpConfig::default();
    let hits = (0..SEEDS)
        .filter(|&seed| {
            let ds = simulate(&sem, &ctxs, 2000, seed).unwrap();
            icp_target(&ds, 2, &cfg).unwrap().estimate == NodeSet::singleton(1)
        })
        .count();
    println!("chain target t estimate {{u}}: {hits}/{SEEDS}");
    assert!(hits >= 90);
}

#[test]
fn chain_graph_recovery() {
    let sem = chain_sem();
    let ctxs = hard_everywhere(&sem);
    let cfg = IcpConfig::default();
    let hits = (0..SEEDS)
        .filter(|&seed| {
            let ds = simulate(&sem, &ctxs, 2000, seed).unwrap();
            icp_graph(&ds, &cfg).unwrap().edges == vec![[0, 1], [1, 2]]
        })
        .count();
    println!("chain graph exact: {hits}/{SEEDS}");
    assert!(hits >= 85);
}

#[test]
fn edgeless_false_positive_rate() {
    let sem = LinearSem::from_edges(&["a", "b", "c"], &[]).unwrap();
    let ctxs = hard_everywhere(&sem);
    let cfg = IcpConfig::default();
    let mut false_edges = 0;
    for seed in 0..SEEDS {
        let ds = simulate(&sem, &ctxs, 500, seed).unwrap();
        false_edges += icp_graph(&ds, &cfg).unwrap().edges.len();
    }
    let rate = false_edges as f64 / (SEEDS as f64 * 6.0);
    println!("edgeless per-edge false positive rate: {rate}");
    assert!(rate <= cfg.alpha + 0.02);
}

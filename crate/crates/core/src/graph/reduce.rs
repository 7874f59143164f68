use super::Dag;

impl Dag {
    /// Aho–Garey–Ullman transitive reduction: the unique minimal DAG with the
    /// same reachability relation. Edge `s -> t` survives iff `t` is not
    /// reachable from any other child of `s`.
    pub fn transitive_reduction_aho(&self) -> Dag {
        let reach = self.reachability();
        let kept = self.edges().filter(|&(s, t)| {
            !self
                .successors(s)
                .iter()
                .any(|&c| c != t && reach[c][t])
        });
        Dag::new(self.labels().to_vec(), kept).expect("subgraph of a DAG is a DAG")
    }
}

use std::collections::VecDeque;

use super::{Dag, NodeSet};
use crate::error::{Error, Result};

impl Dag {
    /// d-separation of `a` and `b` given `c`, via the moralized ancestral graph:
    /// restrict to the ancestors of `a ∪ b ∪ c`, marry parents, drop
    /// directions, delete `c`, and check whether `a` still reaches `b`.
    pub fn d_separated(&self, a: &NodeSet, b: &NodeSet, c: &NodeSet) -> Result<bool> {
        for set in [a, b, c] {
            if let Some(m) = set.max() {
                self.check_node(m)?;
            }
        }
        if !a.is_disjoint(b) || !a.is_disjoint(c) || !b.is_disjoint(c) {
            return Err(Error::OverlappingSets);
        }
        if a.is_empty() || b.is_empty() {
            return Ok(true);
        }

        let p = self.p();
        let anc = self.ancestors_of_set(&a.union(b).union(c))?;
        let mut in_anc = vec![false; p];
        for n in anc.iter() {
            in_anc[n] = true;
        }

        let mut adj = vec![Vec::new(); p];
        for t in anc.iter() {
            let pa = self.predecessors(t);
            for &s in pa {
                adj[s].push(t);
                adj[t].push(s);
            }
            for (i, &x) in pa.iter().enumerate() {
                for &y in &pa[i + 1..] {
                    adj[x].push(y);
                    adj[y].push(x);
                }
            }
        }

        let mut seen = vec![false; p];
        let mut queue = VecDeque::new();
        for n in a.iter() {
            seen[n] = true;
            queue.push_back(n);
        }
        while let Some(n) = queue.pop_front() {
            if b.contains(n) {
                return Ok(false);
            }
            for &m in &adj[n] {
                if in_anc[m] && !seen[m] && !c.contains(m) {
                    seen[m] = true;
                    queue.push_back(m);
                }
            }
        }
        Ok(true)
    }
}

#[cfg(test)]
mod tests {
    use crate::graph::{Dag, NodeSet};

    fn s(n: usize) -> NodeSet {
        NodeSet::singleton(n)
    }

    #[test]
    fn chain_and_collider() {
        let chain = Dag::from_labels(&["s", "u", "t"], &[("s", "u"), ("u", "t")]).unwrap();
        assert!(chain.d_separated(&s(0), &s(2), &s(1)).unwrap());
        assert!(!chain.d_separated(&s(0), &s(2), &NodeSet::empty()).unwrap());

        let collider = Dag::from_labels(&["s", "u", "t"], &[("s", "u"), ("t", "u")]).unwrap();
        assert!(collider.d_separated(&s(0), &s(2), &NodeSet::empty()).unwrap());
        assert!(!collider.d_separated(&s(0), &s(2), &s(1)).unwrap());
    }

    #[test]
    fn figure_3a_chain() {
        let g = Dag::from_labels(&["v", "s", "u", "t"], &[("v", "s"), ("s", "u"), ("u", "t")]).unwrap();
        assert!(g.d_separated(&s(0), &s(3), &s(1)).unwrap());
        assert!(g.d_separated(&s(1), &s(3), &s(2)).unwrap());
        assert!(!g.d_separated(&s(0), &s(3), &NodeSet::empty()).unwrap());
    }

    #[test]
    fn descendant_of_collider_opens_path() {
        let g = Dag::with_default_labels(4, [(0, 1), (2, 1), (1, 3)]).unwrap();
        assert!(g.d_separated(&s(0), &s(2), &NodeSet::empty()).unwrap());
        assert!(!g.d_separated(&s(0), &s(2), &s(3)).unwrap());
    }

    #[test]
    fn overlapping_sets_rejected() {
        let g = Dag::with_default_labels(3, [(0, 1)]).unwrap();
        assert!(g.d_separated(&s(0), &s(0), &NodeSet::empty()).is_err());
        assert!(g.d_separated(&s(0), &s(1), &s(1)).is_err());
    }
}

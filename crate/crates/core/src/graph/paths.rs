use super::{DiGraph, Node};
use crate::error::{Error, Result};

/// Hard limit on enumerated paths.
pub const PATH_CAP: usize = 1_000_000;

impl DiGraph {
    /// Every simple directed path from `s` to `t`, as node sequences in
    /// lexicographic order. Errors once more than [`PATH_CAP`] paths exist.
    pub fn directed_paths(&self, s: Node, t: Node) -> Result<Vec<Vec<Node>>> {
        self.directed_paths_capped(s, t, PATH_CAP)
    }

    pub fn directed_paths_capped(&self, s: Node, t: Node, cap: usize) -> Result<Vec<Vec<Node>>> {
        self.paths_filtered(s, t, cap, |_, _| true)
    }

    /// Paths from `s` to `t` of length at least two, i.e. excluding the direct edge.
    pub fn alternative_paths(&self, s: Node, t: Node, cap: usize) -> Result<Vec<Vec<Node>>> {
        self.paths_filtered(s, t, cap, |a, b| !(a == s && b == t))
    }

    fn paths_filtered(
        &self,
        s: Node,
        t: Node,
        cap: usize,
        allow: impl Fn(Node, Node) -> bool,
    ) -> Result<Vec<Vec<Node>>> {
        self.check_node(s)?;
        self.check_node(t)?;
        if s == t {
            return Err(Error::InvalidArgument("path endpoints must differ".into()));
        }
        let can_reach = {
            let mut v = vec![false; self.p()];
            for n in self.reaching(t)?.iter() {
                v[n] = true;
            }
            v
        };
        if !can_reach[s] {
            return Ok(Vec::new());
        }

        // Successor lists are sorted, so depth-first order is lexicographic;
        // no path is a prefix of another because `t` only appears last.
        let mut out = Vec::new();
        let mut on_path = vec![false; self.p()];
        let mut path = vec![s];
        let mut cursor = vec![0usize];
        on_path[s] = true;
        while let Some(&node) = path.last() {
            let depth = path.len() - 1;
            let succ = self.successors(node);
            let mut advanced = false;
            while cursor[depth] < succ.len() {
                let next = succ[cursor[depth]];
                cursor[depth] += 1;
                if on_path[next] || !can_reach[next] || !allow(node, next) {
                    continue;
                }
                if next == t {
                    if out.len() == cap {
                        return Err(Error::PathCapExceeded { cap });
                    }
                    let mut found = path.clone();
                    found.push(t);
                    out.push(found);
                    continue;
                }
                on_path[next] = true;
                path.push(next);
                cursor.push(0);
                advanced = true;
                break;
            }
            if !advanced {
                on_path[node] = false;
                path.pop();
                cursor.pop();
            }
        }
        Ok(out)
    }
}

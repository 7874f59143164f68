//! Helpers shared by integration tests.
#![allow(dead_code)]

use perturb_icp::graph::{Dag, Node, NodeSet};

/// d-separation by enumerating every simple path in the skeleton and checking
/// whether `given` blocks it.
pub fn d_separated_brute(dag: &Dag, a: Node, b: Node, given: &NodeSet) -> bool {
    let p = dag.p();
    let adjacent = |x: Node, y: Node| dag.has_edge(x, y) || dag.has_edge(y, x);
    let desc: Vec<NodeSet> = (0..p).map(|n| dag.descendants(n).unwrap()).collect();
    let blocked = |path: &[Node]| {
        path.windows(3).any(|w| {
            let (x, m, y) = (w[0], w[1], w[2]);
            let collider = dag.has_edge(x, m) && dag.has_edge(y, m);
            if collider {
                !desc[m].iter().any(|d| given.contains(d))
            } else {
                given.contains(m)
            }
        })
    };
    fn walk(
        cur: Node,
        b: Node,
        p: usize,
        path: &mut Vec<Node>,
        adjacent: &dyn Fn(Node, Node) -> bool,
        blocked: &dyn Fn(&[Node]) -> bool,
    ) -> bool {
        if cur == b {
            return !blocked(path);
        }
        for next in 0..p {
            if adjacent(cur, next) && !path.contains(&next) {
                path.push(next);
                let open = walk(next, b, p, path, adjacent, blocked);
                path.pop();
                if open {
                    return true;
                }
            }
        }
        false
    }
    let mut path = vec![a];
    !walk(a, b, p, &mut path, &adjacent, &blocked)
}

//! Small named graphs used as fixtures and reference instances.

use super::Graph;

pub fn cycle(n: usize) -> Graph {
    assert!(n >= 3, "a cycle needs at least 3 vertices");
    Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).expect("cycle is simple")
}

pub fn path(n: usize) -> Graph {
    Graph::from_edges(n, (1..n).map(|i| (i - 1, i))).expect("path is simple")
}

pub fn complete(n: usize) -> Graph {
    let edges = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v)));
    Graph::from_edges(n, edges).expect("complete graph is simple")
}

/// K_{a,b} with the `a` side first.
pub fn complete_bipartite(a: usize, b: usize) -> Graph {
    let edges = (0..a).flat_map(|u| (0..b).map(move |v| (u, a + v)));
    Graph::from_edges(a + b, edges).expect("complete bipartite graph is simple")
}

/// Star with center 0 and `leaves` leaves.
pub fn star(leaves: usize) -> Graph {
    Graph::from_edges(leaves + 1, (1..=leaves).map(|v| (0, v))).expect("star is simple")
}

/// Outer 5-cycle 0..5, inner pentagram 5..10, spokes i -- i+5.
pub fn petersen() -> Graph {
    let outer = (0..5).map(|i| (i, (i + 1) % 5));
    let inner = (0..5).map(|i| (5 + i, 5 + (i + 2) % 5));
    let spokes = (0..5).map(|i| (i, i + 5));
    Graph::from_edges(10, outer.chain(inner).chain(spokes)).expect("Petersen graph is simple")
}

/// Complete `arity`-ary rooted tree of the given depth (root 0).
pub fn complete_tree(arity: usize, depth: usize) -> Graph {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut n = 1;
    for _ in 0..depth {
        let mut next = Vec::new();
        for &p in &frontier {
            for _ in 0..arity {
                edges.push((p, n));
                next.push(n);
                n += 1;
            }
        }
        frontier = next;
    }
    Graph::from_edges(n, edges).expect("tree is simple")
}

use std::cmp::Ordering;
use std::collections::VecDeque;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering as AtomicOrdering};

use serde::{Deserialize, Serialize};

use super::{Graph, VertexSet};
use crate::par::{self, Execution};

/// Length of a shortest cycle; forests have infinite girth.
///
/// Serializes as a number, or `null` for [`Girth::Infinite`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(from = "Option<usize>", into = "Option<usize>")]
pub enum Girth {
    Finite(usize),
    Infinite,
}

impl Girth {
    pub fn finite(self) -> Option<usize> {
        match self {
            Girth::Finite(g) => Some(g),
            Girth::Infinite => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        self == Girth::Infinite
    }

    /// Lossy conversion for bound arithmetic (`inf` for forests).
    pub fn as_f64(self) -> f64 {
        self.finite().map_or(f64::INFINITY, |g| g as f64)
    }
}

impl From<Option<usize>> for Girth {
    fn from(v: Option<usize>) -> Self {
        v.map_or(Girth::Infinite, Girth::Finite)
    }
}

impl From<Girth> for Option<usize> {
    fn from(g: Girth) -> Self {
        g.finite()
    }
}

impl Ord for Girth {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Girth::Finite(a), Girth::Finite(b)) => a.cmp(b),
            (Girth::Finite(_), Girth::Infinite) => Ordering::Less,
            (Girth::Infinite, Girth::Finite(_)) => Ordering::Greater,
            (Girth::Infinite, Girth::Infinite) => Ordering::Equal,
        }
    }
}

impl PartialOrd for Girth {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Girth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Girth::Finite(g) => write!(f, "{g}"),
            Girth::Infinite => f.write_str("inf"),
        }
    }
}

const UNSEEN: u32 = u32::MAX;

/// BFS buffers reused across roots; only touched entries are reset.
struct BfsScratch {
    dist: Vec<u32>,
    parent: Vec<usize>,
    touched: Vec<usize>,
    queue: VecDeque<usize>,
}

impl BfsScratch {
    fn new(n: usize) -> Self {
        BfsScratch {
            dist: vec![UNSEEN; n],
            parent: vec![usize::MAX; n],
            touched: Vec::new(),
            queue: VecDeque::new(),
        }
    }

    fn reset(&mut self) {
        for &v in &self.touched {
            self.dist[v] = UNSEEN;
            self.parent[v] = usize::MAX;
        }
        self.touched.clear();
        self.queue.clear();
    }

    fn visit(&mut self, v: usize, d: u32, parent: usize) {
        self.dist[v] = d;
        self.parent[v] = parent;
        self.touched.push(v);
        self.queue.push_back(v);
    }
}

/// Shortest cycle seen by a BFS from `root`, ignoring cycles of length
/// `>= bound`. The minimum over all roots is the girth.
fn shortest_cycle_from(g: &Graph, root: usize, bound: usize, s: &mut BfsScratch) -> usize {
    s.reset();
    s.visit(root, 0, usize::MAX);
    let mut best = bound;
    while let Some(u) = s.queue.pop_front() {
        let du = s.dist[u] as usize;
        if 2 * du + 1 >= best {
            break;
        }
        for &w in g.neighbors(u) {
            if s.dist[w] == UNSEEN {
                s.visit(w, du as u32 + 1, u);
            } else if w != s.parent[u] {
                best = best.min(du + s.dist[w] as usize + 1);
            }
        }
    }
    best
}

/// Girth by one pruned BFS per vertex, O(n·m) worst case.
pub fn girth(g: &Graph) -> Girth {
    girth_with(g, Execution::default())
}

pub fn girth_with(g: &Graph, exec: Execution) -> Girth {
    let n = g.n();
    let best = AtomicUsize::new(usize::MAX);
    par::map_indices_with(
        exec,
        n,
        || BfsScratch::new(n),
        |scratch, root| {
            if g.degree(root) < 2 {
                return;
            }
            let bound = best.load(AtomicOrdering::Relaxed);
            let c = shortest_cycle_from(g, root, bound, scratch);
            best.fetch_min(c, AtomicOrdering::Relaxed);
        },
    );
    match best.into_inner() {
        usize::MAX => Girth::Infinite,
        c => Girth::Finite(c),
    }
}

/// Length of a shortest cycle through edge {u, v}, if one of length at most
/// `max_len` exists.
pub fn shortest_cycle_through_edge(g: &Graph, u: usize, v: usize, max_len: usize) -> Option<usize> {
    debug_assert!(g.has_edge(u, v));
    if max_len < 3 {
        return None;
    }
    // BFS from u without the edge u-v; first arrival at v closes the cycle.
    let mut dist = std::collections::HashMap::new();
    dist.insert(u, 0usize);
    let mut queue = VecDeque::from([u]);
    while let Some(x) = queue.pop_front() {
        let dx = dist[&x];
        if dx + 1 >= max_len {
            break;
        }
        for &y in g.neighbors(x) {
            if x == u && y == v {
                continue;
            }
            if y == v {
                return Some(dx + 2);
            }
            if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(y) {
                e.insert(dx + 1);
                queue.push_back(y);
            }
        }
    }
    None
}

/// Multi-source BFS distances (`None` = unreachable).
pub fn bfs_distances(g: &Graph, sources: &[usize]) -> Vec<Option<usize>> {
    let mut dist = vec![None; g.n()];
    let mut queue = VecDeque::new();
    for &s in sources {
        if dist[s].is_none() {
            dist[s] = Some(0);
            queue.push_back(s);
        }
    }
    while let Some(u) = queue.pop_front() {
        let du = dist[u].expect("queued vertices have a distance");
        for &w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(du + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Vertices of the 2-core: what remains after repeatedly deleting vertices
/// of degree at most 1.
pub fn two_core(g: &Graph) -> VertexSet {
    let mut deg: Vec<usize> = g.degrees().collect();
    let mut alive = vec![true; g.n()];
    let mut stack: Vec<usize> = (0..g.n()).filter(|&v| deg[v] <= 1).collect();
    while let Some(v) = stack.pop() {
        if !alive[v] {
            continue;
        }
        alive[v] = false;
        for &w in g.neighbors(v) {
            if alive[w] {
                deg[w] -= 1;
                if deg[w] == 1 {
                    stack.push(w);
                }
            }
        }
    }
    VertexSet::from_mask(&alive)
}

pub fn component_count(g: &Graph) -> usize {
    let mut seen = vec![false; g.n()];
    let mut stack = Vec::new();
    let mut count = 0;
    for root in 0..g.n() {
        if seen[root] {
            continue;
        }
        count += 1;
        seen[root] = true;
        stack.push(root);
        while let Some(u) = stack.pop() {
            for &w in g.neighbors(u) {
                if !seen[w] {
                    seen[w] = true;
                    stack.push(w);
                }
            }
        }
    }
    count
}

/// Vertices grouped by exact distance from a base set: `layers[i]` is the set
/// at distance `i`. Trailing empty layers are dropped.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerDecomposition {
    pub layers: Vec<VertexSet>,
}

impl LayerDecomposition {
    pub fn depth(&self) -> usize {
        self.layers.len().saturating_sub(1)
    }

    pub fn layer(&self, i: usize) -> Option<&VertexSet> {
        self.layers.get(i)
    }

    /// Union of all layers, i.e. the ball of radius `depth()`.
    pub fn ball(&self) -> VertexSet {
        let host_n = self.layers.first().map_or(0, VertexSet::host_n);
        let mut all: Vec<usize> = self.layers.iter().flat_map(|l| l.iter()).collect();
        all.sort_unstable();
        VertexSet::from_sorted_unchecked(host_n, all)
    }

    /// Per-vertex layer index for vertices in the ball.
    pub fn layer_of(&self) -> Vec<Option<usize>> {
        let host_n = self.layers.first().map_or(0, VertexSet::host_n);
        let mut out = vec![None; host_n];
        for (i, l) in self.layers.iter().enumerate() {
            for v in l {
                out[v] = Some(i);
            }
        }
        out
    }
}

/// Layers `0..=h_max` around `base` by multi-source BFS.
pub fn distance_layers(g: &Graph, base: &VertexSet, h_max: usize) -> LayerDecomposition {
    assert!(!base.is_empty(), "distance layers need a nonempty base set");
    let mut dist: Vec<Option<usize>> = vec![None; g.n()];
    let mut layers = vec![base.clone()];
    for v in base {
        dist[v] = Some(0);
    }
    for h in 1..=h_max {
        let mut next = Vec::new();
        for u in layers[h - 1].iter() {
            for &w in g.neighbors(u) {
                if dist[w].is_none() {
                    dist[w] = Some(h);
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        next.sort_unstable();
        layers.push(VertexSet::from_sorted_unchecked(g.n(), next));
    }
    LayerDecomposition { layers }
}

/// Γ(S): every vertex adjacent to some member of `s` (may include members).
pub fn neighborhood(g: &Graph, s: &VertexSet) -> VertexSet {
    let mut mask = vec![false; g.n()];
    for u in s {
        for &w in g.neighbors(u) {
            mask[w] = true;
        }
    }
    VertexSet::from_mask(&mask)
}

/// True iff `side_a`/`side_b` partition the vertices, every edge crosses,
/// and degrees are exactly `deg_a` on side A and `deg_b` on side B.
pub fn is_biregular(
    g: &Graph,
    side_a: &VertexSet,
    side_b: &VertexSet,
    deg_a: usize,
    deg_b: usize,
) -> bool {
    if side_a.len() + side_b.len() != g.n() || !side_a.is_disjoint(side_b) {
        return false;
    }
    let in_a = side_a.to_mask();
    let crosses = |u: usize| g.neighbors(u).iter().all(|&w| in_a[w] != in_a[u]);
    side_a.iter().all(|u| g.degree(u) == deg_a && crosses(u))
        && side_b.iter().all(|u| g.degree(u) == deg_b && crosses(u))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, complete_bipartite, complete_tree, cycle, path, petersen};

    /// Exhaustive shortest cycle: for every edge, shortest u-v path avoiding it.
    fn girth_by_edge_removal(g: &Graph) -> Girth {
        g.edges()
            .filter_map(|(u, v)| shortest_cycle_through_edge(g, u, v, usize::MAX))
            .min()
            .into()
    }

    #[test]
    fn girth_examples() {
        assert_eq!(girth(&cycle(5)), Girth::Finite(5));
        assert_eq!(girth(&complete_tree(3, 4)), Girth::Infinite);
        assert_eq!(girth(&path(7)), Girth::Infinite);
        assert_eq!(girth(&petersen()), Girth::Finite(5));
        assert_eq!(girth(&complete(4)), Girth::Finite(3));
        assert_eq!(girth(&complete_bipartite(3, 3)), Girth::Finite(4));
        assert_eq!(girth_by_edge_removal(&petersen()), Girth::Finite(5));
    }

    #[test]
    fn girth_strategies_agree() {
        for n in 3..12 {
            let g = cycle(n);
            assert_eq!(girth_with(&g, Execution::Sequential), girth_with(&g, Execution::Parallel));
        }
    }

    #[test]
    fn girth_orders_and_serializes() {
        assert!(Girth::Finite(100) < Girth::Infinite);
        assert_eq!(serde_json::to_string(&Girth::Infinite).unwrap(), "null");
        assert_eq!(serde_json::from_str::<Girth>("7").unwrap(), Girth::Finite(7));
    }

    #[test]
    fn layers_on_path_and_petersen() {
        let g = path(3);
        let layers = distance_layers(&g, &VertexSet::singleton(3, 0).unwrap(), 2);
        let sizes: Vec<_> = layers.layers.iter().map(|l| l.as_slice().to_vec()).collect();
        assert_eq!(sizes, vec![vec![0], vec![1], vec![2]]);

        let all = distance_layers(&g, &VertexSet::full(3), 4);
        assert_eq!(all.layers.len(), 1);

        let p = petersen();
        let l = distance_layers(&p, &VertexSet::singleton(10, 0).unwrap(), 2);
        assert_eq!(l.layers.iter().map(VertexSet::len).collect::<Vec<_>>(), vec![1, 3, 6]);
        assert_eq!(l.ball().len(), 10);
    }

    #[test]
    fn neighborhood_examples() {
        let c = cycle(5);
        let s = VertexSet::singleton(5, 0).unwrap();
        assert_eq!(neighborhood(&c, &s).as_slice(), &[1, 4]);
        assert_eq!(neighborhood(&c, &VertexSet::full(5)), VertexSet::full(5));
    }

    #[test]
    fn biregular_examples() {
        let k = complete_bipartite(2, 3);
        let a = VertexSet::range(5, 0..2);
        let b = VertexSet::range(5, 2..5);
        assert!(is_biregular(&k, &a, &b, 3, 2));
        assert!(!is_biregular(&k, &a, &b, 2, 3));
        assert!(!is_biregular(&k, &a, &VertexSet::range(5, 2..4), 3, 2));
    }
}

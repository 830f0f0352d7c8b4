//! Simple undirected graphs and the traversal primitives every other module
//! builds on.
//!
//! A [`Graph`] is stored in compressed-row form with strictly increasing
//! neighbor lists, so it is simple (no loops, no parallel edges) and symmetric
//! by construction. Graphs never change after they are built; constructions
//! that need to rewire edges work on plain adjacency lists and convert at the
//! end.

mod families;
mod io;
mod traversal;
mod vertex_set;

pub use families::*;
pub use io::{read_edge_list, write_edge_list};
pub use traversal::{
    bfs_distances, component_count, distance_layers, girth, girth_with, is_biregular, neighborhood,
    shortest_cycle_through_edge, two_core, Girth, LayerDecomposition,
};
pub use vertex_set::VertexSet;

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GraphError {
    #[error("self-loop at vertex {0}")]
    SelfLoop(usize),
    #[error("duplicate edge {{{0}, {1}}}")]
    DuplicateEdge(usize, usize),
    #[error("vertex {vertex} out of range for a graph on {n} vertices")]
    VertexOutOfRange { vertex: usize, n: usize },
    #[error("adjacency is not symmetric: {0} lists {1} but not vice versa")]
    Asymmetric(usize, usize),
    #[error("edge-list parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("edge list declares {declared} edges but contains {found}")]
    EdgeCount { declared: usize, found: usize },
    #[error("i/o error: {0}")]
    Io(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Graph {
    offsets: Vec<usize>,
    targets: Vec<usize>,
}

impl Graph {
    /// Builds a graph on `n` vertices from undirected edges. Loops, repeated
    /// edges (in either orientation) and out-of-range endpoints are rejected.
    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: w, n });
                }
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                let (a, b) = (u.min(w[0]), u.max(w[0]));
                return Err(GraphError::DuplicateEdge(a, b));
            }
        }
        Ok(Self::from_sorted_lists(adj))
    }

    /// Builds a graph from per-vertex neighbor lists, checking simplicity and
    /// symmetry.
    pub fn from_adjacency(mut adj: Vec<Vec<usize>>) -> Result<Self, GraphError> {
        let n = adj.len();
        for (u, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            for (i, &v) in list.iter().enumerate() {
                if v >= n {
                    return Err(GraphError::VertexOutOfRange { vertex: v, n });
                }
                if v == u {
                    return Err(GraphError::SelfLoop(u));
                }
                if i > 0 && list[i - 1] == v {
                    return Err(GraphError::DuplicateEdge(u.min(v), u.max(v)));
                }
            }
        }
        for (u, list) in adj.iter().enumerate() {
            for &v in list {
                if adj[v].binary_search(&u).is_err() {
                    return Err(GraphError::Asymmetric(u, v));
                }
            }
        }
        Ok(Self::from_sorted_lists(adj))
    }

    fn from_sorted_lists(adj: Vec<Vec<usize>>) -> Self {
        let mut offsets = Vec::with_capacity(adj.len() + 1);
        offsets.push(0);
        let mut targets = Vec::with_capacity(adj.iter().map(Vec::len).sum());
        for list in adj {
            targets.extend_from_slice(&list);
            offsets.push(targets.len());
        }
        Graph { offsets, targets }
    }

    pub fn empty(n: usize) -> Self {
        Graph { offsets: vec![0; n + 1], targets: Vec::new() }
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.offsets.len() - 1
    }

    #[inline]
    pub fn m(&self) -> usize {
        self.targets.len() / 2
    }

    #[inline]
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    #[inline]
    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u < self.n() && v < self.n() && self.neighbors(u).binary_search(&v).is_ok()
    }

    /// Position of `v` in `u`'s neighbor list, i.e. the directed edge (u, v)
    /// as an offset into the row storage.
    pub(crate) fn arc_index(&self, u: usize, v: usize) -> Option<usize> {
        self.neighbors(u).binary_search(&v).ok().map(|i| self.offsets[u] + i)
    }

    pub(crate) fn row_start(&self, v: usize) -> usize {
        self.offsets[v]
    }

    pub(crate) fn arc_targets(&self) -> &[usize] {
        &self.targets
    }

    /// Undirected edges as `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n()).flat_map(move |u| {
            self.neighbors(u).iter().copied().filter(move |&v| v > u).map(move |v| (u, v))
        })
    }

    pub fn degrees(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.n()).map(move |v| self.degree(v))
    }

    /// `Some(d)` when every vertex has degree `d`.
    pub fn regular_degree(&self) -> Option<usize> {
        let mut degs = self.degrees();
        let d = degs.next()?;
        degs.all(|x| x == d).then_some(d)
    }

    pub fn average_degree(&self) -> f64 {
        if self.n() == 0 {
            0.0
        } else {
            2.0 * self.m() as f64 / self.n() as f64
        }
    }

    pub fn is_connected(&self) -> bool {
        if self.n() == 0 {
            return true;
        }
        bfs_distances(self, &[0]).iter().all(Option::is_some)
    }

    /// Mutable adjacency lists for builders.
    pub fn to_adjacency(&self) -> Vec<Vec<usize>> {
        (0..self.n()).map(|v| self.neighbors(v).to_vec()).collect()
    }

    /// Subgraph induced on `keep` (in the given order); returns the graph and
    /// the old index of each new vertex.
    pub fn induced_subgraph(&self, keep: &VertexSet) -> Graph {
        let mut new_index = vec![usize::MAX; self.n()];
        for (i, v) in keep.iter().enumerate() {
            new_index[v] = i;
        }
        let adj = keep
            .iter()
            .map(|v| {
                self.neighbors(v)
                    .iter()
                    .filter_map(|&w| (new_index[w] != usize::MAX).then_some(new_index[w]))
                    .collect()
            })
            .collect();
        Graph::from_sorted_lists(adj)
    }

    /// Disjoint union; vertices of `other` are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adj = self.to_adjacency();
        adj.extend((0..other.n()).map(|v| other.neighbors(v).iter().map(|w| w + shift).collect()));
        Graph::from_sorted_lists(adj)
    }
}

//! The planted gadget and its insertion into a host graph.
//!
//! H̃ is a (d-1)-regular graph on γ vertices with large girth. Subdividing it
//! gives the (2, d-1)-biregular graph H on U ∪ V, where U are the vertices of
//! H̃ and V its edges. H′ adds a pendant q_i to every u_i and d-2 pendants
//! r_{i,j} to every v_i, so U and V reach degree d while
//! |Γ(U)| = |V| + |Q| = γ(d+1)/2. The pendants are then wired into a host
//! from which a spaced matching has been removed.

mod high_girth;
mod matching;
mod pipeline;
mod splice;

pub use high_girth::{
    high_girth_regular, high_girth_regular_with, max_girth_regular, moore_max_girth,
    moore_min_order, HighGirthOutcome, SearchBudget,
};
pub use matching::{matching_min_distance, spaced_matching, SpacedMatching};
pub use pipeline::{construct_pipeline, construct_pipeline_with, Construction, ConstructionReport};
pub use splice::{splice, read_splice, write_splice, Splice, SpliceSidecar};

use thiserror::Error;

use crate::graph::{girth, is_biregular, Girth, Graph, GraphError, VertexSet};

#[derive(Debug, Error)]
pub enum GadgetError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("girth {target} is impossible for {degree}-regular graphs on {n} vertices (Moore limit {moore_max})")]
    InfeasibleTarget { n: usize, degree: usize, target: usize, moore_max: usize },
    #[error("k = γ(d-1)(2+(d-1)(d-2))/4 is not an integer for γ={gamma}, d={d}")]
    NonIntegral { gamma: usize, d: usize },
    #[error("host with {n} vertices cannot hold a spaced matching of size {k}")]
    HostTooSmall { n: usize, k: usize },
    #[error("γ={gamma} exceeds n^(1/3) for a host with {n} vertices")]
    GammaTooLarge { gamma: usize, n: usize },
    #[error("graph is not {expected}-regular")]
    NotRegular { expected: usize },
    #[error("sides do not form a ({deg_u}, {deg_v})-biregular graph")]
    NotBiregular { deg_u: usize, deg_v: usize },
    #[error("invalid matching: {0}")]
    BadMatching(String),
    #[error("spliced graph is not {d}-regular (vertex {vertex} has degree {degree})")]
    DegreeViolation { d: usize, vertex: usize, degree: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("i/o: {0}")]
    Io(String),
}

/// H′ with its four labelled parts. Vertices are numbered U, V, Q, R in that
/// order; `q_set[i]` hangs off `u_set[i]` and `r_set[i*(d-2)..(i+1)*(d-2)]`
/// hang off `v_set[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Gadget {
    pub graph: Graph,
    pub u_set: VertexSet,
    pub v_set: VertexSet,
    pub q_set: VertexSet,
    pub r_set: VertexSet,
    pub gamma: usize,
    pub d: usize,
    pub girth_h: Girth,
}

impl Gadget {
    /// The biregular part H, induced on U ∪ V.
    pub fn h_graph(&self) -> Graph {
        self.graph.induced_subgraph(&self.u_set.union(&self.v_set))
    }

    /// Q followed by R: the vertices that get wired into the host.
    pub fn pendants(&self) -> Vec<usize> {
        self.q_set.iter().chain(self.r_set.iter()).collect()
    }

    /// |Q ∪ R| = γ(2 + (d-1)(d-2))/2.
    pub fn pendant_count(&self) -> usize {
        self.q_set.len() + self.r_set.len()
    }
}

/// Incidence graph of `g`: vertex i of `g` stays i, edge j (in `edges()`
/// order) becomes vertex n + j.
pub fn subdivide(g: &Graph) -> (Graph, VertexSet, VertexSet) {
    let n = g.n();
    let total = n + g.m();
    let edges = g
        .edges()
        .enumerate()
        .flat_map(|(j, (a, b))| [(a, n + j), (b, n + j)]);
    let h = Graph::from_edges(total, edges).expect("incidence graph is simple");
    (h, VertexSet::range(total, 0..n), VertexSet::range(total, n..total))
}

/// Builds H′ from a (d-1, 2)-biregular `h`. The result is renumbered so U
/// comes first in `u_set` order, then V in `v_set` order, then Q and R.
pub fn attach_pendants(
    h: &Graph,
    u_set: &VertexSet,
    v_set: &VertexSet,
    d: usize,
) -> Result<Gadget, GadgetError> {
    if d < 3 {
        return Err(GadgetError::InvalidParams(format!("need d >= 3, got {d}")));
    }
    if !is_biregular(h, u_set, v_set, d - 1, 2) {
        return Err(GadgetError::NotBiregular { deg_u: d - 1, deg_v: 2 });
    }
    let gamma = u_set.len();
    let nv = v_set.len();
    let mut relabel = vec![usize::MAX; h.n()];
    for (i, u) in u_set.iter().enumerate() {
        relabel[u] = i;
    }
    for (i, v) in v_set.iter().enumerate() {
        relabel[v] = gamma + i;
    }
    let q0 = gamma + nv;
    let r0 = q0 + gamma;
    let nr = nv * (d - 2);
    let total = r0 + nr;
    let inner = h.edges().map(|(a, b)| (relabel[a], relabel[b]));
    let q_edges = (0..gamma).map(|i| (i, q0 + i));
    let r_edges = (0..nv).flat_map(|i| (0..d - 2).map(move |j| (gamma + i, r0 + i * (d - 2) + j)));
    let graph = Graph::from_edges(total, inner.chain(q_edges).chain(r_edges).collect::<Vec<_>>())?;
    let girth_h = girth(h);
    Ok(Gadget {
        graph,
        u_set: VertexSet::range(total, 0..gamma),
        v_set: VertexSet::range(total, gamma..q0),
        q_set: VertexSet::range(total, q0..r0),
        r_set: VertexSet::range(total, r0..total),
        gamma,
        d,
        girth_h,
    })
}

/// H′ from a (d-1)-regular graph.
pub fn gadget_from_regular(h_tilde: &Graph, d: usize) -> Result<Gadget, GadgetError> {
    if h_tilde.regular_degree() != Some(d - 1) {
        return Err(GadgetError::NotRegular { expected: d - 1 });
    }
    let (h, u, v) = subdivide(h_tilde);
    attach_pendants(&h, &u, &v, d)
}

/// k = γ(d-1)(2 + (d-1)(d-2))/4, the number of host edges to remove.
pub fn matching_size_k(gamma: usize, d: usize) -> Result<usize, GadgetError> {
    if d < 2 {
        return Err(GadgetError::InvalidParams(format!("need d >= 2, got {d}")));
    }
    let num = gamma * (d - 1) * (2 + (d - 1) * (d - 2));
    if !num.is_multiple_of(4) {
        return Err(GadgetError::NonIntegral { gamma, d });
    }
    Ok(num / 4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, neighborhood, petersen};
    use proptest::prelude::*;

    #[test]
    fn subdivision_examples() {
        let (h, u, v) = subdivide(&complete(4));
        assert_eq!((h.n(), u.len(), v.len()), (10, 4, 6));
        assert_eq!(girth(&h), Girth::Finite(6));
        assert!(is_biregular(&h, &u, &v, 3, 2));

        let (c10, _, _) = subdivide(&cycle(5));
        assert_eq!(c10.n(), 10);
        assert_eq!(c10.regular_degree(), Some(2));
        assert_eq!(girth(&c10), Girth::Finite(10));

        let (hp, u, v) = subdivide(&petersen());
        assert_eq!((u.len(), v.len()), (10, 15));
        assert_eq!(girth(&hp), Girth::Finite(10));
    }

    #[test]
    fn k4_gadget_matches_figure_sizes() {
        let g = gadget_from_regular(&complete(4), 4).unwrap();
        assert_eq!(g.graph.n(), 26);
        assert_eq!((g.u_set.len(), g.v_set.len(), g.q_set.len(), g.r_set.len()), (4, 6, 4, 12));
        let gamma_u = neighborhood(&g.graph, &g.u_set);
        assert_eq!(gamma_u, g.v_set.union(&g.q_set));
        assert_eq!(gamma_u.len() * 2, 5 * g.u_set.len());
        for v in g.u_set.iter().chain(g.v_set.iter()) {
            assert_eq!(g.graph.degree(v), 4);
        }
        for p in g.pendants() {
            assert_eq!(g.graph.degree(p), 1);
        }
        for (i, u) in g.u_set.iter().enumerate() {
            assert!(g.graph.has_edge(u, g.q_set.as_slice()[i]));
        }
        assert_eq!(g.girth_h, Girth::Finite(6));
        assert_eq!(g.h_graph().n(), 10);
    }

    #[test]
    fn attach_rejects_non_biregular() {
        let (h, u, v) = subdivide(&complete(4));
        assert!(matches!(attach_pendants(&h, &v, &u, 4), Err(GadgetError::NotBiregular { .. })));
    }

    #[test]
    fn matching_size_examples() {
        assert_eq!(matching_size_k(4, 4).unwrap(), 24);
        assert_eq!(matching_size_k(2, 3).unwrap(), 4);
        let g = gadget_from_regular(&complete(4), 4).unwrap();
        assert_eq!(3 * g.pendant_count(), 2 * 24);
        assert!(matches!(matching_size_k(3, 2), Err(GadgetError::NonIntegral { .. })));
    }

    proptest! {
        #[test]
        fn subdivision_doubles_girth(n in 5usize..40, extra in 0usize..30, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
            for _ in 0..extra {
                let a = rng.random_range(0..n);
                let b = rng.random_range(0..n);
                if a != b && !edges.iter().any(|&(x, y)| (x, y) == (a, b) || (x, y) == (b, a)) {
                    edges.push((a, b));
                }
            }
            let g = Graph::from_edges(n, edges).unwrap();
            let (h, _, _) = subdivide(&g);
            let gg = girth(&g).finite().unwrap();
            prop_assert_eq!(girth(&h), Girth::Finite(2 * gg));
        }

        #[test]
        fn gadget_psi_is_exact(gamma in (2usize..12).prop_map(|x| 2 * x), d in 4usize..7, seed in 0u64..50) {
            prop_assume!(gamma > d - 1);
            let ht = high_girth_regular(gamma, d - 1, 3, seed).unwrap().graph;
            let g = gadget_from_regular(&ht, d).unwrap();
            let nb = neighborhood(&g.graph, &g.u_set);
            prop_assert_eq!(2 * nb.len(), (d + 1) * gamma);
            prop_assert_eq!(g.r_set.len(), gamma * (d - 1) * (d - 2) / 2);
            prop_assert_eq!((d - 1) * g.pendant_count(), 2 * matching_size_k(gamma, d).unwrap());
        }
    }
}

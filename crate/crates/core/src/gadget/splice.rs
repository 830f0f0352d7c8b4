use std::io::{BufRead, Read, Write};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{matching_min_distance, matching_size_k, Gadget, GadgetError};
use crate::graph::{read_edge_list, write_edge_list, Graph, VertexSet};

/// G′ together with the bookkeeping needed to audit it. Host vertices keep
/// their labels; gadget vertex x becomes `host_n + x`.
#[derive(Clone, Debug, PartialEq)]
pub struct Splice {
    pub graph: Graph,
    pub planted_u: VertexSet,
    pub planted_v: VertexSet,
    pub pendants_q: VertexSet,
    pub pendants_r: VertexSet,
    pub matching: Vec<(usize, usize)>,
    /// Each pendant with the d-1 matching endpoints it was wired to.
    pub attachment: Vec<(usize, Vec<usize>)>,
    pub host_n: usize,
    pub gamma: usize,
    pub d: usize,
    pub min_matching_distance: Option<usize>,
    pub seed: u64,
}

/// JSON companion to the edge list of G′.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpliceSidecar {
    pub gamma: usize,
    pub d: usize,
    pub host_n: usize,
    pub matching: Vec<(usize, usize)>,
    pub attachment: Vec<(usize, Vec<usize>)>,
    pub planted_u: Vec<usize>,
    pub seed: u64,
    pub min_matching_distance: Option<usize>,
}

/// Removes `matching` from `host` and wires every pendant of `gadget` to d-1
/// of the freed endpoints, chosen by a seeded shuffle.
pub fn splice(
    host: &Graph,
    gadget: &Gadget,
    matching: &[(usize, usize)],
    seed: u64,
) -> Result<Splice, GadgetError> {
    let d = gadget.d;
    let n = host.n();
    if host.regular_degree() != Some(d) {
        return Err(GadgetError::NotRegular { expected: d });
    }
    let k = matching_size_k(gadget.gamma, d)?;
    if matching.len() != k {
        return Err(GadgetError::BadMatching(format!("expected {k} edges, got {}", matching.len())));
    }
    let mut seen = vec![false; n];
    for &(a, b) in matching {
        if a >= n || b >= n || !host.has_edge(a, b) {
            return Err(GadgetError::BadMatching(format!("({a},{b}) is not a host edge")));
        }
        for v in [a, b] {
            if std::mem::replace(&mut seen[v], true) {
                return Err(GadgetError::BadMatching(format!("vertex {v} is covered twice")));
            }
        }
    }

    let mut adj = host.to_adjacency();
    for &(a, b) in matching {
        adj[a].retain(|&x| x != b);
        adj[b].retain(|&x| x != a);
    }
    adj.extend(
        (0..gadget.graph.n()).map(|x| gadget.graph.neighbors(x).iter().map(|&y| y + n).collect()),
    );

    let mut endpoints: Vec<usize> = matching.iter().flat_map(|&(a, b)| [a, b]).collect();
    endpoints.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let attachment: Vec<(usize, Vec<usize>)> = gadget
        .pendants()
        .into_iter()
        .zip(endpoints.chunks(d - 1))
        .map(|(p, ends)| (p + n, ends.to_vec()))
        .collect();
    for (p, ends) in &attachment {
        for &e in ends {
            adj[*p].push(e);
            adj[e].push(*p);
        }
    }

    let graph = Graph::from_adjacency(adj)?;
    if let Some(vertex) = (0..graph.n()).find(|&v| graph.degree(v) != d) {
        return Err(GadgetError::DegreeViolation { d, vertex, degree: graph.degree(vertex) });
    }
    let total = graph.n();
    let shift = |s: &VertexSet| {
        VertexSet::new(total, s.iter().map(|x| x + n)).expect("shifted gadget set is in range")
    };
    Ok(Splice {
        planted_u: shift(&gadget.u_set),
        planted_v: shift(&gadget.v_set),
        pendants_q: shift(&gadget.q_set),
        pendants_r: shift(&gadget.r_set),
        graph,
        matching: matching.to_vec(),
        attachment,
        host_n: n,
        gamma: gadget.gamma,
        d,
        min_matching_distance: matching_min_distance(host, matching),
        seed,
    })
}

impl Splice {
    pub fn sidecar(&self) -> SpliceSidecar {
        SpliceSidecar {
            gamma: self.gamma,
            d: self.d,
            host_n: self.host_n,
            matching: self.matching.clone(),
            attachment: self.attachment.clone(),
            planted_u: self.planted_u.as_slice().to_vec(),
            seed: self.seed,
            min_matching_distance: self.min_matching_distance,
        }
    }

    /// U ∪ V, the base set X₀ of the layer decomposition used by the test
    /// vector.
    pub fn core(&self) -> VertexSet {
        self.planted_u.union(&self.planted_v)
    }
}

pub fn write_splice<G: Write, S: Write>(s: &Splice, graph_out: G, sidecar_out: S) -> Result<(), GadgetError> {
    write_edge_list(&s.graph, graph_out)?;
    serde_json::to_writer_pretty(sidecar_out, &s.sidecar()).map_err(|e| GadgetError::Io(e.to_string()))
}

/// Inverse of [`write_splice`]. The part sets are recovered from the fixed
/// layout U, V, Q, R after the host vertices.
pub fn read_splice<G: BufRead, S: Read>(graph_in: G, sidecar_in: S) -> Result<Splice, GadgetError> {
    let graph = read_edge_list(graph_in)?;
    let meta: SpliceSidecar =
        serde_json::from_reader(sidecar_in).map_err(|e| GadgetError::Io(e.to_string()))?;
    let (n, gamma, d) = (meta.host_n, meta.gamma, meta.d);
    if d < 3 {
        return Err(GadgetError::InvalidParams(format!("sidecar has d={d}")));
    }
    let nv = gamma * (d - 1) / 2;
    let bounds = [n, n + gamma, n + gamma + nv, n + 2 * gamma + nv, n + 2 * gamma + nv * (d - 1)];
    let total = graph.n();
    if bounds[4] != total {
        return Err(GadgetError::InvalidParams(format!(
            "sidecar implies {} vertices, edge list has {total}",
            bounds[4]
        )));
    }
    let part = |i: usize| VertexSet::range(total, bounds[i]..bounds[i + 1]);
    let planted_u = part(0);
    if planted_u.as_slice() != meta.planted_u.as_slice() {
        return Err(GadgetError::InvalidParams("planted_u does not match the layout".into()));
    }
    Ok(Splice {
        graph,
        planted_u,
        planted_v: part(1),
        pendants_q: part(2),
        pendants_r: part(3),
        matching: meta.matching,
        attachment: meta.attachment,
        host_n: n,
        gamma,
        d,
        min_matching_distance: meta.min_matching_distance,
        seed: meta.seed,
    })
}

//! Finite pieces of the infinite graph X: H with a tree glued to every
//! vertex. A U-vertex gets a tree whose root has one child, a V-vertex one
//! whose root has d-2 children; all deeper tree vertices have d-1 children.
//! Every vertex of X other than leaves of the truncation then has degree d.

use serde::{Deserialize, Serialize};

use super::nonbacktracking::{nb_spectrum, NbMode};
use super::{adjacency_radius_bracket, dense_adjacency, Method, SpectralError};
use crate::gadget::Gadget;
use crate::graph::{is_biregular, Graph, VertexSet};

const DENSE_LIMIT: usize = 1024;

#[derive(Clone, Debug)]
pub struct XTruncation {
    pub graph: Graph,
    /// Vertices 0..core_n are H.
    pub core_n: usize,
    pub depth: usize,
    /// Distance from H for every vertex.
    pub level: Vec<usize>,
    pub d: usize,
}

pub fn truncate_x(
    h: &Graph,
    u_set: &VertexSet,
    v_set: &VertexSet,
    d: usize,
    depth: usize,
) -> Result<XTruncation, SpectralError> {
    if d < 3 || !is_biregular(h, u_set, v_set, d - 1, 2) {
        return Err(SpectralError::InvalidInput(format!("H is not (d-1, 2)-biregular for d={d}")));
    }
    let mut adj = h.to_adjacency();
    let mut level = vec![0; h.n()];
    let mut frontier: Vec<(usize, usize)> = u_set
        .iter()
        .map(|u| (u, 1))
        .chain(v_set.iter().map(|v| (v, d - 2)))
        .collect();
    for t in 1..=depth {
        let mut next = Vec::new();
        for (parent, children) in frontier {
            for _ in 0..children {
                let c = adj.len();
                adj.push(vec![parent]);
                adj[parent].push(c);
                level.push(t);
                next.push((c, d - 1));
            }
        }
        frontier = next;
    }
    let graph = Graph::from_adjacency(adj).map_err(|e| SpectralError::InvalidInput(e.to_string()))?;
    Ok(XTruncation { graph, core_n: h.n(), depth, level, d })
}

/// Truncation built on the H inside a gadget. Depth 1 reproduces H′ with
/// the same vertex labels.
pub fn truncate_x_gadget(gadget: &Gadget, depth: usize) -> Result<XTruncation, SpectralError> {
    let h = gadget.h_graph();
    let gamma = gadget.u_set.len();
    let u = VertexSet::range(h.n(), 0..gamma);
    let v = VertexSet::range(h.n(), gamma..h.n());
    truncate_x(&h, &u, &v, gadget.d, depth)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct XRadiusReport {
    pub depth: usize,
    pub n: usize,
    pub d: usize,
    pub method: Method,
    /// Largest adjacency eigenvalue; the rigorous upper bound when the
    /// iterative path is used.
    pub lambda_max: f64,
    pub adjacency_bound: f64,
    pub adjacency_margin: f64,
    pub adjacency_passed: bool,
    pub nb_radius: f64,
    pub nb_bound: f64,
    pub nb_margin: f64,
    pub nb_passed: bool,
    pub passed: bool,
}

/// Checks λ_max(A) <= 2√(d-1) + adj_tol and ρ(B) <= √(d-1) + nb_tol on a
/// truncation of X of the given depth.
pub fn verify_x_radius(
    gadget: &Gadget,
    depth: usize,
    adj_tol: f64,
    nb_tol: f64,
) -> Result<XRadiusReport, SpectralError> {
    let x = truncate_x_gadget(gadget, depth)?;
    let d = x.d;
    let g = &x.graph;
    let (method, lambda_max) = if g.n() <= DENSE_LIMIT {
        (Method::Dense, dense_adjacency(g).symmetric_eigenvalues().max())
    } else {
        let b = adjacency_radius_bracket(g, 1e-10, 200_000);
        (Method::Iterative, b.upper)
    };
    let nb = nb_spectrum(g, NbMode::RadiusOnly)?;
    let adjacency_bound = 2.0 * ((d - 1) as f64).sqrt();
    let nb_bound = ((d - 1) as f64).sqrt();
    let adjacency_passed = lambda_max <= adjacency_bound + adj_tol;
    let nb_passed = nb.radius <= nb_bound + nb_tol;
    Ok(XRadiusReport {
        depth,
        n: g.n(),
        d,
        method,
        lambda_max,
        adjacency_bound,
        adjacency_margin: adjacency_bound - lambda_max,
        adjacency_passed,
        nb_radius: nb.radius,
        nb_bound,
        nb_margin: nb_bound - nb.radius,
        nb_passed,
        passed: adjacency_passed && nb_passed,
    })
}

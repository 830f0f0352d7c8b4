use serde::{Deserialize, Serialize};

use super::{
    gadget_from_regular, matching_size_k, max_girth_regular, spaced_matching, splice, Gadget,
    GadgetError, SearchBudget, Splice,
};
use crate::graph::{Girth, Graph};
use crate::par::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub d: usize,
    pub gamma: usize,
    pub host_n: usize,
    pub n: usize,
    pub k: usize,
    pub girth_h_tilde: Girth,
    pub girth_h: Girth,
    /// 2 log_{d-1} γ, the girth of H promised by the existence argument.
    pub log_bound_h: f64,
    pub matching_guaranteed_r: usize,
    pub matching_spacing: usize,
    pub matching_min_distance: Option<usize>,
    /// min(2 log_{d-1} γ, achieved matching distance).
    pub girth_lower_bound: f64,
    /// |Q ∪ R| = γ(2 + (d-1)(d-2))/2.
    pub pendant_count: usize,
    /// |U ∪ V ∪ Q ∪ R|.
    pub gadget_size: usize,
    /// Set when the two sizes above differ, which they always do; kept so
    /// reports that quote |H′| say which one they mean.
    pub gadget_size_differs_from_pendants: bool,
}

#[derive(Clone, Debug)]
pub struct Construction {
    pub h_tilde: Graph,
    pub gadget: Gadget,
    pub splice: Splice,
    pub report: ConstructionReport,
}

pub fn construct_pipeline(d: usize, host: &Graph, gamma: usize, seed: u64) -> Result<Construction, GadgetError> {
    construct_pipeline_with(d, host, gamma, seed, SearchBudget { restarts: 4, moves_per_restart: 20_000 })
}

/// H̃ → H → H′ → M → G′. H̃ is the largest-girth (d-1)-regular graph the
/// switching search finds on γ vertices.
pub fn construct_pipeline_with(
    d: usize,
    host: &Graph,
    gamma: usize,
    seed: u64,
    budget: SearchBudget,
) -> Result<Construction, GadgetError> {
    if d < 4 {
        return Err(GadgetError::InvalidParams(format!("need d >= 4, got {d}")));
    }
    if host.regular_degree() != Some(d) {
        return Err(GadgetError::NotRegular { expected: d });
    }
    if !gamma.is_multiple_of(2) || gamma < d {
        return Err(GadgetError::InvalidParams(format!("γ={gamma} must be even and at least d={d}")));
    }
    let n = host.n();
    if gamma.checked_pow(3).is_none_or(|c| c > n) {
        return Err(GadgetError::GammaTooLarge { gamma, n });
    }
    let k = matching_size_k(gamma, d)?;
    let ht = max_girth_regular(gamma, d - 1, derive_seed(seed, 0), budget)?;
    let gadget = gadget_from_regular(&ht.graph, d)?;
    let m = spaced_matching(host, k, derive_seed(seed, 1))?;
    let sp = splice(host, &gadget, &m.edges, derive_seed(seed, 2))?;

    let log_bound_h = 2.0 * (gamma as f64).ln() / ((d - 1) as f64).ln();
    let dist = m.min_distance.map_or(f64::INFINITY, |x| x as f64);
    let report = ConstructionReport {
        d,
        gamma,
        host_n: n,
        n: sp.graph.n(),
        k,
        girth_h_tilde: ht.girth,
        girth_h: gadget.girth_h,
        log_bound_h,
        matching_guaranteed_r: m.guaranteed_r,
        matching_spacing: m.spacing,
        matching_min_distance: m.min_distance,
        girth_lower_bound: log_bound_h.min(dist),
        pendant_count: gadget.pendant_count(),
        gadget_size: gadget.graph.n(),
        gadget_size_differs_from_pendants: gadget.pendant_count() != gadget.graph.n(),
    };
    Ok(Construction { h_tilde: ht.graph, gadget, splice: sp, report })
}

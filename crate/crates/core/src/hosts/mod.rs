//! d-regular host graphs: LPS Cayley graphs and random regular graphs.

mod lps;
mod random;

pub use lps::{lps_bipartite, lps_construct, lps_graph, LpsGraph, LpsVariant};
pub use random::random_regular;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadget::{high_girth_regular, GadgetError};
use crate::graph::Graph;

#[derive(Debug, Error)]
pub enum HostError {
    #[error("invalid host parameters: {0}")]
    InvalidParams(String),
    #[error("random pairing failed after {0} restarts")]
    RetryExhausted(usize),
    #[error("group closure produced {found} elements, expected {expected}")]
    GroupOrder { found: usize, expected: usize },
    #[error(transparent)]
    Graph(#[from] crate::graph::GraphError),
    #[error(transparent)]
    Gadget(#[from] Box<GadgetError>),
}

/// Recipe for a host graph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum HostSpec {
    Lps { p: u64, q: u64 },
    RandomRegular { n: usize, d: usize, seed: u64 },
    /// Random regular graph pushed to a girth target by edge switching.
    HighGirthRegular { n: usize, d: usize, girth: usize, seed: u64 },
}

impl HostSpec {
    pub fn degree(&self) -> usize {
        match *self {
            HostSpec::Lps { p, .. } => p as usize + 1,
            HostSpec::RandomRegular { d, .. } | HostSpec::HighGirthRegular { d, .. } => d,
        }
    }

    pub fn validate(&self) -> Result<(), HostError> {
        match *self {
            HostSpec::Lps { p, q } => lps::validate(p, q),
            HostSpec::RandomRegular { n, d, .. } | HostSpec::HighGirthRegular { n, d, .. } => {
                random::validate(n, d)
            }
        }
    }

    pub fn build(&self) -> Result<Graph, HostError> {
        match *self {
            HostSpec::Lps { p, q } => lps_graph(p, q),
            HostSpec::RandomRegular { n, d, seed } => random_regular(n, d, seed),
            HostSpec::HighGirthRegular { n, d, girth, seed } => {
                random::validate(n, d)?;
                Ok(high_girth_regular(n, d, girth, seed).map_err(Box::new)?.graph)
            }
        }
    }
}

//! High-girth near-Ramanujan graphs with a planted set of lossy vertex
//! expansion, and the numerical checks that go with them.

pub mod expansion;
pub mod gadget;
pub mod graph;
pub mod harness;
pub mod hosts;
pub mod linkage;
pub mod par;
pub mod spectral;

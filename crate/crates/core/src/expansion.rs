//! Vertex expansion, the expander mixing and irregular Moore bounds, and the
//! small-set lossless expansion audit built on the auxiliary graph H(S).

use std::collections::BTreeSet;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{girth, girth_with, Girth, Graph, GraphError, VertexSet};
use crate::par::{derive_seed, map_indices, map_indices_with, Execution};

/// Largest number of subsets exhaustive search will visit.
pub const EXHAUSTIVE_BUDGET: u64 = 50_000_000;
const DESCENT_MAX_STEPS: usize = 10_000;
const TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum ExpansionError {
    #[error("set is empty")]
    EmptySet,
    #[error("graph is not regular")]
    NotRegular,
    #[error("average degree {0} <= 2, Moore bound undefined")]
    DegenerateDegree(f64),
    #[error("exhaustive search needs {subsets} subsets, budget is {budget}")]
    BudgetExceeded { subsets: u64, budget: u64 },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExpansionReport {
    pub set_size: usize,
    /// |Γ(S)|.
    pub neighborhood_size: usize,
    /// Ψ(S) = |Γ(S)| / |S|.
    pub psi: f64,
    /// |∂S| = |Γ(S) \ S|.
    pub boundary: usize,
    /// e_S.
    pub internal_edges: usize,
    pub bound_value: Option<f64>,
    pub passed: Option<bool>,
}

/// Reusable marks so repeated set evaluations do not allocate.
struct Marks {
    stamp: Vec<u64>,
    epoch: u64,
}

impl Marks {
    fn new(n: usize) -> Self {
        Marks { stamp: vec![0; n], epoch: 0 }
    }

    fn next(&mut self) -> u64 {
        self.epoch += 1;
        self.epoch
    }
}

fn gamma_size(g: &Graph, members: &[usize], marks: &mut Marks) -> usize {
    let e = marks.next();
    let mut count = 0;
    for &u in members {
        for &w in g.neighbors(u) {
            if marks.stamp[w] != e {
                marks.stamp[w] = e;
                count += 1;
            }
        }
    }
    count
}

pub fn vertex_expansion(g: &Graph, s: &VertexSet) -> Result<ExpansionReport, ExpansionError> {
    if s.is_empty() {
        return Err(ExpansionError::EmptySet);
    }
    if s.host_n() != g.n() {
        return Err(ExpansionError::InvalidParams(format!("set over {} vertices, graph has {}", s.host_n(), g.n())));
    }
    let gamma = crate::graph::neighborhood(g, s);
    let internal_edges = s.iter().map(|u| g.neighbors(u).iter().filter(|&&w| s.contains(w)).count()).sum::<usize>() / 2;
    Ok(ExpansionReport {
        set_size: s.len(),
        neighborhood_size: gamma.len(),
        psi: gamma.len() as f64 / s.len() as f64,
        boundary: gamma.difference(s).len(),
        internal_edges,
        bound_value: None,
        passed: None,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchMode {
    Exhaustive,
    /// Seeded random sets, half of them grown by BFS, each followed by
    /// greedy local descent on Ψ.
    Sampled { trials: usize, seed: u64 },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MinExpansion {
    pub report: ExpansionReport,
    pub witness: VertexSet,
    pub mode: SearchMode,
    /// True for sampled search: the value is an upper bound on the minimum.
    pub upper_bound_only: bool,
    pub sets_evaluated: u64,
}

/// (|Γ(S)|, |S|, S), ordered by Ψ, then size, then members.
#[derive(Clone, Debug, PartialEq, Eq)]
struct Candidate {
    gamma: usize,
    members: Vec<usize>,
}

impl Candidate {
    fn better_than(&self, other: &Candidate) -> bool {
        let lhs = self.gamma * other.members.len();
        let rhs = other.gamma * self.members.len();
        (lhs, self.members.len(), &self.members) < (rhs, other.members.len(), &other.members)
    }
}

fn binomial(n: u64, k: u64) -> u64 {
    (0..k).fold(1u64, |acc, i| acc.saturating_mul(n - i) / (i + 1))
}

pub fn min_vertex_expansion(
    g: &Graph,
    max_size: usize,
    mode: SearchMode,
    exec: Execution,
) -> Result<MinExpansion, ExpansionError> {
    min_vertex_expansion_from(g, max_size, mode, &[], exec)
}

/// Like [`min_vertex_expansion`], also descending from the given sets (in
/// sampled mode) or evaluating them (exhaustive mode). A start larger than
/// `max_size` is allowed to keep its size.
pub fn min_vertex_expansion_from(
    g: &Graph,
    max_size: usize,
    mode: SearchMode,
    starts: &[VertexSet],
    exec: Execution,
) -> Result<MinExpansion, ExpansionError> {
    let n = g.n();
    if max_size == 0 || n == 0 {
        return Err(ExpansionError::InvalidParams("max_size and n must be positive".into()));
    }
    let max_size = max_size.min(n);
    let (best, evaluated) = match mode {
        SearchMode::Exhaustive => {
            let subsets: u64 = (1..=max_size as u64).map(|k| binomial(n as u64, k)).fold(0, u64::saturating_add);
            if subsets > EXHAUSTIVE_BUDGET {
                return Err(ExpansionError::BudgetExceeded { subsets, budget: EXHAUSTIVE_BUDGET });
            }
            // Split on the smallest member.
            let per_first = map_indices_with(exec, n, || Marks::new(n), |marks, first| {
                let mut best: Option<Candidate> = None;
                let mut members = vec![first];
                exhaust(g, max_size, &mut members, marks, &mut best);
                best.expect("every first vertex yields a singleton")
            });
            let mut best = per_first.into_iter().reduce(|a, b| if b.better_than(&a) { b } else { a }).unwrap();
            let mut marks = Marks::new(n);
            for s in starts {
                let c = Candidate { gamma: gamma_size(g, s.as_slice(), &mut marks), members: s.as_slice().to_vec() };
                if c.better_than(&best) {
                    best = c;
                }
            }
            (best, subsets + starts.len() as u64)
        }
        SearchMode::Sampled { trials, seed } => {
            let runs = map_indices_with(exec, trials + starts.len(), || Marks::new(n), |marks, t| {
                let (initial, limit) = if t < starts.len() {
                    (starts[t].as_slice().to_vec(), max_size.max(starts[t].len()))
                } else {
                    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
                    let size = rng.random_range(1..=max_size);
                    let set = if t % 2 == 0 { random_connected_set(g, size, &mut rng) } else { random_set(n, size, &mut rng) };
                    (set, max_size)
                };
                descend(g, initial, limit, marks)
            });
            let evaluated = runs.iter().map(|r| r.1).sum();
            let best = runs.into_iter().map(|r| r.0).reduce(|a, b| if b.better_than(&a) { b } else { a });
            match best {
                Some(b) => (b, evaluated),
                None => return Err(ExpansionError::InvalidParams("no trials and no starts".into())),
            }
        }
    };
    let witness = VertexSet::new(n, best.members.iter().copied())?;
    let report = vertex_expansion(g, &witness)?;
    Ok(MinExpansion {
        report,
        witness,
        mode,
        upper_bound_only: matches!(mode, SearchMode::Sampled { .. }),
        sets_evaluated: evaluated,
    })
}

fn exhaust(g: &Graph, max_size: usize, members: &mut Vec<usize>, marks: &mut Marks, best: &mut Option<Candidate>) {
    let c = Candidate { gamma: gamma_size(g, members, marks), members: members.clone() };
    if best.as_ref().is_none_or(|b| c.better_than(b)) {
        *best = Some(c);
    }
    if members.len() == max_size {
        return;
    }
    let last = *members.last().unwrap();
    for v in last + 1..g.n() {
        members.push(v);
        exhaust(g, max_size, members, marks, best);
        members.pop();
    }
}

/// Greedy descent: repeatedly take the single addition (from ∂S) or removal
/// that lowers Ψ the most. Returns the local minimum and the number of sets
/// evaluated.
fn descend(g: &Graph, initial: Vec<usize>, limit: usize, marks: &mut Marks) -> (Candidate, u64) {
    let mut cur = Candidate { gamma: gamma_size(g, &initial, marks), members: initial };
    cur.members.sort_unstable();
    let mut evaluated = 1u64;
    for _ in 0..DESCENT_MAX_STEPS {
        let mut best: Option<Candidate> = None;
        let mut consider = |members: Vec<usize>, marks: &mut Marks| {
            evaluated += 1;
            let c = Candidate { gamma: gamma_size(g, &members, marks), members };
            if c.better_than(&cur) && best.as_ref().is_none_or(|b| c.better_than(b)) {
                best = Some(c);
            }
        };
        if cur.members.len() < limit {
            let inside: BTreeSet<usize> = cur.members.iter().copied().collect();
            let boundary: BTreeSet<usize> =
                cur.members.iter().flat_map(|&u| g.neighbors(u).iter().copied()).filter(|w| !inside.contains(w)).collect();
            for w in boundary {
                let mut m = cur.members.clone();
                let pos = m.binary_search(&w).unwrap_err();
                m.insert(pos, w);
                consider(m, marks);
            }
        }
        if cur.members.len() > 1 {
            for i in 0..cur.members.len() {
                let mut m = cur.members.clone();
                m.remove(i);
                consider(m, marks);
            }
        }
        match best {
            Some(b) => cur = b,
            None => break,
        }
    }
    (cur, evaluated)
}

fn random_set(n: usize, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut v = sample(rng, n, size.min(n)).into_vec();
    v.sort_unstable();
    v
}

/// Grows a set from a random root by adding random frontier vertices. May
/// come out smaller than `size` if the component is small.
fn random_connected_set(g: &Graph, size: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let root = rng.random_range(0..g.n());
    let mut inside = BTreeSet::from([root]);
    let mut frontier: Vec<usize> = g.neighbors(root).to_vec();
    while inside.len() < size && !frontier.is_empty() {
        let v = frontier.swap_remove(rng.random_range(0..frontier.len()));
        if inside.insert(v) {
            frontier.extend(g.neighbors(v).iter().filter(|w| !inside.contains(w)));
        }
    }
    inside.into_iter().collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MixingReport {
    /// e(S,T), ordered pairs.
    pub e_st: usize,
    /// (d/n)|S||T|.
    pub expected: f64,
    pub deviation: f64,
    /// λ √(|S||T|).
    pub bound: f64,
    pub slack: f64,
    pub passed: bool,
}

/// |e(S,T) - (d/n)|S||T|| <= λ √(|S||T|) for a d-regular graph.
pub fn expander_mixing_check(
    g: &Graph,
    lambda: f64,
    s: &VertexSet,
    t: &VertexSet,
) -> Result<MixingReport, ExpansionError> {
    let d = g.regular_degree().ok_or(ExpansionError::NotRegular)?;
    let n = g.n() as f64;
    let e_st = s.iter().map(|x| g.neighbors(x).iter().filter(|&&y| t.contains(y)).count()).sum::<usize>();
    let (ss, ts) = (s.len() as f64, t.len() as f64);
    let expected = d as f64 / n * ss * ts;
    let deviation = (e_st as f64 - expected).abs();
    let bound = lambda * (ss * ts).sqrt();
    let slack = bound - deviation;
    Ok(MixingReport { e_st, expected, deviation, bound, slack, passed: slack >= -TOL * (1.0 + bound) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MixingAudit {
    pub lambda: f64,
    pub trials: usize,
    pub violations: usize,
    pub min_slack: f64,
    pub passed: bool,
}

/// Random (S, T) pairs of random sizes.
pub fn expander_mixing_audit(
    g: &Graph,
    lambda: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<MixingAudit, ExpansionError> {
    g.regular_degree().ok_or(ExpansionError::NotRegular)?;
    let n = g.n();
    let reports = map_indices(exec, trials, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, i as u64));
        let a = rng.random_range(1..=n);
        let b = rng.random_range(1..=n);
        let s = VertexSet::new(n, random_set(n, a, &mut rng)).expect("in range");
        let t = VertexSet::new(n, random_set(n, b, &mut rng)).expect("in range");
        expander_mixing_check(g, lambda, &s, &t).expect("regularity checked")
    });
    let violations = reports.iter().filter(|r| !r.passed).count();
    let min_slack = reports.iter().map(|r| r.slack).fold(f64::INFINITY, f64::min);
    Ok(MixingAudit { lambda, trials, violations, min_slack, passed: violations == 0 })
}

#[derive(Clone, Debug)]
pub struct HsGraph {
    /// On vertices 0..|S|; vertex i is `members[i]`.
    pub graph: Graph,
    pub members: Vec<usize>,
    pub internal_edges: usize,
    pub boundary: usize,
    /// n_i: boundary vertices with exactly i neighbors in S, i = 0..=maxdeg.
    pub incidence: Vec<usize>,
    /// |E(S, ∂S)| = Σ i n_i.
    pub cross_edges: usize,
    /// Path edges skipped because they were already present.
    pub duplicates_skipped: usize,
}

impl HsGraph {
    /// e_S + |E(S,∂S)| - |∂S|, the edge count before deduplication.
    pub fn undeduplicated_edges(&self) -> usize {
        self.internal_edges + self.cross_edges - self.boundary
    }
}

/// H(S): the induced edges of S plus, for every boundary vertex with i >= 2
/// neighbors in S, a path through those neighbors in sorted order.
pub fn build_hs(g: &Graph, s: &VertexSet) -> HsGraph {
    let members: Vec<usize> = s.iter().collect();
    let pos = |v: usize| members.binary_search(&v).ok();
    let mut edges = BTreeSet::new();
    for (i, &u) in members.iter().enumerate() {
        for &w in g.neighbors(u) {
            if let Some(j) = pos(w) {
                if i < j {
                    edges.insert((i, j));
                }
            }
        }
    }
    let internal_edges = edges.len();
    let mut outside: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for (i, &u) in members.iter().enumerate() {
        for &w in g.neighbors(u) {
            if !s.contains(w) {
                outside.entry(w).or_default().push(i);
            }
        }
    }
    let maxdeg = g.degrees().max().unwrap_or(0);
    let mut incidence = vec![0; maxdeg + 1];
    let mut duplicates_skipped = 0;
    let mut cross_edges = 0;
    for list in outside.values() {
        incidence[list.len()] += 1;
        cross_edges += list.len();
        let mut sorted = list.clone();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if !edges.insert((w[0], w[1])) {
                duplicates_skipped += 1;
            }
        }
    }
    let graph = Graph::from_edges(members.len(), edges).expect("edges are simple by construction");
    HsGraph {
        graph,
        members,
        internal_edges,
        boundary: outside.len(),
        incidence,
        cross_edges,
        duplicates_skipped,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MooreReport {
    pub n: usize,
    pub girth: Girth,
    pub average_degree: f64,
    /// 2 log_{d̄-1} n + 2.
    pub bound: f64,
    pub passed: bool,
}

pub fn moore_bound_check(g: &Graph) -> Result<MooreReport, ExpansionError> {
    moore_bound_check_with(g, Execution::default())
}

pub fn moore_bound_check_with(g: &Graph, exec: Execution) -> Result<MooreReport, ExpansionError> {
    let dbar = g.average_degree();
    if dbar <= 2.0 {
        return Err(ExpansionError::DegenerateDegree(dbar));
    }
    let n = g.n();
    let bound = 2.0 * (n as f64).ln() / (dbar - 1.0).ln() + 2.0;
    let gi = girth_with(g, exec);
    let passed = gi.finite().is_some_and(|x| x as f64 <= bound + TOL);
    Ok(MooreReport { n, girth: gi, average_degree: dbar, bound, passed })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub d: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub alpha: f64,
    pub n: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundVariant {
    /// d - λ - (d^{2κ/α} - 1)/2 - d/n^{1-κ}, the end of the derivation.
    #[default]
    Proof,
    /// d - λ - d^{κ/α}/2 - d/n^{1-κ}, as the theorem is stated.
    Statement,
}

/// Lower bound on |∂S|/|S| for |S| = n^κ in a graph of girth at least
/// 2α log_{d-1} n + 4.
pub fn small_set_bound(p: BoundParams, variant: BoundVariant) -> Result<f64, ExpansionError> {
    if p.alpha <= 0.0 || p.kappa < 0.0 || p.n < 2 || p.d < 3 {
        return Err(ExpansionError::InvalidParams(format!("{p:?}")));
    }
    let d = p.d as f64;
    let middle = match variant {
        BoundVariant::Proof => (d.powf(2.0 * p.kappa / p.alpha) - 1.0) / 2.0,
        BoundVariant::Statement => d.powf(p.kappa / p.alpha) / 2.0,
    };
    Ok(d - p.lambda - middle - d / (p.n as f64).powf(1.0 - p.kappa))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleOutcome {
    pub size: usize,
    pub connected: bool,
    pub boundary: usize,
    pub ratio: f64,
    /// log |S| / log n.
    pub kappa_s: f64,
    pub bound: f64,
    pub identity_ok: bool,
    pub hs_count_ok: bool,
    pub hs_girth: Girth,
    pub hs_girth_ok: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SmallSetAudit {
    pub n: usize,
    pub d: usize,
    pub lambda: f64,
    pub kappa: f64,
    pub girth: Girth,
    /// (girth - 4) / (2 log_{d-1} n).
    pub alpha: f64,
    pub max_size: usize,
    pub trials: usize,
    /// Bound at κ itself, both variants.
    pub bound_at_kappa: f64,
    pub statement_bound_at_kappa: f64,
    pub violations: usize,
    pub identity_failures: usize,
    pub hs_count_failures: usize,
    pub hs_girth_failures: usize,
    /// min over samples of |∂S|/|S| - bound(κ_S).
    pub min_margin: f64,
    pub min_ratio: f64,
    pub passed: bool,
}

/// Samples sets of size at most n^κ (alternating BFS-grown and uniform) and
/// checks each against the bound evaluated at its own κ_S = log|S|/log n,
/// which is at least the bound at κ. Also checks the counting identities
/// and the girth of H(S).
pub fn audit_small_sets(
    g: &Graph,
    lambda: f64,
    kappa: f64,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SmallSetAudit, ExpansionError> {
    let d = g.regular_degree().ok_or(ExpansionError::NotRegular)?;
    let n = g.n();
    if !(0.0..1.0).contains(&kappa) {
        return Err(ExpansionError::InvalidParams(format!("kappa {kappa} outside [0, 1)")));
    }
    let gi = girth_with(g, exec);
    let log_n = (n as f64).ln() / ((d - 1) as f64).ln();
    let alpha = match gi {
        Girth::Finite(r) => (r as f64 - 4.0) / (2.0 * log_n),
        Girth::Infinite => f64::INFINITY,
    };
    if alpha <= 0.0 {
        return Err(ExpansionError::InvalidParams(format!("girth {gi:?} gives alpha {alpha} <= 0")));
    }
    let params = |kappa| BoundParams { d, lambda, kappa, alpha, n };
    let max_size = (((n as f64).powf(kappa) + 1e-9).floor() as usize).clamp(1, n);
    let half_girth = gi.finite().map(|r| r.div_ceil(2));
    let outcomes = map_indices(exec, trials, |t| {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, t as u64));
        let size = rng.random_range(1..=max_size);
        let connected = t % 2 == 0;
        let members = if connected { random_connected_set(g, size, &mut rng) } else { random_set(n, size, &mut rng) };
        let s = VertexSet::new(n, members).expect("in range");
        let hs = build_hs(g, &s);
        let size = s.len();
        let ratio = hs.boundary as f64 / size as f64;
        let kappa_s = (size as f64).ln() / (n as f64).ln();
        let bound = small_set_bound(params(kappa_s), BoundVariant::Proof).expect("validated");
        let weighted: usize = hs.incidence.iter().enumerate().map(|(i, c)| i * c).sum();
        let identity_ok = weighted == hs.cross_edges && weighted == d * size - 2 * hs.internal_edges;
        let hs_count_ok = hs.graph.m() + hs.duplicates_skipped == hs.undeduplicated_edges()
            && hs.undeduplicated_edges() + hs.internal_edges + hs.boundary == d * size;
        let hs_girth = girth(&hs.graph);
        let hs_girth_ok = match (hs_girth.finite(), half_girth) {
            (None, _) | (_, None) => true,
            (Some(h), Some(lo)) => h >= lo,
        };
        SampleOutcome { size, connected, boundary: hs.boundary, ratio, kappa_s, bound, identity_ok, hs_count_ok, hs_girth, hs_girth_ok }
    });
    let violations = outcomes.iter().filter(|o| o.ratio < o.bound - TOL).count();
    let identity_failures = outcomes.iter().filter(|o| !o.identity_ok).count();
    let hs_count_failures = outcomes.iter().filter(|o| !o.hs_count_ok).count();
    let hs_girth_failures = outcomes.iter().filter(|o| !o.hs_girth_ok).count();
    let min_margin = outcomes.iter().map(|o| o.ratio - o.bound).fold(f64::INFINITY, f64::min);
    let min_ratio = outcomes.iter().map(|o| o.ratio).fold(f64::INFINITY, f64::min);
    Ok(SmallSetAudit {
        n,
        d,
        lambda,
        kappa,
        girth: gi,
        alpha,
        max_size,
        trials,
        bound_at_kappa: small_set_bound(params(kappa), BoundVariant::Proof)?,
        statement_bound_at_kappa: small_set_bound(params(kappa), BoundVariant::Statement)?,
        violations,
        identity_failures,
        hs_count_failures,
        hs_girth_failures,
        min_margin,
        min_ratio,
        passed: violations + identity_failures + hs_count_failures + hs_girth_failures == 0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, petersen};
    use crate::hosts::random_regular;

    fn set(n: usize, v: &[usize]) -> VertexSet {
        VertexSet::new(n, v.iter().copied()).unwrap()
    }

    #[test]
    fn expansion_basics() {
        let p = petersen();
        let r = vertex_expansion(&p, &set(10, &[0])).unwrap();
        assert_eq!((r.psi, r.boundary, r.internal_edges), (3.0, 3, 0));
        let r = vertex_expansion(&p, &VertexSet::full(10)).unwrap();
        assert_eq!((r.psi, r.boundary), (1.0, 0));
        assert!(matches!(vertex_expansion(&p, &VertexSet::empty(10)), Err(ExpansionError::EmptySet)));
    }

    #[test]
    fn exhaustive_cycle() {
        // Adjacent pair {v, w} in C6: Γ = {u, v, w, x}.
        let c = cycle(6);
        let r = vertex_expansion(&c, &set(6, &[1, 2])).unwrap();
        assert_eq!(r.psi, 2.0);
        // The minimum is a pair at distance 2 sharing a neighbor.
        let m = min_vertex_expansion(&c, 2, SearchMode::Exhaustive, Execution::Sequential).unwrap();
        assert_eq!(m.report.psi, 1.5);
        assert_eq!(m.witness.as_slice(), &[0, 2]);
        assert!(!m.upper_bound_only);
        let m1 = min_vertex_expansion(&petersen(), 1, SearchMode::Exhaustive, Execution::default()).unwrap();
        assert_eq!(m1.report.psi, 3.0);
        assert_eq!(m1.sets_evaluated, 10);
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let g = random_regular(200, 4, 3).unwrap();
        let mode = SearchMode::Sampled { trials: 40, seed: 9 };
        let a = min_vertex_expansion(&g, 6, mode, Execution::Parallel).unwrap();
        let b = min_vertex_expansion(&g, 6, mode, Execution::Sequential).unwrap();
        assert_eq!(a.witness, b.witness);
        assert!(a.upper_bound_only);
    }

    #[test]
    fn mixing_on_petersen() {
        let p = petersen();
        let r = expander_mixing_check(&p, 2.0, &VertexSet::full(10), &VertexSet::full(10)).unwrap();
        assert_eq!(r.deviation, 0.0);
        let a = expander_mixing_audit(&p, 2.0, 1000, 4, Execution::default()).unwrap();
        assert_eq!(a.violations, 0);
        // λ too small must eventually be caught.
        let a = expander_mixing_audit(&p, 0.1, 200, 4, Execution::default()).unwrap();
        assert!(a.violations > 0);
    }

    #[test]
    fn hs_small_cases() {
        let c = cycle(8);
        let hs = build_hs(&c, &set(8, &[0, 4]));
        assert_eq!(hs.graph.m(), 0);
        let hs = build_hs(&c, &set(8, &[0, 1]));
        assert_eq!(hs.graph.m(), 1);
        // Two vertices at distance 2 share a boundary neighbor.
        let hs = build_hs(&c, &set(8, &[0, 2]));
        assert_eq!((hs.graph.m(), hs.incidence[2], hs.incidence[1]), (1, 1, 2));
    }

    #[test]
    fn moore_examples() {
        let r = moore_bound_check(&complete(4)).unwrap();
        assert!(r.passed && (r.bound - 6.0).abs() < 1e-12);
        let r = moore_bound_check(&petersen()).unwrap();
        assert!(r.passed && (r.bound - 8.643856).abs() < 1e-6);
        assert!(matches!(moore_bound_check(&cycle(7)), Err(ExpansionError::DegenerateDegree(_))));
    }

    #[test]
    fn small_set_bound_values() {
        let lam = 2.0 * 3f64.sqrt();
        let far = small_set_bound(BoundParams { d: 4, lambda: lam, kappa: 1e-12, alpha: 1.0, n: usize::MAX }, BoundVariant::Proof)
            .unwrap();
        assert!((far - (4.0 - lam)).abs() < 1e-9);
        let half = small_set_bound(BoundParams { d: 4, lambda: 0.0, kappa: 0.5, alpha: 1.0, n: 1 << 40 }, BoundVariant::Proof)
            .unwrap();
        assert!((half - (4.0 - 1.5 - 4.0 / 2f64.powi(20))).abs() < 1e-12);
        // Ramanujan, girth (4/3) log n, κ < 1/3: bound / d → 1.
        let mut prev = 0.0;
        for d in [10usize, 100, 1000, 10000] {
            let p = BoundParams { d, lambda: 2.0 * ((d - 1) as f64).sqrt(), kappa: 0.1, alpha: 2.0 / 3.0, n: 1 << 60 };
            let r = small_set_bound(p, BoundVariant::Proof).unwrap() / d as f64;
            assert!(r > prev);
            prev = r;
        }
        assert!(prev > 0.9);
    }

    #[test]
    fn small_set_audit_runs_clean() {
        let g = crate::gadget::high_girth_regular(600, 4, 7, 1).unwrap().graph;
        let lam = crate::spectral::adjacency_spectrum(&g, crate::spectral::AdjMode::Dense).unwrap().lambda;
        let a = audit_small_sets(&g, lam, 0.3, 500, 1, Execution::default()).unwrap();
        assert!(a.passed, "{a:?}");
        assert_eq!(a.max_size, 6);
    }
}

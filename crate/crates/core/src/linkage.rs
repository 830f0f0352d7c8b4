//! Exact closed-walk counts behind the trace-method bound on ρ(B_X).
//!
//! With T = B^ℓ (Bᵀ)^ℓ, the number ⟨1_e, T^k 1_e⟩ counts sequences of 2k
//! nonbacktracking arc walks of ℓ steps each, alternating forwards along B
//! and backwards along Bᵀ. Read on vertices, every backwards walk is a
//! forwards one traversed in reverse, so the sequence becomes a closed walk
//! of 2k segments of ℓ+1 steps in which:
//!
//! * the first step traverses e,
//! * every joint is an exact backtrack (segment j+1 starts by undoing the
//!   last step of segment j),
//! * the last step traverses e reversed.
//!
//! [`LinkagePattern::Gram`] enumerates exactly these walks, so its count
//! equals [`quadratic_form`]. [`LinkagePattern::Free`] drops the three
//! constraints and counts every closed linkage at the tail of e, which is
//! what the encoding argument bounds.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::gadget::Gadget;
use crate::graph::Graph;
use crate::par::{map_slice, Execution};
use crate::spectral::{truncate_x_gadget, DirectedEdgeSpace, SpectralError};

/// Default cap on DFS nodes for [`count_linkages_bruteforce`].
pub const DEFAULT_BUDGET: u64 = 200_000_000;

#[derive(Debug, Error)]
pub enum LinkageError {
    #[error("({0}, {1}) is not an edge")]
    NoSuchEdge(usize, usize),
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("enumeration visited more than {budget} nodes")]
    BudgetExceeded { budget: u64 },
    #[error("integer overflow at power {step}")]
    Overflow { step: usize },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinkagePattern {
    /// Any walk starting at the tail of the start edge.
    Free,
    /// Walks with the structure of ⟨1_e, T^k 1_e⟩; see the module docs.
    Gram,
}

#[derive(Clone, Debug)]
pub struct LinkageQuery<'a> {
    pub graph: &'a Graph,
    pub start_edge: (usize, usize),
    /// Number of nonbacktracking segments.
    pub segments_a: usize,
    /// Steps per segment.
    pub segment_len_b: usize,
    pub closed: bool,
    pub pattern: LinkagePattern,
}

impl<'a> LinkageQuery<'a> {
    pub fn free(graph: &'a Graph, start_edge: (usize, usize), a: usize, b: usize, closed: bool) -> Self {
        LinkageQuery { graph, start_edge, segments_a: a, segment_len_b: b, closed, pattern: LinkagePattern::Free }
    }

    /// The (2k × (ℓ+1)) closed pattern matching [`quadratic_form`].
    pub fn gram(graph: &'a Graph, start_edge: (usize, usize), k: usize, ell: usize) -> Self {
        LinkageQuery {
            graph,
            start_edge,
            segments_a: 2 * k,
            segment_len_b: ell + 1,
            closed: true,
            pattern: LinkagePattern::Gram,
        }
    }
}

struct Enumerator<'a> {
    g: &'a Graph,
    dist: Vec<Option<usize>>,
    start: (usize, usize),
    b: usize,
    closed: bool,
    gram: bool,
    total: usize,
    nodes: u64,
    budget: u64,
}

impl Enumerator<'_> {
    /// Walk is at `cur` having taken `step` steps, the last from `prev`.
    fn go(&mut self, step: usize, prev: Option<usize>, cur: usize) -> Result<u128, LinkageError> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(LinkageError::BudgetExceeded { budget: self.budget });
        }
        let remaining = self.total - step;
        if self.closed {
            match self.dist[cur] {
                Some(r) if r <= remaining => {}
                _ => return Ok(0),
            }
        }
        if remaining == 0 {
            return Ok(u128::from(!self.closed || cur == self.start.0));
        }
        let at_joint = step.is_multiple_of(self.b);
        let g = self.g;
        let mut count = 0u128;
        for &next in g.neighbors(cur) {
            let allowed = if step == 0 {
                !self.gram || next == self.start.1
            } else if at_joint {
                // Free: anything goes. Gram: the next segment undoes the
                // last step.
                !self.gram || Some(next) == prev
            } else {
                Some(next) != prev
            };
            if !allowed {
                continue;
            }
            if self.gram && remaining == 1 && (cur, next) != (self.start.1, self.start.0) {
                continue;
            }
            count += self.go(step + 1, Some(cur), next)?;
        }
        Ok(count)
    }
}

pub fn count_linkages_bruteforce(q: &LinkageQuery) -> Result<u128, LinkageError> {
    count_linkages_bruteforce_with_budget(q, DEFAULT_BUDGET)
}

/// Depth-first enumeration of walks of a·b steps from the tail of the start
/// edge, nonbacktracking inside every segment of b steps.
pub fn count_linkages_bruteforce_with_budget(q: &LinkageQuery, budget: u64) -> Result<u128, LinkageError> {
    let g = q.graph;
    let (u, v) = q.start_edge;
    if !g.has_edge(u, v) {
        return Err(LinkageError::NoSuchEdge(u, v));
    }
    if q.segments_a == 0 || q.segment_len_b == 0 {
        return Err(LinkageError::InvalidParams("a and b must be at least 1".into()));
    }
    let dist = if q.closed { crate::graph::bfs_distances(g, &[u]) } else { vec![Some(0); g.n()] };
    let mut e = Enumerator {
        g,
        dist,
        start: (u, v),
        b: q.segment_len_b,
        closed: q.closed,
        gram: q.pattern == LinkagePattern::Gram,
        total: q.segments_a * q.segment_len_b,
        nodes: 0,
        budget,
    };
    e.go(0, None, u)
}

/// y = B x over u128, or None on overflow.
fn apply_b(s: &DirectedEdgeSpace, x: &[u128], y: &mut [u128]) -> Option<()> {
    for a in 0..s.len() {
        let r = s.reverse(a);
        let mut acc = 0u128;
        for b in s.out_arcs(s.head(a)) {
            if b != r {
                acc = acc.checked_add(x[b])?;
            }
        }
        y[a] = acc;
    }
    Some(())
}

/// y = Bᵀ x over u128: (Bᵀx)(b) = Σ over arcs a into tail(b), a ≠ rev(b).
fn apply_bt(s: &DirectedEdgeSpace, x: &[u128], y: &mut [u128]) -> Option<()> {
    for b in 0..s.len() {
        let r = s.reverse(b);
        let mut acc = 0u128;
        for out in s.out_arcs(s.tail(b)) {
            let a = s.reverse(out);
            if a != r {
                acc = acc.checked_add(x[a])?;
            }
        }
        y[b] = acc;
    }
    Some(())
}

/// ⟨1_e, (B^ℓ (Bᵀ)^ℓ)^k 1_e⟩ for the arc e = (u, v), in exact integers.
pub fn quadratic_form(g: &Graph, edge: (usize, usize), k: usize, ell: usize) -> Result<u128, LinkageError> {
    let s = DirectedEdgeSpace::new(g);
    quadratic_form_in(&s, edge, k, ell)
}

fn quadratic_form_in(s: &DirectedEdgeSpace, edge: (usize, usize), k: usize, ell: usize) -> Result<u128, LinkageError> {
    let e = s.index(edge.0, edge.1).ok_or(LinkageError::NoSuchEdge(edge.0, edge.1))?;
    let mut x = vec![0u128; s.len()];
    let mut y = vec![0u128; s.len()];
    x[e] = 1;
    let mut step = 0;
    for _ in 0..k {
        for _ in 0..ell {
            step += 1;
            apply_bt(s, &x, &mut y).ok_or(LinkageError::Overflow { step })?;
            std::mem::swap(&mut x, &mut y);
        }
        for _ in 0..ell {
            step += 1;
            apply_b(s, &x, &mut y).ok_or(LinkageError::Overflow { step })?;
            std::mem::swap(&mut x, &mut y);
        }
    }
    Ok(x[e])
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncodingBoundParams {
    pub k: usize,
    pub ell: usize,
    pub d: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodingBound {
    pub ln_value: f64,
    /// exp(ln_value); infinite when it overflows f64.
    pub value: f64,
    /// value^{1/(2k(ℓ+1))}, which tends to √(d-1).
    pub root: f64,
}

/// 2 (k(ℓ+1))² (ℓ+1)^{8k} 2^{2k} √(d-1)^{2k(ℓ+1)+1}, evaluated in log space.
pub fn encoding_bound(p: EncodingBoundParams) -> Result<EncodingBound, LinkageError> {
    let EncodingBoundParams { k, ell, d } = p;
    if k == 0 || ell == 0 || d < 2 {
        return Err(LinkageError::InvalidParams(format!("k={k}, ell={ell}, d={d}")));
    }
    let (kf, l1) = (k as f64, (ell + 1) as f64);
    let ln_value = 2f64.ln()
        + 2.0 * (kf * l1).ln()
        + 8.0 * kf * l1.ln()
        + 2.0 * kf * 2f64.ln()
        + (2.0 * kf * l1 + 1.0) * 0.5 * ((d - 1) as f64).ln();
    Ok(EncodingBound { ln_value, value: ln_value.exp(), root: (ln_value / (2.0 * kf * l1)).exp() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TraceBoundReport {
    pub k: usize,
    pub ell: usize,
    pub d: usize,
    pub depth: usize,
    pub truncation_n: usize,
    /// Arcs of H checked; linkages from them cannot reach the cut.
    pub arcs_checked: usize,
    pub max_quadratic_form: u128,
    pub argmax_arc: (usize, usize),
    /// Free closed linkage count at the argmax arc, when within budget.
    pub free_linkages_at_argmax: Option<u128>,
    pub bound: EncodingBound,
    /// max_quadratic_form / bound.
    pub ratio: f64,
    pub passed: bool,
}

/// Checks quadratic_form ≤ encoding_bound for every arc of H inside a
/// truncation of X deep enough that no closed walk of 2k(ℓ+1) steps from H
/// sees the cut.
pub fn verify_trace_bound(
    gadget: &Gadget,
    depth: usize,
    k: usize,
    ell: usize,
    exec: Execution,
) -> Result<TraceBoundReport, LinkageError> {
    if k == 0 || ell == 0 {
        return Err(LinkageError::InvalidParams("k and ell must be at least 1".into()));
    }
    if depth < k * (ell + 1) {
        return Err(LinkageError::InvalidParams(format!("depth {depth} < k(ell+1) = {}", k * (ell + 1))));
    }
    let d = gadget.d;
    let bound = encoding_bound(EncodingBoundParams { k, ell, d })?;
    let x = truncate_x_gadget(gadget, depth)?;
    let s = DirectedEdgeSpace::new(&x.graph);
    let arcs: Vec<(usize, usize)> = (0..x.core_n)
        .flat_map(|u| x.graph.neighbors(u).iter().filter(|&&v| v < x.core_n).map(move |&v| (u, v)))
        .collect();
    let values = map_slice(exec, &arcs, |&e| quadratic_form_in(&s, e, k, ell));
    let mut best = (0u128, arcs.first().copied().unwrap_or((0, 0)));
    for (v, &e) in values.into_iter().zip(&arcs) {
        let v = v?;
        if v > best.0 {
            best = (v, e);
        }
    }
    let free = if arcs.is_empty() {
        None
    } else {
        count_linkages_bruteforce_with_budget(&LinkageQuery::free(&x.graph, best.1, 2 * k, ell + 1, true), 20_000_000)
            .ok()
    };
    let ratio = best.0 as f64 / bound.value;
    Ok(TraceBoundReport {
        k,
        ell,
        d,
        depth,
        truncation_n: x.graph.n(),
        arcs_checked: arcs.len(),
        max_quadratic_form: best.0,
        argmax_arc: best.1,
        free_linkages_at_argmax: free,
        bound,
        ratio,
        passed: (best.0 as f64) <= bound.value,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gadget::gadget_from_regular;
    use crate::graph::{complete, complete_tree, cycle, path, petersen, star};
    use proptest::prelude::*;

    #[test]
    fn tiny_cases() {
        assert_eq!(count_linkages_bruteforce(&LinkageQuery::free(&path(2), (0, 1), 2, 1, true)).unwrap(), 1);
        let t = complete_tree(2, 2);
        assert_eq!(count_linkages_bruteforce(&LinkageQuery::free(&t, (0, 1), 1, 5, false)).unwrap(), 0);
        // Leaf to center of K_{1,3}: two continuations, each undone.
        let s = star(3);
        assert_eq!(quadratic_form(&s, (1, 0), 1, 1).unwrap(), 2);
        assert_eq!(quadratic_form(&t, (0, 1), 1, 3).unwrap(), 0);
    }

    #[test]
    fn cycle_four() {
        let c = cycle(4);
        let q = quadratic_form(&c, (0, 1), 1, 2).unwrap();
        assert_eq!(q, 1);
        assert_eq!(count_linkages_bruteforce(&LinkageQuery::gram(&c, (0, 1), 1, 2)).unwrap(), q);
        let q = quadratic_form(&c, (0, 1), 2, 2).unwrap();
        assert_eq!(count_linkages_bruteforce(&LinkageQuery::gram(&c, (0, 1), 2, 2)).unwrap(), q);
    }

    #[test]
    fn dense_matrix_power_oracle() {
        // Same number through f64 dense powers, small enough to be exact.
        let g = petersen();
        let b = crate::spectral::nonbacktracking_matrix(&g).to_dense();
        let e = b.nrows();
        let bl = b.pow(2);
        let t = &bl * bl.transpose();
        let t2 = &t * &t;
        let s = DirectedEdgeSpace::new(&g);
        for a in [0, 7, e - 1] {
            let (u, v) = s.arc(a);
            assert_eq!(quadratic_form(&g, (u, v), 2, 2).unwrap(), t2[(a, a)].round() as u128);
        }
    }

    #[test]
    fn encoding_bound_values() {
        let b = encoding_bound(EncodingBoundParams { k: 1, ell: 1, d: 4 }).unwrap();
        let direct = 2.0 * 4.0 * 256.0 * 4.0 * 3f64.powf(2.5);
        assert!((b.value - direct).abs() < 1e-6 * direct);
        assert!((b.value - 127_700.6).abs() < 0.1, "{}", b.value);
        let mut prev = 0.0;
        for ell in 1..6 {
            let v = encoding_bound(EncodingBoundParams { k: 1, ell, d: 4 }).unwrap().value;
            assert!(v > prev);
            prev = v;
        }
        let far = encoding_bound(EncodingBoundParams { k: 1 << 20, ell: 1 << 20, d: 4 }).unwrap();
        assert!((far.root - 3f64.sqrt()).abs() < 0.01, "{}", far.root);
    }

    #[test]
    fn trace_bound_on_truncations() {
        let gadget = gadget_from_regular(&complete(4), 4).unwrap();
        for (k, ell) in [(1, 1), (1, 2)] {
            let r = verify_trace_bound(&gadget, 4, k, ell, Execution::default()).unwrap();
            assert!(r.passed, "{r:?}");
            if let Some(f) = r.free_linkages_at_argmax {
                assert!(r.max_quadratic_form <= f);
            }
        }
    }

    #[test]
    fn budget_is_enforced() {
        let k6 = complete(6);
        let q = LinkageQuery::free(&k6, (0, 1), 4, 4, true);
        assert!(matches!(
            count_linkages_bruteforce_with_budget(&q, 1000),
            Err(LinkageError::BudgetExceeded { .. })
        ));
    }

    fn small_graph() -> impl Strategy<Value = Graph> {
        (3usize..=9, proptest::collection::vec((0usize..9, 0usize..9), 3..16)).prop_map(|(n, es)| {
            let edges: std::collections::BTreeSet<_> = es
                .into_iter()
                .map(|(a, b)| ((a % n).min(b % n), (a % n).max(b % n)))
                .filter(|(a, b)| a != b)
                .collect();
            Graph::from_edges(n, edges).unwrap()
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]
        #[test]
        fn gram_count_matches_quadratic_form(g in small_graph(), k in 1usize..=2, ell in 1usize..=3, pick in 0usize..64) {
            let edges: Vec<_> = g.edges().collect();
            prop_assume!(!edges.is_empty());
            let (u, v) = edges[pick % edges.len()];
            let q = quadratic_form(&g, (u, v), k, ell).unwrap();
            prop_assert_eq!(count_linkages_bruteforce(&LinkageQuery::gram(&g, (u, v), k, ell)).unwrap(), q);
            let free = count_linkages_bruteforce(&LinkageQuery::free(&g, (u, v), 2 * k, ell + 1, true)).unwrap();
            prop_assert!(q <= free);
        }
    }
}

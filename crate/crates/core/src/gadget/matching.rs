use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GadgetError;
use crate::graph::Graph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpacedMatching {
    pub edges: Vec<(usize, usize)>,
    /// Largest r with 4k(d-1)^r <= n; the greedy always succeeds at this
    /// spacing.
    pub guaranteed_r: usize,
    /// Spacing the greedy was run with.
    pub spacing: usize,
    /// Smallest distance between endpoints of two different edges; `None`
    /// when there is only one edge.
    pub min_distance: Option<usize>,
}

const ATTEMPTS_PER_SPACING: usize = 4;
const EXTRA_SPACING: usize = 3;

/// Greedy matching of size `k` whose edges are pairwise at distance at least
/// r. Starts a few steps above the guaranteed spacing and backs off until the
/// greedy succeeds. Spacing never drops below 1, so the edges are always
/// vertex-disjoint.
pub fn spaced_matching(g: &Graph, k: usize, seed: u64) -> Result<SpacedMatching, GadgetError> {
    let n = g.n();
    let d = g.regular_degree().ok_or(GadgetError::NotRegular { expected: 0 })?;
    if k == 0 || 4 * k > n || d == 0 {
        return Err(GadgetError::HostTooSmall { n, k });
    }
    let guaranteed_r = guaranteed_spacing(n, d, k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges: Vec<(usize, usize)> = g.edges().collect();
    let top = guaranteed_r.saturating_add(EXTRA_SPACING).min(n);
    for spacing in (1..=top.max(1)).rev() {
        for _ in 0..ATTEMPTS_PER_SPACING {
            edges.shuffle(&mut rng);
            if let Some(chosen) = greedy(g, &edges, k, spacing) {
                let min_distance = matching_min_distance(g, &chosen);
                return Ok(SpacedMatching { edges: chosen, guaranteed_r, spacing, min_distance });
            }
        }
    }
    Err(GadgetError::HostTooSmall { n, k })
}

fn guaranteed_spacing(n: usize, d: usize, k: usize) -> usize {
    if d <= 2 {
        return n;
    }
    let mut r = 0;
    let mut reach = 4 * k;
    while let Some(next) = reach.checked_mul(d - 1) {
        if next > n {
            break;
        }
        reach = next;
        r += 1;
    }
    r
}

fn greedy(g: &Graph, order: &[(usize, usize)], k: usize, spacing: usize) -> Option<Vec<(usize, usize)>> {
    // blocked[v]: v is within spacing-1 of a chosen endpoint
    let mut blocked = vec![false; g.n()];
    let mut dist = vec![usize::MAX; g.n()];
    let mut queue = VecDeque::new();
    let mut chosen = Vec::with_capacity(k);
    for &(a, b) in order {
        if blocked[a] || blocked[b] {
            continue;
        }
        chosen.push((a, b));
        if chosen.len() == k {
            return Some(chosen);
        }
        let mut touched = vec![a, b];
        dist[a] = 0;
        dist[b] = 0;
        queue.extend([a, b]);
        while let Some(x) = queue.pop_front() {
            blocked[x] = true;
            if dist[x] + 1 >= spacing {
                continue;
            }
            for &y in g.neighbors(x) {
                if dist[y] == usize::MAX {
                    dist[y] = dist[x] + 1;
                    touched.push(y);
                    queue.push_back(y);
                }
            }
        }
        for v in touched {
            dist[v] = usize::MAX;
        }
    }
    None
}

/// Minimum over pairs of distinct edges of the distance between their
/// endpoint sets, by a labelled multi-source BFS.
pub fn matching_min_distance(g: &Graph, edges: &[(usize, usize)]) -> Option<usize> {
    if edges.len() < 2 {
        return None;
    }
    let n = g.n();
    let mut dist = vec![usize::MAX; n];
    let mut label = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    let mut best = usize::MAX;
    for (i, &(a, b)) in edges.iter().enumerate() {
        for v in [a, b] {
            if label[v] != usize::MAX && label[v] != i {
                best = 0;
            }
            dist[v] = 0;
            label[v] = i;
            queue.push_back(v);
        }
    }
    while let Some(x) = queue.pop_front() {
        for &y in g.neighbors(x) {
            if dist[y] == usize::MAX {
                dist[y] = dist[x] + 1;
                label[y] = label[x];
                queue.push_back(y);
            } else if label[y] != label[x] {
                best = best.min(dist[x] + dist[y] + 1);
            }
        }
    }
    (best != usize::MAX).then_some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{bfs_distances, cycle, petersen};
    use crate::hosts::random_regular;

    fn brute_min_distance(g: &Graph, edges: &[(usize, usize)]) -> Option<usize> {
        let mut best: Option<usize> = None;
        for i in 0..edges.len() {
            let d = bfs_distances(g, &[edges[i].0, edges[i].1]);
            for (j, &(a, b)) in edges.iter().enumerate() {
                if i != j {
                    let x = d[a].unwrap_or(usize::MAX).min(d[b].unwrap_or(usize::MAX));
                    best = Some(best.map_or(x, |c| c.min(x)));
                }
            }
        }
        best
    }

    #[test]
    fn cycle_of_ten_two_edges() {
        let g = cycle(10);
        for seed in 0..10 {
            let m = spaced_matching(&g, 2, seed).unwrap();
            assert_eq!(m.edges.len(), 2);
            assert!(m.min_distance.unwrap() >= 3, "{m:?}");
            assert_eq!(m.min_distance, brute_min_distance(&g, &m.edges));
        }
    }

    #[test]
    fn single_edge_has_infinite_distance() {
        let m = spaced_matching(&petersen(), 1, 0).unwrap();
        assert_eq!(m.edges.len(), 1);
        assert_eq!(m.min_distance, None);
    }

    #[test]
    fn too_small_host() {
        assert!(matches!(spaced_matching(&petersen(), 3, 0), Err(GadgetError::HostTooSmall { .. })));
    }

    #[test]
    fn spacing_on_random_host() {
        let g = random_regular(2048, 4, 5).unwrap();
        let m = spaced_matching(&g, 24, 1).unwrap();
        assert_eq!(m.guaranteed_r, 2);
        let dist = m.min_distance.unwrap();
        assert!(dist >= m.spacing && m.spacing >= m.guaranteed_r);
        assert_eq!(Some(dist), brute_min_distance(&g, &m.edges));
        for &(a, b) in &m.edges {
            assert!(g.has_edge(a, b));
        }
    }
}

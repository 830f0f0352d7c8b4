use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::HostError;
use crate::graph::Graph;

const MAX_RESTARTS: usize = 10_000;

pub(super) fn validate(n: usize, d: usize) -> Result<(), HostError> {
    if !(n * d).is_multiple_of(2) {
        return Err(HostError::InvalidParams(format!("n*d must be even (n={n}, d={d})")));
    }
    if d >= n {
        return Err(HostError::InvalidParams(format!("degree {d} must be below n={n}")));
    }
    Ok(())
}

/// Simple d-regular graph from the pairing model: stubs are paired one at a
/// time, a pair that would make a loop or a repeated edge is redrawn, and the
/// whole pairing restarts if the leftover stubs admit no valid pair.
/// Deterministic for a given seed.
pub fn random_regular(n: usize, d: usize, seed: u64) -> Result<Graph, HostError> {
    validate(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..MAX_RESTARTS {
        if let Some(adj) = try_pairing(n, d, &mut rng) {
            return Ok(Graph::from_adjacency(adj)?);
        }
    }
    Err(HostError::RetryExhausted(MAX_RESTARTS))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<Vec<usize>>> {
    let mut stubs: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    let mut failures = 0usize;
    while !stubs.is_empty() {
        let len = stubs.len();
        let i = rng.random_range(0..len);
        let j = rng.random_range(0..len);
        let (u, v) = (stubs[i], stubs[j]);
        if i != j && u != v && !adj[u].contains(&v) {
            adj[u].push(v);
            adj[v].push(u);
            let (hi, lo) = if i > j { (i, j) } else { (j, i) };
            stubs.swap_remove(hi);
            stubs.swap_remove(lo);
            failures = 0;
            continue;
        }
        failures += 1;
        if failures >= 64 && len <= 256 {
            let any_valid = (0..len).any(|a| {
                (a + 1..len).any(|b| stubs[a] != stubs[b] && !adj[stubs[a]].contains(&stubs[b]))
            });
            if !any_valid {
                return None;
            }
            failures = 0;
        }
    }
    Some(adj)
}

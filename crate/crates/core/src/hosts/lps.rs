//! Lubotzky–Phillips–Sarnak Cayley graphs X^{p,q}.
//!
//! The p+1 generators come from the integral quaternions
//! a0 + a1 i + a2 j + a3 k of norm p with a0 > 0 odd and a1, a2, a3 even,
//! mapped to 2x2 matrices over F_q through a square root ι of -1:
//!
//! ```text
//!   [ a0 + a1 ι    a2 + a3 ι ]
//!   [ -a2 + a3 ι   a0 - a1 ι ]
//! ```
//!
//! Group elements live in PGL2(F_q), stored as matrices scaled so their
//! first nonzero entry is 1. The vertex set is whatever the generators reach
//! from the identity.
//!
//! When p is a square mod q the generators lie in PSL2(F_q) and the graph is
//! the usual non-bipartite (p+1)-regular graph on q(q²-1)/2 vertices. When p
//! is a non-square the classical graph is bipartite on all of PGL2(F_q). We
//! then look for an involution t of PGL2 with non-square determinant that
//! normalizes the generator set. The twisted generators s·t lie in PSL2 and
//! are closed under inversion. Their Cayley graph on PSL2(F_q) has the
//! classical bipartite graph as its bipartite double cover. So it is
//! connected and non-bipartite, and its nontrivial eigenvalues are those of
//! the classical graph.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::HostError;
use crate::graph::Graph;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LpsVariant {
    /// (p|q) = 1: Cayley graph on PSL2(F_q).
    Psl,
    /// (p|q) = -1: Cayley graph on PSL2(F_q) with generators s·t.
    PslTwisted,
    /// Bipartite Cayley graph on PGL2(F_q).
    PglBipartite,
}

#[derive(Clone, Debug)]
pub struct LpsGraph {
    pub graph: Graph,
    pub variant: LpsVariant,
    pub p: u64,
    pub q: u64,
    /// Normalized generator matrices `[a, b, c, d]` actually used.
    pub generators: Vec<[u64; 4]>,
}

type Mat = [u64; 4];

fn is_prime(x: u64) -> bool {
    x >= 2 && (2..).take_while(|i| i * i <= x).all(|i| !x.is_multiple_of(i))
}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * b % m;
        }
        b = b * b % m;
        e >>= 1;
    }
    r
}

fn is_square_mod(x: u64, q: u64) -> bool {
    !x.is_multiple_of(q) && pow_mod(x, (q - 1) / 2, q) == 1
}

pub(super) fn validate(p: u64, q: u64) -> Result<(), HostError> {
    let bad = |m: String| Err(HostError::InvalidParams(m));
    if p == q {
        return bad(format!("p and q must be distinct (got {p})"));
    }
    for (name, x) in [("p", p), ("q", q)] {
        if !is_prime(x) || x % 4 != 1 {
            return bad(format!("{name}={x} must be a prime congruent to 1 mod 4"));
        }
    }
    if q > 400 {
        return bad(format!("q={q} is beyond desk scale (q <= 400)"));
    }
    if q * q <= 4 * p {
        return bad(format!("q={q} is too small for p={p}: generators would collide"));
    }
    Ok(())
}

fn mul(x: &Mat, y: &Mat, q: u64) -> Mat {
    [
        (x[0] * y[0] + x[1] * y[2]) % q,
        (x[0] * y[1] + x[1] * y[3]) % q,
        (x[2] * y[0] + x[3] * y[2]) % q,
        (x[2] * y[1] + x[3] * y[3]) % q,
    ]
}

fn normalize(x: &Mat, q: u64) -> Mat {
    let lead = *x.iter().find(|&&v| v != 0).expect("nonsingular matrix has a nonzero entry");
    let inv = pow_mod(lead, q - 2, q);
    x.map(|v| v * inv % q)
}

fn det(x: &Mat, q: u64) -> u64 {
    (x[0] * x[3] + q * q - x[1] * x[2] % q) % q
}

fn key(x: &Mat, q: u64) -> u64 {
    ((x[0] * q + x[1]) * q + x[2]) * q + x[3]
}

fn is_scalar(x: &Mat) -> bool {
    x[1] == 0 && x[2] == 0 && x[0] == x[3]
}

/// Quaternions of norm p with a0 > 0 odd and a1, a2, a3 even.
fn four_square_generators(p: u64) -> Vec<[i64; 4]> {
    let r = (p as f64).sqrt() as i64 + 1;
    let mut out = Vec::new();
    for a0 in (1..=r).step_by(2) {
        for a1 in (-r..=r).filter(|x| x % 2 == 0) {
            for a2 in (-r..=r).filter(|x| x % 2 == 0) {
                for a3 in (-r..=r).filter(|x| x % 2 == 0) {
                    if a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3 == p as i64 {
                        out.push([a0, a1, a2, a3]);
                    }
                }
            }
        }
    }
    out
}

fn quaternion_matrix(a: &[i64; 4], iota: u64, q: u64) -> Mat {
    let m = |x: i64| x.rem_euclid(q as i64) as u64;
    let (a0, a1, a2, a3) = (m(a[0]), m(a[1]), m(a[2]), m(a[3]));
    [
        (a0 + a1 * iota) % q,
        (a2 + a3 * iota) % q,
        (q - a2 + a3 * iota) % q,
        (a0 + q * q - a1 * iota) % q,
    ]
}

fn base_generators(p: u64, q: u64) -> Result<Vec<Mat>, HostError> {
    let iota = (1..q).find(|x| x * x % q == q - 1).expect("q = 1 mod 4 has a square root of -1");
    let quats = four_square_generators(p);
    if quats.len() as u64 != p + 1 {
        return Err(HostError::InvalidParams(format!(
            "found {} generators for p={p}, expected {}",
            quats.len(),
            p + 1
        )));
    }
    Ok(quats.iter().map(|a| normalize(&quaternion_matrix(a, iota, q), q)).collect())
}

/// First (in lexicographic order of normalized form) involution of PGL2(F_q)
/// with non-square determinant whose conjugation maps `gens` onto itself.
fn find_twist(gens: &[Mat], q: u64) -> Option<Mat> {
    let keys: std::collections::HashSet<u64> = gens.iter().map(|g| key(g, q)).collect();
    let leads = (0..q).flat_map(|b| (0..q).flat_map(move |c| (0..q).map(move |d| [1, b, c, d])));
    let tails = (0..q).flat_map(|d| (0..q).map(move |c| [0, 1, c, d]));
    leads.chain(tails).find(|t| {
        let dt = det(t, q);
        dt != 0
            && !is_square_mod(dt, q)
            && is_scalar(&mul(t, t, q))
            && gens.iter().all(|s| keys.contains(&key(&normalize(&mul(&mul(t, s, q), t, q), q), q)))
    })
}

/// Cayley graph of the group generated by `gens` (right multiplication).
fn cayley_closure(gens: &[Mat], q: u64) -> Result<Graph, HostError> {
    let identity: Mat = [1, 0, 0, 1];
    let mut index: HashMap<u64, usize> = HashMap::new();
    let mut elements = vec![identity];
    index.insert(key(&identity, q), 0);
    let mut adj: Vec<Vec<usize>> = Vec::new();
    let mut head = 0;
    while head < elements.len() {
        let x = elements[head];
        let mut row = Vec::with_capacity(gens.len());
        for s in gens {
            let y = normalize(&mul(&x, s, q), q);
            let next = elements.len();
            let j = *index.entry(key(&y, q)).or_insert(next);
            if j == next {
                elements.push(y);
            }
            row.push(j);
        }
        adj.push(row);
        head += 1;
    }
    Graph::from_adjacency(adj).map_err(|e| {
        HostError::InvalidParams(format!("generators do not give a simple Cayley graph: {e}"))
    })
}

fn finish(
    p: u64,
    q: u64,
    gens: Vec<Mat>,
    variant: LpsVariant,
) -> Result<LpsGraph, HostError> {
    let graph = cayley_closure(&gens, q)?;
    let psl_order = (q * (q * q - 1) / 2) as usize;
    let expected = match variant {
        LpsVariant::PglBipartite => 2 * psl_order,
        _ => psl_order,
    };
    if graph.n() != expected {
        return Err(HostError::GroupOrder { found: graph.n(), expected });
    }
    Ok(LpsGraph { graph, variant, p, q, generators: gens })
}

/// Non-bipartite (p+1)-regular LPS graph on q(q²-1)/2 vertices. Uses the
/// twisted generators when p is a non-square mod q; fails if no twisting
/// involution exists for the pair.
pub fn lps_construct(p: u64, q: u64) -> Result<LpsGraph, HostError> {
    validate(p, q)?;
    let gens = base_generators(p, q)?;
    if is_square_mod(p, q) {
        return finish(p, q, gens, LpsVariant::Psl);
    }
    let t = find_twist(&gens, q).ok_or_else(|| {
        HostError::InvalidParams(format!(
            "(p|q) = -1 and no twisting involution exists for p={p}, q={q}; use lps_bipartite"
        ))
    })?;
    let twisted = gens.iter().map(|s| normalize(&mul(s, &t, q), q)).collect();
    finish(p, q, twisted, LpsVariant::PslTwisted)
}

/// The classical bipartite graph on PGL2(F_q); requires (p|q) = -1.
pub fn lps_bipartite(p: u64, q: u64) -> Result<LpsGraph, HostError> {
    validate(p, q)?;
    if is_square_mod(p, q) {
        return Err(HostError::InvalidParams(format!("p={p} is a square mod q={q}")));
    }
    let gens = base_generators(p, q)?;
    finish(p, q, gens, LpsVariant::PglBipartite)
}

pub fn lps_graph(p: u64, q: u64) -> Result<Graph, HostError> {
    lps_construct(p, q).map(|l| l.graph)
}

//! The exponentially decaying test vector around the planted gadget, and the
//! layer-by-layer dispersion inequality for eigenvectors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{adjacency_apply, SpectralError};
use crate::gadget::Splice;
use crate::graph::{distance_layers, Graph, LayerDecomposition, VertexSet};

const EXACT_TOL: f64 = 1e-10;
const PSD_CAP: usize = 4096;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    U,
    V,
}

/// Test vector on Ball_{h_max}(U ∪ V) in G′; zero elsewhere.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KahaleVector {
    pub values: Vec<f64>,
    pub layers: LayerDecomposition,
    /// Layer and branch of every vertex in the ball.
    pub tags: Vec<Option<(usize, Branch)>>,
    pub h_max: usize,
    pub d: usize,
}

impl KahaleVector {
    /// s on X_{h,U}: (d-1)^{-h/2}. On X_{0,V}: 2/√(d-1) - (d-1)^{-3/2}. On
    /// X_{h,V}, h >= 1: (2/(d-1)) (d-1)^{-(h-1)/2}.
    pub fn formula(d: usize, h: usize, branch: Branch) -> f64 {
        let k = (d - 1) as f64;
        match (branch, h) {
            (Branch::U, _) => k.powf(-(h as f64) / 2.0),
            (Branch::V, 0) => 2.0 / k.sqrt() - k.powf(-1.5),
            (Branch::V, _) => 2.0 / k * k.powf(-((h - 1) as f64) / 2.0),
        }
    }

    /// Σ_{y ∈ X_h} s(y)² for h = 0..=h_max.
    pub fn layer_sums(&self) -> Vec<f64> {
        self.layers.layers.iter().map(|l| l.iter().map(|v| self.values[v].powi(2)).sum()).collect()
    }
}

pub fn kahale_vector(splice: &Splice, h_max: usize) -> Result<KahaleVector, SpectralError> {
    let g = &splice.graph;
    let d = splice.d;
    let core = splice.core();
    let layers = distance_layers(g, &core, h_max);
    if layers.depth() < h_max {
        return Err(SpectralError::GirthTooSmall {
            h_max,
            detail: format!("graph ends at depth {}", layers.depth()),
        });
    }
    let layer_of = layers.layer_of();
    let mut tags: Vec<Option<(usize, Branch)>> = vec![None; g.n()];
    for u in &splice.planted_u {
        tags[u] = Some((0, Branch::U));
    }
    for v in &splice.planted_v {
        tags[v] = Some((0, Branch::V));
    }
    for h in 1..=h_max {
        for y in layers.layers[h].iter() {
            let mut parents = g.neighbors(y).iter().filter(|&&w| layer_of[w] == Some(h - 1));
            let p = *parents.next().expect("every vertex of layer h has a neighbor in layer h-1");
            if parents.next().is_some() {
                return Err(SpectralError::GirthTooSmall {
                    h_max,
                    detail: format!("vertex {y} in layer {h} has two neighbors in layer {}", h - 1),
                });
            }
            if h < h_max {
                if let Some(&w) = g.neighbors(y).iter().find(|&&w| layer_of[w] == Some(h)) {
                    return Err(SpectralError::GirthTooSmall {
                        h_max,
                        detail: format!("edge {y}-{w} inside layer {h}"),
                    });
                }
            }
            let branch = tags[p].expect("parents are tagged first").1;
            tags[y] = Some((h, branch));
        }
    }
    let values = tags
        .iter()
        .map(|t| t.map_or(0.0, |(h, b)| KahaleVector::formula(d, h, b)))
        .collect();
    Ok(KahaleVector { values, layers, tags, h_max, d })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SubsolutionReport {
    pub mu: f64,
    pub checked: usize,
    pub violations: usize,
    pub max_violation: f64,
    /// Vertices with (As)(y) = μ s(y) up to rounding.
    pub tight: usize,
    /// Number of vertices with positive slack, per (layer, branch).
    pub slack_by_layer: Vec<(usize, Branch, usize)>,
    /// Smallest slack on X_{1,V}, if that layer was checked.
    pub min_slack_x1v: Option<f64>,
    /// Slack is positive on all of X_{1,V} and zero everywhere else.
    pub slack_pattern_ok: bool,
    pub passed: bool,
}

/// Checks (As)(y) <= μ s(y) on Ball_{h_max-1}(X₀) and records where the
/// inequality is strict.
pub fn verify_subsolution(g: &Graph, s: &KahaleVector, mu: f64) -> SubsolutionReport {
    let mut a_s = vec![0.0; g.n()];
    adjacency_apply(g, &s.values, &mut a_s);
    let mut report = SubsolutionReport {
        mu,
        checked: 0,
        violations: 0,
        max_violation: 0.0,
        tight: 0,
        slack_by_layer: Vec::new(),
        min_slack_x1v: None,
        slack_pattern_ok: true,
        passed: true,
    };
    let mut counts: std::collections::BTreeMap<(usize, u8), usize> = Default::default();
    for (y, tag) in s.tags.iter().enumerate() {
        let Some((h, branch)) = *tag else { continue };
        if h + 1 > s.h_max {
            continue;
        }
        report.checked += 1;
        let slack = mu * s.values[y] - a_s[y];
        let scale = EXACT_TOL * (1.0 + mu * s.values[y]);
        let on_x1v = h == 1 && branch == Branch::V;
        if slack < -scale {
            report.violations += 1;
            report.max_violation = report.max_violation.max(-slack);
        }
        if slack > scale {
            *counts.entry((h, branch as u8)).or_default() += 1;
        } else {
            report.tight += 1;
        }
        if on_x1v {
            report.min_slack_x1v = Some(report.min_slack_x1v.map_or(slack, |m: f64| m.min(slack)));
            report.slack_pattern_ok &= slack > scale;
        } else {
            report.slack_pattern_ok &= slack.abs() <= scale;
        }
    }
    report.slack_by_layer = counts
        .into_iter()
        .map(|((h, b), c)| (h, if b == Branch::U as u8 { Branch::U } else { Branch::V }, c))
        .collect();
    report.passed = report.violations == 0;
    report
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LayerMass {
    /// Σ_{v ∈ X_h} x(v)² per layer.
    pub per_layer: Vec<f64>,
    /// ‖x‖² over all coordinates.
    pub total: f64,
    /// per_layer / total.
    pub fractions: Vec<f64>,
}

pub fn layer_mass(vec: &[f64], layers: &LayerDecomposition) -> LayerMass {
    let per_layer: Vec<f64> =
        layers.layers.iter().map(|l| l.iter().map(|v| vec[v] * vec[v]).sum()).collect();
    let total: f64 = vec.iter().map(|x| x * x).sum();
    let fractions = per_layer.iter().map(|m| if total > 0.0 { m / total } else { 0.0 }).collect();
    LayerMass { per_layer, total, fractions }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KahaleLemmaReport {
    pub h: usize,
    pub mu: f64,
    /// Neighbor counts [[X_{h-1}→X_{h-1}, X_{h-1}→X_h], [X_h→X_{h-1}, X_h→X_h]].
    pub valencies: [[usize; 2]; 2],
    /// s(u)/s(v) across edges from X_{h-1} to X_h.
    pub ratio: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub ball_size: usize,
    /// B = μ² P_{≤h-1} + μ(γ-α) P_h - μβ P_{h-1} - A_h P_{≤h-1} A_h.
    pub b_min_eigenvalue: f64,
    pub b_norm: f64,
    pub b_psd: bool,
    /// Same with A_h P_{h-1} A_h in the last term.
    pub b_alt_min_eigenvalue: f64,
    pub b_alt_psd: bool,
    /// min_i (B s)_i, nonnegative by construction of α, β, γ.
    pub b_s_min: f64,
    /// |(Ag)(u)| = μ|g(u)| on Ball_{h-1}(X).
    pub g_is_eigen_on_ball: bool,
    /// Σ_{X_h} g² / Σ_{X_h} s².
    pub lhs: f64,
    /// Σ_{X_{h-1}} g² / Σ_{X_{h-1}} s².
    pub rhs: f64,
    /// lhs >= rhs, asserted only when `g_is_eigen_on_ball`.
    pub conclusion_holds: Option<bool>,
}

fn constant<I: Iterator<Item = usize>>(mut it: I) -> Result<usize, (usize, usize)> {
    let Some(first) = it.next() else { return Ok(0) };
    match it.find(|&x| x != first) {
        Some(other) => Err((first, other)),
        None => Ok(first),
    }
}

fn constant_f64<I: Iterator<Item = f64>>(mut it: I) -> Result<f64, (f64, f64)> {
    let Some(first) = it.next() else { return Ok(0.0) };
    match it.find(|&x| (x - first).abs() > EXACT_TOL * (1.0 + first.abs())) {
        Some(other) => Err((first, other)),
        None => Ok(first),
    }
}

/// Verifies the hypotheses of the dispersion lemma on (w, x, h, s, μ),
/// assembles the matrix B of its proof and checks that it is positive
/// semidefinite, then evaluates the conclusion for `g`.
pub fn kahale_lemma_check(
    w: &Graph,
    x: &VertexSet,
    h: usize,
    s: &[f64],
    mu: f64,
    g: &[f64],
) -> Result<KahaleLemmaReport, SpectralError> {
    let n = w.n();
    if h == 0 || s.len() != n || g.len() != n || x.is_empty() {
        return Err(SpectralError::InvalidInput("need h >= 1, a nonempty X and vectors of length n".into()));
    }
    let layers = distance_layers(w, x, h);
    if layers.depth() < h {
        return Err(SpectralError::InvalidInput(format!("no vertices at distance {h} from X")));
    }
    let layer_of = layers.layer_of();
    let (lo, hi) = (&layers.layers[h - 1], &layers.layers[h]);
    let count = |y: usize, j: usize| w.neighbors(y).iter().filter(|&&z| layer_of[z] == Some(j)).count();
    let mut valencies = [[0usize; 2]; 2];
    for (a, layer) in [lo, hi].into_iter().enumerate() {
        for b in 0..2 {
            valencies[a][b] = constant(layer.iter().map(|y| count(y, h - 1 + b))).map_err(|(p, q)| {
                SpectralError::PreconditionViolated {
                    condition: 1,
                    detail: format!("X_{} has nodes with {p} and {q} neighbors in X_{}", h - 1 + a, h - 1 + b),
                }
            })?;
        }
    }

    let ball = layers.ball();
    if ball.iter().any(|v| s[v] <= 0.0) {
        return Err(SpectralError::PreconditionViolated {
            condition: 2,
            detail: "s must be positive on the ball for the ratio to be defined".into(),
        });
    }
    let edge_ratios = lo.iter().flat_map(|u| {
        w.neighbors(u).iter().filter(|&&v| layer_of[v] == Some(h)).map(move |&v| s[u] / s[v])
    });
    let ratio = constant_f64(edge_ratios).map_err(|(p, q)| SpectralError::PreconditionViolated {
        condition: 2,
        detail: format!("s(u)/s(v) takes values {p} and {q}"),
    })?;

    let mut a_s = vec![0.0; n];
    adjacency_apply(w, s, &mut a_s);
    if let Some(u) = s.iter().position(|&v| v < 0.0) {
        return Err(SpectralError::PreconditionViolated { condition: 3, detail: format!("s({u}) < 0") });
    }
    for u in ball.iter().filter(|&u| layer_of[u] < Some(h)) {
        if a_s[u] > mu * s[u] + EXACT_TOL * (1.0 + mu * s[u]) {
            return Err(SpectralError::PreconditionViolated {
                condition: 3,
                detail: format!("(As)({u}) = {} > μ s({u}) = {}", a_s[u], mu * s[u]),
            });
        }
    }

    // Inside the ball A_h acts as A except that edges leaving Ball_h are cut.
    let in_ball = |z: usize| layer_of[z].is_some();
    let sum_in = |y: usize, j: usize| -> f64 {
        w.neighbors(y).iter().filter(|&&z| layer_of[z] == Some(j)).map(|&z| s[z]).sum()
    };
    let gamma = constant_f64(hi.iter().map(|y| (sum_in(y, h - 1) + sum_in(y, h)) / s[y]))
        .map_err(|(p, q)| SpectralError::PreconditionViolated {
            condition: 2,
            detail: format!("P_h A_h s / s takes values {p} and {q}"),
        })?;
    let alpha = constant_f64(hi.iter().map(|y| sum_in(y, h) / s[y])).map_err(|(p, q)| {
        SpectralError::PreconditionViolated { condition: 2, detail: format!("α takes values {p} and {q}") }
    })?;
    let beta = constant_f64(lo.iter().map(|y| sum_in(y, h) / s[y])).map_err(|(p, q)| {
        SpectralError::PreconditionViolated { condition: 2, detail: format!("β takes values {p} and {q}") }
    })?;

    let k = ball.len();
    if k > PSD_CAP {
        return Err(SpectralError::SizeExceeded { size: k, cap: PSD_CAP });
    }
    let mut index = vec![usize::MAX; n];
    for (i, v) in ball.iter().enumerate() {
        index[v] = i;
    }
    let diag = |v: usize| match layer_of[v] {
        Some(l) if l + 1 == h => mu * mu - mu * beta,
        Some(l) if l < h => mu * mu,
        _ => mu * (gamma - alpha),
    };
    let assemble = |centers: &dyn Fn(usize) -> bool| {
        let mut b = DMatrix::<f64>::zeros(k, k);
        for v in ball.iter() {
            b[(index[v], index[v])] = diag(v);
        }
        for c in ball.iter().filter(|&c| centers(c)) {
            let nb: Vec<usize> = w.neighbors(c).iter().copied().filter(|&z| in_ball(z)).collect();
            for &a in &nb {
                for &bb in &nb {
                    b[(index[a], index[bb])] -= 1.0;
                }
            }
        }
        b
    };
    let b_main = assemble(&|c| layer_of[c] < Some(h));
    let b_alt = assemble(&|c| layer_of[c] == Some(h - 1));
    let s_ball = nalgebra::DVector::from_iterator(k, ball.iter().map(|v| s[v]));
    let b_s_min = (&b_main * &s_ball).min();
    let spectrum = |m: DMatrix<f64>| {
        let ev = m.symmetric_eigenvalues();
        (ev.min(), ev.iter().fold(0.0f64, |a, x| a.max(x.abs())))
    };
    let (b_min_eigenvalue, b_norm) = spectrum(b_main);
    let (b_alt_min_eigenvalue, b_alt_norm) = spectrum(b_alt);

    let mut a_g = vec![0.0; n];
    adjacency_apply(w, g, &mut a_g);
    let g_is_eigen_on_ball = ball
        .iter()
        .filter(|&u| layer_of[u] < Some(h))
        .all(|u| (a_g[u].abs() - mu * g[u].abs()).abs() <= 1e-9 * (1.0 + mu * g[u].abs()));
    let mass = |layer: &VertexSet, v: &[f64]| layer.iter().map(|y| v[y] * v[y]).sum::<f64>();
    let lhs = mass(hi, g) / mass(hi, s);
    let rhs = mass(lo, g) / mass(lo, s);
    let conclusion_holds = g_is_eigen_on_ball.then(|| lhs >= rhs - 1e-9 * rhs.abs().max(1.0));

    Ok(KahaleLemmaReport {
        h,
        mu,
        valencies,
        ratio,
        alpha,
        beta,
        gamma,
        ball_size: k,
        b_min_eigenvalue,
        b_norm,
        b_psd: b_min_eigenvalue >= -1e-9 * b_norm.max(1.0),
        b_alt_min_eigenvalue,
        b_alt_psd: b_alt_min_eigenvalue >= -1e-9 * b_alt_norm.max(1.0),
        b_s_min,
        g_is_eigen_on_ball,
        lhs,
        rhs,
        conclusion_holds,
    })
}

/// `core` with `first` children hung on every core vertex and d-1 children
/// on every later vertex, down to `depth`. Returns the graph and each
/// vertex's distance from the core.
pub fn tree_slice(core: &Graph, first: usize, d: usize, depth: usize) -> (Graph, Vec<usize>) {
    let mut adj = core.to_adjacency();
    let mut level = vec![0; core.n()];
    let mut frontier: Vec<(usize, usize)> = (0..core.n()).map(|v| (v, first)).collect();
    for t in 1..=depth {
        let mut next = Vec::new();
        for (p, c) in frontier {
            for _ in 0..c {
                let x = adj.len();
                adj.push(vec![p]);
                adj[p].push(x);
                level.push(t);
                next.push((x, d.saturating_sub(1)));
            }
        }
        frontier = next;
    }
    (Graph::from_adjacency(adj).expect("a tree hung on a simple graph is simple"), level)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::cycle;

    #[test]
    fn vector_on_a_constructed_graph() {
        let host = crate::gadget::high_girth_regular(2000, 4, 7, 3).unwrap().graph;
        let c = crate::gadget::construct_pipeline(4, &host, 12, 5).unwrap();
        let r = crate::graph::girth(&c.splice.graph).finite().unwrap();
        let h_max = r / 2;
        assert!(h_max >= 2, "girth {r}");
        let s = kahale_vector(&c.splice, h_max).unwrap();
        let sums = s.layer_sums();
        let expect = 12.0 / 3.0 + 2.0 * 12.0 * 2.0 / 3.0;
        for h in 1..=h_max {
            assert!((sums[h] - expect).abs() < 1e-9, "layer {h}: {}", sums[h]);
        }
        let mu = 2.0 * 3f64.sqrt();
        let rep = verify_subsolution(&c.splice.graph, &s, mu);
        assert!(rep.passed && rep.slack_pattern_ok, "{rep:?}");
        assert!((rep.min_slack_x1v.unwrap() - 3f64.powf(-1.5)).abs() < 1e-12);
    }

    #[test]
    fn tree_slice_psd() {
        for d in [3usize, 4, 6] {
            let (w, level) = tree_slice(&Graph::empty(1), d, d, 6);
            let k = (d - 1) as f64;
            let s: Vec<f64> = level.iter().map(|&l| k.powf(-(l as f64) / 2.0)).collect();
            let x = VertexSet::singleton(w.n(), 0).unwrap();
            for h in 1..=(if d == 6 { 4 } else { 5 }) {
                let r = kahale_lemma_check(&w, &x, h, &s, 2.0 * k.sqrt(), &s).unwrap();
                assert!(r.b_psd, "d={d} h={h}: {r:?}");
                assert!(r.b_s_min >= -1e-9);
                assert_eq!(r.alpha, 0.0);
                // As = μs fails at the root, so the conclusion is not asserted.
                assert_eq!(r.conclusion_holds, None);
            }
        }
    }

    #[test]
    fn equality_when_s_is_an_exact_eigenvector() {
        // A cycle core with four children per core vertex: at d = 5 the
        // vector (d-1)^{-h/2} satisfies As = 4s on every non-leaf vertex.
        let (w, level) = tree_slice(&cycle(7), 4, 5, 4);
        let s: Vec<f64> = level.iter().map(|&l| 4f64.powf(-(l as f64) / 2.0)).collect();
        let x = VertexSet::range(w.n(), 0..7);
        for h in 1..=3 {
            let r = kahale_lemma_check(&w, &x, h, &s, 4.0, &s).unwrap();
            assert!(r.b_psd);
            assert!(r.g_is_eigen_on_ball);
            assert_eq!(r.conclusion_holds, Some(true));
            assert!((r.lhs - r.rhs).abs() < 1e-12 && (r.lhs - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn uneven_valency_is_rejected() {
        let mut adj = vec![vec![1, 2], vec![0, 3, 4], vec![0], vec![1], vec![1]];
        adj[2].push(5);
        adj.push(vec![2]);
        let w = Graph::from_adjacency(adj).unwrap();
        let x = VertexSet::singleton(6, 0).unwrap();
        let s = vec![1.0; 6];
        let err = kahale_lemma_check(&w, &x, 2, &s, 10.0, &s).unwrap_err();
        assert!(matches!(err, SpectralError::PreconditionViolated { condition: 1, .. }), "{err}");
    }

    #[test]
    fn layer_mass_of_indicator() {
        let (w, _) = tree_slice(&Graph::empty(1), 3, 3, 3);
        let layers = distance_layers(&w, &VertexSet::singleton(w.n(), 0).unwrap(), 3);
        let mut v = vec![0.0; w.n()];
        v[0] = 2.0;
        let m = layer_mass(&v, &layers);
        assert_eq!(m.per_layer, vec![4.0, 0.0, 0.0, 0.0]);
        assert_eq!(m.total, 4.0);
        let ones = vec![1.0; w.n()];
        let m = layer_mass(&ones, &layers);
        assert_eq!(m.per_layer, vec![1.0, 3.0, 6.0, 12.0]);
    }
}

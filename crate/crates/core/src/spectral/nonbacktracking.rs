use nalgebra::{Complex, DMatrix, Schur};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::perron::{perron_radius, PerronBracket};
use super::{dense_adjacency, Method, SpectralError, DEFAULT_DENSE_CAP};
use crate::graph::{two_core, Graph};
use crate::par::derive_seed;

/// The 2m directed edges of a graph. Arc (u, v) has index
/// `row_start(u) + position of v in u's sorted neighbor list`.
#[derive(Clone, Debug)]
pub struct DirectedEdgeSpace {
    tail: Vec<usize>,
    head: Vec<usize>,
    reverse: Vec<usize>,
    /// Index of the first arc leaving each vertex, plus a final sentinel.
    out_start: Vec<usize>,
}

impl DirectedEdgeSpace {
    pub fn new(g: &Graph) -> Self {
        let head = g.arc_targets().to_vec();
        let mut tail = Vec::with_capacity(head.len());
        let mut out_start = Vec::with_capacity(g.n() + 1);
        for u in 0..g.n() {
            out_start.push(g.row_start(u));
            tail.extend(std::iter::repeat_n(u, g.degree(u)));
        }
        out_start.push(head.len());
        let reverse = (0..head.len())
            .map(|a| g.arc_index(head[a], tail[a]).expect("graph is symmetric"))
            .collect();
        DirectedEdgeSpace { tail, head, reverse, out_start }
    }

    pub fn len(&self) -> usize {
        self.head.len()
    }

    pub fn is_empty(&self) -> bool {
        self.head.is_empty()
    }

    pub fn arc(&self, index: usize) -> (usize, usize) {
        (self.tail[index], self.head[index])
    }

    pub fn index(&self, u: usize, v: usize) -> Option<usize> {
        let lo = *self.out_start.get(u)?;
        let hi = self.out_start[u + 1];
        self.head[lo..hi].binary_search(&v).ok().map(|i| lo + i)
    }

    pub fn reverse(&self, index: usize) -> usize {
        self.reverse[index]
    }

    /// Arcs leaving `v`.
    pub fn out_arcs(&self, v: usize) -> std::ops::Range<usize> {
        self.out_start[v]..self.out_start[v + 1]
    }

    pub fn tail(&self, index: usize) -> usize {
        self.tail[index]
    }

    pub fn head(&self, index: usize) -> usize {
        self.head[index]
    }
}

/// B[(u,v),(w,x)] = 1 iff v = w and x ≠ u, as a sparse operator.
#[derive(Clone, Debug)]
pub struct NonBacktracking {
    pub space: DirectedEdgeSpace,
}

pub fn nonbacktracking_matrix(g: &Graph) -> NonBacktracking {
    NonBacktracking { space: DirectedEdgeSpace::new(g) }
}

impl NonBacktracking {
    pub fn dim(&self) -> usize {
        self.space.len()
    }

    /// Column indices of the ones in row `a`.
    pub fn row(&self, a: usize) -> Vec<usize> {
        let r = self.space.reverse(a);
        self.space.out_arcs(self.space.head(a)).filter(|&b| b != r).collect()
    }

    /// y = B x, using (Bx)(u→v) = Σ_{v→x} x − x(v→u).
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let s = &self.space;
        let n = s.out_start.len() - 1;
        let out_sum: Vec<f64> = (0..n).map(|v| s.out_arcs(v).map(|b| x[b]).sum()).collect();
        for a in 0..s.len() {
            y[a] = out_sum[s.head[a]] - x[s.reverse[a]];
        }
    }

    /// y = Bᵀ x, using (Bᵀx)(v→w) = Σ_{u→v} x − x(w→v).
    pub fn apply_transpose(&self, x: &[f64], y: &mut [f64]) {
        let s = &self.space;
        let n = s.out_start.len() - 1;
        // Arcs into v are the reverses of arcs out of v.
        let in_sum: Vec<f64> = (0..n).map(|v| s.out_arcs(v).map(|b| x[s.reverse[b]]).sum()).collect();
        for a in 0..s.len() {
            y[a] = in_sum[s.tail[a]] - x[s.reverse[a]];
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let k = self.dim();
        let mut m = DMatrix::zeros(k, k);
        for a in 0..k {
            for b in self.row(a) {
                m[(a, b)] = 1.0;
            }
        }
        m
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NbMode {
    Dense,
    RadiusOnly,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NbSpectrumReport {
    pub method: Method,
    pub dim: usize,
    /// (re, im) pairs, by decreasing modulus; empty in radius-only mode.
    pub eigenvalues: Vec<(f64, f64)>,
    pub radius: f64,
    /// Power-iteration bracket, radius-only mode.
    pub bracket: Option<PerronBracket>,
}

const RADIUS_TOL: f64 = 1e-9;
const RADIUS_MAX_ITER: usize = 200_000;

/// Eigenvalues of a real square matrix. The QR iteration is stationary on
/// permutation-like matrices (B of a cycle is one), so a failed attempt is
/// retried after a random orthogonal similarity.
fn general_eigenvalues(m: DMatrix<f64>) -> Result<Vec<Complex<f64>>, SpectralError> {
    // Deflating at machine epsilon stalls on the clustered unit-modulus
    // spectra that subdivided graphs produce.
    const EPS: f64 = 1e-14;
    const RETRIES: u64 = 4;
    let k = m.nrows();
    let max_niter = 200 * k.max(10);
    if let Some(s) = Schur::try_new(m.clone(), EPS, max_niter) {
        return Ok(s.complex_eigenvalues().iter().copied().collect());
    }
    for attempt in 0..RETRIES {
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(k as u64, attempt));
        let q = DMatrix::from_fn(k, k, |_, _| rng.random::<f64>() - 0.5).qr().q();
        let rotated = q.transpose() * &m * &q;
        if let Some(s) = Schur::try_new(rotated, EPS, max_niter) {
            return Ok(s.complex_eigenvalues().iter().copied().collect());
        }
    }
    Err(SpectralError::ConvergenceFailure { iterations: max_niter, residual: f64::NAN })
}

pub fn nb_spectrum(g: &Graph, mode: NbMode) -> Result<NbSpectrumReport, SpectralError> {
    nb_spectrum_capped(g, mode, DEFAULT_DENSE_CAP)
}

pub fn nb_spectrum_capped(g: &Graph, mode: NbMode, cap: usize) -> Result<NbSpectrumReport, SpectralError> {
    let b = nonbacktracking_matrix(g);
    let dim = b.dim();
    match mode {
        NbMode::Dense => {
            if dim > cap {
                return Err(SpectralError::SizeExceeded { size: dim, cap });
            }
            // Arcs outside the 2-core are transient: ordering them into the
            // core first and out of it last makes B block triangular with
            // nilpotent blocks there, so they only contribute zeros.
            let core = two_core(g);
            let core_b = nonbacktracking_matrix(&g.induced_subgraph(&core));
            let mut ev: Vec<Complex<f64>> = if core_b.dim() == 0 {
                Vec::new()
            } else {
                general_eigenvalues(core_b.to_dense())?
            };
            ev.resize(dim, Complex::new(0.0, 0.0));
            ev.sort_by(|x, y| y.norm().total_cmp(&x.norm()).then(y.re.total_cmp(&x.re)));
            let radius = ev.first().map_or(0.0, |z| z.norm());
            Ok(NbSpectrumReport {
                method: Method::Dense,
                dim,
                eigenvalues: ev.iter().map(|z| (z.re, z.im)).collect(),
                radius,
                bracket: None,
            })
        }
        NbMode::RadiusOnly => {
            // B is nilpotent exactly when the graph is a forest.
            let components = crate::graph::component_count(g);
            let bracket = if g.m() + components == g.n() {
                PerronBracket { estimate: 0.0, lower: 0.0, upper: 0.0, iterations: 0, converged: true }
            } else {
                perron_radius(|x, y| b.apply(x, y), dim, false, RADIUS_TOL, RADIUS_MAX_ITER)
            };
            if !bracket.converged {
                return Err(SpectralError::ConvergenceFailure {
                    iterations: bracket.iterations,
                    residual: bracket.upper - bracket.estimate,
                });
            }
            Ok(NbSpectrumReport {
                method: Method::Iterative,
                dim,
                eigenvalues: Vec::new(),
                radius: bracket.upper,
                bracket: Some(bracket),
            })
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IharaReport {
    pub passed: bool,
    pub tolerance: f64,
    /// Largest distance between matched eigenvalues.
    pub max_deviation: f64,
    pub n: usize,
    pub m: usize,
    pub regular: bool,
    pub nb_eigenvalues: Vec<(f64, f64)>,
    pub predicted: Vec<(f64, f64)>,
}

/// Compares spec(B) with the eigenvalues predicted from A and D. For a
/// d-regular graph these are the roots of λ² - μλ + (d-1) over μ ∈ spec(A)
/// plus ±1 with multiplicity m - n each. Otherwise they are the eigenvalues
/// of the linearization [[A, I - D], [I, 0]] of the pencil
/// λ²I - λA + (D - I) on the 2-core, adjusted by ±1 with multiplicity
/// m - n there, plus zeros up to 2m.
pub fn ihara_bass_check(g: &Graph, tol: f64) -> Result<IharaReport, SpectralError> {
    ihara_bass_check_capped(g, tol, DEFAULT_DENSE_CAP)
}

pub fn ihara_bass_check_capped(g: &Graph, tol: f64, cap: usize) -> Result<IharaReport, SpectralError> {
    let (n, m) = (g.n(), g.m());
    if 2 * m > cap || 2 * n > cap {
        return Err(SpectralError::SizeExceeded { size: (2 * m).max(2 * n), cap });
    }
    let nb = nb_spectrum_capped(g, NbMode::Dense, cap)?;
    let actual: Vec<Complex<f64>> = nb.eigenvalues.iter().map(|&(re, im)| Complex::new(re, im)).collect();
    let regular = g.regular_degree();
    let predicted: Vec<Complex<f64>> = match regular {
        Some(d) => {
            let mu = dense_adjacency(g).symmetric_eigenvalues();
            let mut p: Vec<Complex<f64>> =
                mu.iter().flat_map(|&mu| quadratic_roots(mu, (d as f64) - 1.0)).collect();
            adjust_trivial(&mut p, n, m);
            p
        }
        None => {
            // Pendant trees put large Jordan blocks at 0 into the pencil,
            // which no backward-stable solver resolves to 1e-6. Both sides
            // are reduced to the 2-core, where D - I is invertible, and the
            // nilpotent remainder is padded with exact zeros.
            let core = g.induced_subgraph(&two_core(g));
            let (nc, mc) = (core.n(), core.m());
            let mut lin = DMatrix::<f64>::zeros(2 * nc, 2 * nc);
            for (u, v) in core.edges() {
                lin[(u, v)] = 1.0;
                lin[(v, u)] = 1.0;
            }
            for v in 0..nc {
                lin[(v, nc + v)] = 1.0 - core.degree(v) as f64;
                lin[(nc + v, v)] = 1.0;
            }
            let mut p = if nc == 0 { Vec::new() } else { general_eigenvalues(lin)? };
            adjust_trivial(&mut p, nc, mc);
            p.resize(2 * m, Complex::new(0.0, 0.0));
            p
        }
    };
    let max_deviation = if predicted.len() == actual.len() {
        greedy_match(&predicted, &actual)
    } else {
        f64::INFINITY
    };
    let pairs = |v: &[Complex<f64>]| v.iter().map(|z| (z.re, z.im)).collect();
    Ok(IharaReport {
        passed: max_deviation <= tol,
        tolerance: tol,
        max_deviation,
        n,
        m,
        regular: regular.is_some(),
        nb_eigenvalues: pairs(&actual),
        predicted: pairs(&predicted),
    })
}

/// The ±1 factor (1 - u²)^{m-n}: added when m >= n, otherwise removed from
/// the nearest predicted values.
fn adjust_trivial(predicted: &mut Vec<Complex<f64>>, n: usize, m: usize) {
    if m >= n {
        for _ in 0..m - n {
            predicted.push(Complex::new(1.0, 0.0));
            predicted.push(Complex::new(-1.0, 0.0));
        }
    } else {
        for _ in 0..n - m {
            for target in [1.0, -1.0] {
                let t = Complex::new(target, 0.0);
                if let Some(i) = nearest(predicted, t, &vec![false; predicted.len()]) {
                    predicted.swap_remove(i);
                }
            }
        }
    }
}

/// Roots of λ² - μλ + c.
fn quadratic_roots(mu: f64, c: f64) -> [Complex<f64>; 2] {
    let disc = mu * mu - 4.0 * c;
    if disc >= 0.0 {
        let r = disc.sqrt();
        [Complex::new((mu + r) / 2.0, 0.0), Complex::new((mu - r) / 2.0, 0.0)]
    } else {
        let r = (-disc).sqrt();
        [Complex::new(mu / 2.0, r / 2.0), Complex::new(mu / 2.0, -r / 2.0)]
    }
}

fn nearest(pool: &[Complex<f64>], z: Complex<f64>, used: &[bool]) -> Option<usize> {
    (0..pool.len()).filter(|&i| !used[i]).min_by(|&a, &b| (pool[a] - z).norm().total_cmp(&(pool[b] - z).norm()))
}

/// Greedy nearest matching of two equal-size multisets; returns the largest
/// matched distance.
pub(crate) fn greedy_match(a: &[Complex<f64>], b: &[Complex<f64>]) -> f64 {
    let mut used = vec![false; b.len()];
    let mut worst = 0.0f64;
    for &z in a {
        let i = nearest(b, z, &used).expect("sizes agree");
        used[i] = true;
        worst = worst.max((b[i] - z).norm());
    }
    worst
}

/// λ = (μ + √(μ² - 4(d-1)))/2, the eigenvalue of B attached to an adjacency
/// eigenvalue μ outside the bulk.
pub fn corollary_nb_to_adj(mu: f64, d: usize) -> Result<f64, SpectralError> {
    let c = 4.0 * (d as f64 - 1.0);
    if mu * mu <= c {
        return Err(SpectralError::DomainError(format!("μ² = {} must exceed 4(d-1) = {c}", mu * mu)));
    }
    let lambda = (mu + (mu * mu - c).sqrt()) / 2.0;
    debug_assert!(mu < 0.0 || lambda > (d as f64 - 1.0).sqrt());
    Ok(lambda)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{complete, cycle, petersen, star};
    use crate::hosts::random_regular;

    #[test]
    fn space_indexing() {
        let g = petersen();
        let s = DirectedEdgeSpace::new(&g);
        assert_eq!(s.len(), 30);
        for a in 0..s.len() {
            let (u, v) = s.arc(a);
            assert_eq!(s.index(u, v), Some(a));
            assert_eq!(s.reverse(s.reverse(a)), a);
            assert_eq!(s.arc(s.reverse(a)), (v, u));
        }
    }

    #[test]
    fn operator_rows() {
        let b = nonbacktracking_matrix(&star(3));
        let leaf_to_center = b.space.index(1, 0).unwrap();
        assert_eq!(b.row(leaf_to_center).len(), 2);
        let reg = nonbacktracking_matrix(&petersen());
        for a in 0..reg.dim() {
            assert_eq!(reg.row(a).len(), 2);
        }
    }

    #[test]
    fn transpose_is_adjoint() {
        let g = random_regular(30, 3, 4).unwrap();
        let b = nonbacktracking_matrix(&g);
        let k = b.dim();
        let x: Vec<f64> = (0..k).map(|i| (i as f64 * 0.37).sin()).collect();
        let y: Vec<f64> = (0..k).map(|i| (i as f64 * 0.11).cos()).collect();
        let mut bx = vec![0.0; k];
        let mut bty = vec![0.0; k];
        b.apply(&x, &mut bx);
        b.apply_transpose(&y, &mut bty);
        let l: f64 = bx.iter().zip(&y).map(|(a, c)| a * c).sum();
        let r: f64 = x.iter().zip(&bty).map(|(a, c)| a * c).sum();
        assert!((l - r).abs() < 1e-9);
        let dense = b.to_dense();
        let bx_dense = &dense * nalgebra::DVector::from_vec(x.clone());
        assert!(bx.iter().zip(bx_dense.iter()).all(|(a, c)| (a - c).abs() < 1e-12));
    }

    #[test]
    fn k4_nonbacktracking_spectrum() {
        let r = nb_spectrum(&complete(4), NbMode::Dense).unwrap();
        assert_eq!(r.eigenvalues.len(), 12);
        assert!((r.radius - 2.0).abs() < 1e-9);
        let complex = r.eigenvalues.iter().filter(|z| z.1.abs() > 1e-6).count();
        assert_eq!(complex, 6);
        for z in r.eigenvalues.iter().filter(|z| z.1.abs() > 1e-6) {
            assert!(((z.0 * z.0 + z.1 * z.1).sqrt() - 2f64.sqrt()).abs() < 1e-8);
        }
    }

    #[test]
    fn radius_modes_agree() {
        for g in [cycle(5), complete(4), petersen(), random_regular(40, 3, 2).unwrap()] {
            let d = nb_spectrum(&g, NbMode::Dense).unwrap().radius;
            let p = nb_spectrum(&g, NbMode::RadiusOnly).unwrap().radius;
            assert!((d - p).abs() < 1e-5, "{d} vs {p}");
        }
        let tree = crate::graph::complete_tree(2, 4);
        assert_eq!(nb_spectrum(&tree, NbMode::RadiusOnly).unwrap().radius, 0.0);
        assert!(nb_spectrum(&tree, NbMode::Dense).unwrap().radius < 1e-6);
    }

    #[test]
    fn ihara_bass_small_graphs() {
        for g in [complete(4), cycle(6), petersen(), star(3), crate::graph::path(4)] {
            let r = ihara_bass_check(&g, 1e-6).unwrap();
            assert!(r.passed, "deviation {}", r.max_deviation);
        }
        let r = ihara_bass_check(&complete(4), 1e-6).unwrap();
        assert_eq!(r.predicted.len(), 12);
    }

    #[test]
    fn corollary_examples() {
        assert!((corollary_nb_to_adj(4.0, 4).unwrap() - 3.0).abs() < 1e-12);
        assert!((corollary_nb_to_adj(6.0, 6).unwrap() - 5.0).abs() < 1e-12);
        assert!(corollary_nb_to_adj(2.0 * 3f64.sqrt(), 4).is_err());
    }
}

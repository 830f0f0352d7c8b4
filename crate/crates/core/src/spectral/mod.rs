//! Adjacency and nonbacktracking spectra, truncations of the infinite graph X
//! (H with trees glued on), and the test-vector checks.

mod kahale;
mod lanczos;
mod nonbacktracking;
mod perron;
mod xtree;

pub use kahale::{
    kahale_lemma_check, kahale_vector, layer_mass, tree_slice, verify_subsolution, Branch, KahaleLemmaReport,
    KahaleVector, LayerMass, SubsolutionReport,
};
pub use nonbacktracking::{
    corollary_nb_to_adj, ihara_bass_check, ihara_bass_check_capped, nb_spectrum, nb_spectrum_capped,
    nonbacktracking_matrix, DirectedEdgeSpace, IharaReport, NbMode, NbSpectrumReport, NonBacktracking,
};
pub use perron::PerronBracket;
pub use xtree::{truncate_x, truncate_x_gadget, verify_x_radius, XRadiusReport, XTruncation};

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::Graph;

pub const DEFAULT_DENSE_CAP: usize = 8192;
/// Dense solves above this size skip eigenvectors and residuals.
const RESIDUAL_CAP: usize = 2048;
const DENSE_TOL: f64 = 1e-9;
const ITERATIVE_TOL: f64 = 1e-7;
const LANCZOS_MAX_ITER: usize = 1200;

#[derive(Debug, Error)]
pub enum SpectralError {
    #[error("matrix dimension {size} exceeds the dense cap {cap}")]
    SizeExceeded { size: usize, cap: usize },
    #[error("eigensolver did not converge after {iterations} iterations (residual {residual:e})")]
    ConvergenceFailure { iterations: usize, residual: f64 },
    #[error("outside the domain: {0}")]
    DomainError(String),
    #[error("layers overlap before depth {h_max}: {detail}")]
    GirthTooSmall { h_max: usize, detail: String },
    #[error("condition ({condition}) fails: {detail}")]
    PreconditionViolated { condition: u8, detail: String },
    #[error("invalid input: {0}")]
    InvalidInput(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Dense,
    Iterative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdjMode {
    Dense,
    Extremal,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumReport {
    pub method: Method,
    pub n: usize,
    /// Ascending. All eigenvalues in dense mode; in extremal mode λ_n, λ_2
    /// and λ_1.
    pub eigenvalues: Vec<f64>,
    pub lambda_1: f64,
    pub lambda_2: f64,
    pub lambda_min: f64,
    /// max(λ_2, -λ_n).
    pub lambda: f64,
    /// Largest eigenpair residual, when computed.
    pub max_residual: Option<f64>,
    pub tolerance: f64,
    pub iterations: Option<usize>,
}

pub(crate) fn dense_adjacency(g: &Graph) -> DMatrix<f64> {
    let n = g.n();
    let mut a = DMatrix::zeros(n, n);
    for (u, v) in g.edges() {
        a[(u, v)] = 1.0;
        a[(v, u)] = 1.0;
    }
    a
}

/// y = A x.
pub(crate) fn adjacency_apply(g: &Graph, x: &[f64], y: &mut [f64]) {
    for (v, out) in y.iter_mut().enumerate() {
        *out = g.neighbors(v).iter().map(|&w| x[w]).sum();
    }
}

fn max_degree(g: &Graph) -> f64 {
    g.degrees().max().unwrap_or(0).max(1) as f64
}

pub fn adjacency_spectrum(g: &Graph, mode: AdjMode) -> Result<SpectrumReport, SpectralError> {
    adjacency_spectrum_capped(g, mode, DEFAULT_DENSE_CAP)
}

pub fn adjacency_spectrum_capped(g: &Graph, mode: AdjMode, cap: usize) -> Result<SpectrumReport, SpectralError> {
    let n = g.n();
    if n < 2 {
        return Err(SpectralError::InvalidInput(format!("need at least 2 vertices, got {n}")));
    }
    match mode {
        AdjMode::Dense => dense_spectrum(g, cap),
        AdjMode::Extremal => extremal_spectrum(g),
    }
}

fn dense_spectrum(g: &Graph, cap: usize) -> Result<SpectrumReport, SpectralError> {
    let n = g.n();
    if n > cap {
        return Err(SpectralError::SizeExceeded { size: n, cap });
    }
    let a = dense_adjacency(g);
    let tolerance = DENSE_TOL * max_degree(g);
    let (mut ev, max_residual) = if n <= RESIDUAL_CAP {
        let eig = SymmetricEigen::try_new(a.clone(), f64::EPSILON, 0)
            .ok_or(SpectralError::ConvergenceFailure { iterations: 0, residual: f64::NAN })?;
        let av = &a * &eig.eigenvectors;
        let mut worst = 0.0f64;
        for (j, &lambda) in eig.eigenvalues.iter().enumerate() {
            let r = (av.column(j) - eig.eigenvectors.column(j) * lambda).norm();
            worst = worst.max(r);
        }
        if worst > tolerance {
            return Err(SpectralError::ConvergenceFailure { iterations: 0, residual: worst });
        }
        (eig.eigenvalues.iter().copied().collect::<Vec<_>>(), Some(worst))
    } else {
        (a.symmetric_eigenvalues().iter().copied().collect(), None)
    };
    ev.sort_by(f64::total_cmp);
    let lambda_1 = ev[n - 1];
    let lambda_2 = ev[n - 2];
    let lambda_min = ev[0];
    Ok(SpectrumReport {
        method: Method::Dense,
        n,
        lambda_1,
        lambda_2,
        lambda_min,
        lambda: lambda_2.max(-lambda_min),
        eigenvalues: ev,
        max_residual,
        tolerance,
        iterations: None,
    })
}

fn extremal_spectrum(g: &Graph) -> Result<SpectrumReport, SpectralError> {
    let n = g.n();
    let tolerance = ITERATIVE_TOL * max_degree(g);
    let apply = |x: &[f64], y: &mut [f64]| adjacency_apply(g, x, y);
    let seed = 0x5eed_0f_1a_u64 ^ n as u64;
    let (lambda_1, lambda_2, lambda_min, residual, iterations) = match g.regular_degree() {
        Some(d) => {
            // A·1 = d·1 exactly; search the complement of the all-ones vector.
            let ones = vec![1.0 / (n as f64).sqrt(); n];
            let r = lanczos::lanczos(apply, n, &[ones], 1, 1, tolerance, LANCZOS_MAX_ITER, seed)?;
            (d as f64, r.top[0], r.bottom[0], r.residual, r.iterations)
        }
        None => {
            let r = lanczos::lanczos(apply, n, &[], 2, 1, tolerance, LANCZOS_MAX_ITER, seed)?;
            (r.top[0], r.top[1], r.bottom[0], r.residual, r.iterations)
        }
    };
    Ok(SpectrumReport {
        method: Method::Iterative,
        n,
        eigenvalues: vec![lambda_min, lambda_2, lambda_1],
        lambda_1,
        lambda_2,
        lambda_min,
        lambda: lambda_2.max(-lambda_min),
        max_residual: Some(residual),
        tolerance,
        iterations: Some(iterations),
    })
}

/// Spectral radius of A with rigorous bracket, for graphs too large for a
/// dense solve.
pub fn adjacency_radius_bracket(g: &Graph, tol: f64, max_iter: usize) -> PerronBracket {
    perron::perron_radius(|x, y| adjacency_apply(g, x, y), g.n(), true, tol, max_iter)
}

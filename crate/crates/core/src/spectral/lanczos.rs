use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::SpectralError;

pub(crate) struct Extremal {
    /// Largest Ritz values, descending.
    pub top: Vec<f64>,
    /// Smallest Ritz values, ascending.
    pub bottom: Vec<f64>,
    /// Largest Ritz residual |β_k y_k| among the reported values.
    pub residual: f64,
    pub iterations: usize,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn orthogonalize(w: &mut [f64], against: &[Vec<f64>]) {
    // Two passes of classical Gram-Schmidt.
    for _ in 0..2 {
        for q in against {
            let c = dot(q, w);
            axpy(-c, q, w);
        }
    }
}

/// Lanczos with full reorthogonalization. `deflate` holds orthonormal vectors
/// kept out of the Krylov space (e.g. the normalized all-ones vector of a
/// regular graph).
pub(crate) fn lanczos<F>(
    apply: F,
    n: usize,
    deflate: &[Vec<f64>],
    want_top: usize,
    want_bottom: usize,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<Extremal, SpectralError>
where
    F: Fn(&[f64], &mut [f64]),
{
    let dim = n - deflate.len();
    let max_iter = max_iter.min(dim).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut q: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    orthogonalize(&mut q, deflate);
    let norm = dot(&q, &q).sqrt();
    q.iter_mut().for_each(|x| *x /= norm);

    let mut basis: Vec<Vec<f64>> = vec![q];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    let mut last_residual = f64::INFINITY;
    for j in 0..max_iter {
        apply(&basis[j], &mut w);
        let a = dot(&basis[j], &w);
        alpha.push(a);
        orthogonalize(&mut w, deflate);
        orthogonalize(&mut w, &basis);
        let b = dot(&w, &w).sqrt();
        let steps = j + 1;
        let exhausted = b <= 1e-12 * (1.0 + a.abs()) || steps == max_iter;
        if steps % 8 == 0 || exhausted {
            let mut t = DMatrix::<f64>::zeros(steps, steps);
            for i in 0..steps {
                t[(i, i)] = alpha[i];
                if i + 1 < steps {
                    t[(i, i + 1)] = beta[i];
                    t[(i + 1, i)] = beta[i];
                }
            }
            let eig = SymmetricEigen::new(t);
            let mut order: Vec<usize> = (0..steps).collect();
            order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
            let res = |i: usize| if b <= 1e-12 { 0.0 } else { (b * eig.eigenvectors[(steps - 1, i)]).abs() };
            let top: Vec<usize> = order.iter().rev().take(want_top).copied().collect();
            let bottom: Vec<usize> = order.iter().take(want_bottom).copied().collect();
            let residual = top.iter().chain(&bottom).map(|&i| res(i)).fold(0.0, f64::max);
            last_residual = residual;
            if (residual <= tol && steps >= want_top + want_bottom) || exhausted {
                if residual > tol {
                    return Err(SpectralError::ConvergenceFailure { iterations: steps, residual });
                }
                return Ok(Extremal {
                    top: top.iter().map(|&i| eig.eigenvalues[i]).collect(),
                    bottom: bottom.iter().map(|&i| eig.eigenvalues[i]).collect(),
                    residual,
                    iterations: steps,
                });
            }
        }
        beta.push(b);
        w.iter_mut().for_each(|x| *x /= b);
        basis.push(std::mem::replace(&mut w, vec![0.0; n]));
    }
    Err(SpectralError::ConvergenceFailure { iterations: max_iter, residual: last_residual })
}

use serde::{Deserialize, Serialize};

/// Bracket on the spectral radius of a nonnegative operator.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerronBracket {
    pub estimate: f64,
    /// Rigorous lower bound (Collatz-Wielandt minimum, or the Rayleigh
    /// quotient for symmetric operators).
    pub lower: f64,
    /// Rigorous upper bound (Collatz-Wielandt maximum).
    pub upper: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Power iteration on M + I for a nonnegative M. The shift makes the Perron
/// root strictly dominant in modulus, so the iteration converges even when M
/// is periodic (bipartite graphs, cycles). For a positive vector x,
/// min_i (Mx)_i/x_i <= ρ(M) <= max_i (Mx)_i/x_i, and x stays positive
/// because of the shift.
pub(crate) fn perron_radius<F>(apply: F, n: usize, symmetric: bool, tol: f64, max_iter: usize) -> PerronBracket
where
    F: Fn(&[f64], &mut [f64]),
{
    if n == 0 {
        return PerronBracket { estimate: 0.0, lower: 0.0, upper: 0.0, iterations: 0, converged: true };
    }
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    let mut out = PerronBracket {
        estimate: f64::NAN,
        lower: 0.0,
        upper: f64::INFINITY,
        iterations: 0,
        converged: false,
    };
    for it in 1..=max_iter {
        apply(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let (mut xx, mut xy, mut zz) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
            xx += x[i] * x[i];
            xy += x[i] * y[i];
            let z = x[i] + y[i];
            zz += z * z;
        }
        let estimate = if symmetric { xy / xx } else { (zz / xx).sqrt() - 1.0 };
        out.iterations = it;
        out.estimate = estimate;
        out.upper = out.upper.min(hi);
        out.lower = out.lower.max(lo).max(if symmetric { estimate } else { 0.0 });
        if out.upper - estimate.max(out.lower) <= tol * out.upper.max(1.0) {
            out.converged = true;
            return out;
        }
        let scale = x.iter().zip(&y).map(|(a, b)| a + b).fold(0.0, f64::max);
        for i in 0..n {
            x[i] = (x[i] + y[i]) / scale;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dense(m: Vec<Vec<f64>>) -> impl Fn(&[f64], &mut [f64]) {
        move |x, y| {
            for (i, row) in m.iter().enumerate() {
                y[i] = row.iter().zip(x).map(|(a, b)| a * b).sum();
            }
        }
    }

    #[test]
    fn periodic_matrix() {
        // 3-cycle permutation: eigenvalues are cube roots of unity.
        let m = vec![vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0], vec![1.0, 0.0, 0.0]];
        let b = perron_radius(dense(m), 3, false, 1e-12, 1000);
        assert!(b.converged);
        assert!((b.upper - 1.0).abs() < 1e-12 && (b.estimate - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bracket_contains_radius() {
        let m = vec![vec![0.0, 2.0, 0.0], vec![1.0, 0.0, 1.0], vec![0.0, 3.0, 0.0]];
        // Characteristic polynomial -λ³ + 5λ: ρ = √5.
        let b = perron_radius(dense(m), 3, false, 1e-10, 10_000);
        assert!(b.lower <= 5f64.sqrt() + 1e-12 && 5f64.sqrt() <= b.upper + 1e-12);
        assert!((b.upper - 5f64.sqrt()).abs() < 1e-8);
    }
}

//! Damped Newton iteration shared by the solvers.

use nalgebra::{DMatrix, DVector};

use crate::error::Result;

#[derive(Debug, Clone, Copy)]
pub(crate) struct NewtonOptions {
    /// Converged when the residual norm drops below this.
    pub tol: f64,
    /// Also converged when progress stalls below this (rounding floor).
    pub accept: f64,
    pub max_iter: usize,
    /// Backtrack on the residual norm.
    pub line_search: bool,
    /// Give up when the residual norm exceeds this (runaway start).
    pub blowup: f64,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self { tol: 1e-12, accept: 1e-10, max_iter: 50, line_search: false, blowup: f64::INFINITY }
    }
}

#[derive(Debug, Clone)]
pub(crate) struct NewtonOutcome {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

pub(crate) fn solve(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<DVector<f64>> {
    let x = a.clone().lu().solve(b)?;
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Newton's method on a square system given a combined residual/Jacobian map.
pub(crate) fn newton<F>(eval: F, x0: &[f64], opts: &NewtonOptions) -> Result<NewtonOutcome>
where
    F: Fn(&[f64]) -> Result<(DVector<f64>, DMatrix<f64>)>,
{
    let mut x = x0.to_vec();
    let (mut r, mut jac) = eval(&x)?;
    let mut rn = r.norm();
    let mut it = 0;
    while it < opts.max_iter && rn >= opts.tol && rn.is_finite() && rn < opts.blowup {
        it += 1;
        let Some(dx) = solve(&jac, &(-&r)) else { break };
        let mut alpha = 1.0;
        let mut next;
        loop {
            let trial: Vec<f64> = x.iter().zip(dx.iter()).map(|(a, d)| a + alpha * d).collect();
            next = Some((eval(&trial)?, trial));
            let nn = next.as_ref().map(|((r2, _), _)| r2.norm()).unwrap_or(f64::INFINITY);
            if !opts.line_search || nn < (1.0 - 1e-4 * alpha) * rn || alpha < 1e-3 {
                break;
            }
            alpha *= 0.5;
        }
        let ((r2, j2), trial) = next.expect("line search evaluates at least once");
        let n2 = r2.norm();
        if !(n2 < rn) && rn < opts.accept {
            // rounding floor reached
            break;
        }
        if opts.line_search && !(n2 < rn) {
            break;
        }
        let stalled = n2 > 0.5 * rn && n2 < opts.accept;
        x = trial;
        r = r2;
        jac = j2;
        rn = n2;
        if stalled {
            break;
        }
    }
    Ok(NewtonOutcome { converged: rn < opts.accept, x, residual: rn, iterations: it })
}

/// Complex roots of `Σ c_k z^k` (ascending coefficients, leading one nonzero)
/// from companion-matrix eigenvalues, each refined by a few Newton steps.
pub(crate) fn poly_roots(coeffs: &[f64]) -> Vec<num_complex::Complex64> {
    use num_complex::Complex64;
    let deg = coeffs.len().saturating_sub(1);
    if deg == 0 {
        return Vec::new();
    }
    let lead = coeffs[deg];
    let mut comp = DMatrix::<f64>::zeros(deg, deg);
    for i in 1..deg {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..deg {
        comp[(i, deg - 1)] = -coeffs[i] / lead;
    }
    let eval = |z: Complex64| {
        let mut p = Complex64::new(0.0, 0.0);
        let mut dp = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            dp = dp * z + p;
            p = p * z + c;
        }
        (p, dp)
    };
    comp.complex_eigenvalues()
        .iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..4 {
                let (p, dp) = eval(z);
                if dp.norm() == 0.0 {
                    break;
                }
                let next = z - p / dp;
                if !(eval(next).0.norm() < p.norm()) {
                    break;
                }
                z = next;
            }
            z
        })
        .collect()
}

//! Path following in `γ`.
//!
//! A solution of a square symmetric system extends analytically in `γ`
//! wherever `det J ≠ 0`. Paths start from seeds with closed-form phases —
//! the ToP family at `γ = 2b`, the palindromic family at `γ = 2`, or a
//! bootstrapped ToP solution at `γ = 1` — and are traced with a tangent
//! predictor and Newton corrector.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use nalgebra::DVector;
use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::algebra::{self, gamma_derivative, residual_and_jacobian, ConstraintSpec};
use crate::error::{Error, Result};
use crate::linalg::{newton, solve, NewtonOptions};
use crate::su2::Symmetry;

/// Residual every seed and every recorded point must satisfy.
pub const RECORD_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SeedFamily {
    /// ToP seed `(π ×b, π/2 ×(n−b))` at `γ = 2b`.
    Top { b: usize },
    /// Palindromic seed `(2mπ/(n+1))(1, −1, 2, −2, …)` at `γ = 2`.
    Pd { m: usize },
    /// ToP solution at `γ = 1` obtained by repeated bootstrapping.
    Bootstrap,
    /// A converged root supplied by the caller, e.g. from a multi-start search.
    Found,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seed {
    pub family: SeedFamily,
    pub n: usize,
    pub gamma0: f64,
    pub symmetry: Symmetry,
    pub half: Vec<f64>,
}

impl Seed {
    pub fn spec(&self) -> Result<ConstraintSpec> {
        ConstraintSpec::symmetric(self.n, self.gamma0, self.symmetry)
    }
}

/// `φ = (π ×b, π/2 ×(n−b))` at `γ₀ = 2b`, antipalindromic.
pub fn seed_top(n: usize, b: usize) -> Result<Seed> {
    if n == 0 || b > n / 2 {
        return Err(Error::InvalidArgument(format!("ToP seed needs 0 ≤ b ≤ ⌊n/2⌋ (n = {n}, b = {b})")));
    }
    let mut half = vec![PI; b];
    half.extend(std::iter::repeat(FRAC_PI_2).take(n - b));
    Ok(Seed { family: SeedFamily::Top { b }, n, gamma0: 2.0 * b as f64, symmetry: Symmetry::Ap, half })
}

/// `φ = (2mπ/(n+1)) (1, −1, 2, −2, …, n/2, −n/2)` at `γ₀ = 2`, palindromic.
pub fn seed_pd(n: usize, m: usize) -> Result<Seed> {
    if n == 0 || n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("palindromic seeds need even n (got {n})")));
    }
    if m == 0 || (n + 1).gcd(&m) != 1 {
        return Err(Error::InvalidArgument(format!("n + 1 = {} and m = {m} must be coprime", n + 1)));
    }
    let unit = 2.0 * m as f64 * PI / (n as f64 + 1.0);
    let half = (1..=n / 2).flat_map(|k| [unit * k as f64, -unit * k as f64]).collect();
    Ok(Seed { family: SeedFamily::Pd { m }, n, gamma0: 2.0, symmetry: Symmetry::Pd, half })
}

/// Newton-polishes `prev ∘ (π/2)` on the order-`(n+1)` antipalindromic
/// system at `γ = 1`.
pub fn bootstrap_top(prev: &[f64]) -> Result<Vec<f64>> {
    let n = prev.len() + 1;
    let spec = ConstraintSpec::symmetric(n, 1.0, Symmetry::Ap)?;
    let mut x0 = prev.to_vec();
    x0.push(FRAC_PI_2);
    let opts = NewtonOptions { max_iter: 50, ..Default::default() };
    let out = newton(|x: &[f64]| residual_and_jacobian(&spec, x), &x0, &opts)?;
    if !out.converged {
        return Err(Error::NoConvergence { iterations: out.iterations, residual: out.residual });
    }
    Ok(out.x)
}

/// ToP`n` at `γ = 1`, bootstrapped from `2π/3` one order at a time.
pub fn top_at_unit_gamma(n: usize) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::InvalidArgument("order must be positive".into()));
    }
    let mut half = vec![2.0 * PI / 3.0];
    for _ in 1..n {
        half = bootstrap_top(&half)?;
    }
    Ok(half)
}

pub fn seed_bootstrap(n: usize) -> Result<Seed> {
    Ok(Seed {
        family: SeedFamily::Bootstrap,
        n,
        gamma0: 1.0,
        symmetry: Symmetry::Ap,
        half: top_at_unit_gamma(n)?,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ContinuationOptions {
    pub initial_step: f64,
    pub max_step: f64,
    pub min_step: f64,
    /// `|det J|` below `singular_rel_tol · det_scale` counts as singular.
    pub singular_rel_tol: f64,
    /// Defaults to `2^{n(n+1)/2}` (the ToP value at `γ = 0`) for
    /// antipalindromic paths and `|det J|` at the seed for palindromic ones.
    pub det_scale: Option<f64>,
    pub newton_tol: f64,
    pub max_corrector_iter: usize,
    /// Largest corrector displacement (max norm) before a step is rejected
    /// as a branch jump.
    pub max_jump: f64,
}

impl Default for ContinuationOptions {
    fn default() -> Self {
        Self {
            initial_step: 1e-2,
            max_step: 5e-2,
            min_step: 1e-7,
            singular_rel_tol: 1e-8,
            det_scale: None,
            newton_tol: 1e-12,
            max_corrector_iter: 10,
            max_jump: 0.1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathRecord {
    pub gamma: f64,
    pub phases: Vec<f64>,
    #[serde(rename = "detJ")]
    pub det_j: f64,
    pub residual: f64,
    pub step: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum Termination {
    Reached,
    /// `|det J|` fell below the threshold near this `γ`.
    Singular { gamma: f64 },
    /// The corrector kept failing without a small determinant.
    StepUnderflow { gamma: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuationPath {
    pub seed: Seed,
    pub records: Vec<PathRecord>,
    pub termination: Termination,
}

impl ContinuationPath {
    pub fn last(&self) -> &PathRecord {
        self.records.last().expect("paths always hold the seed record")
    }

    /// `(min γ, max γ)` over the records.
    pub fn gamma_range(&self) -> (f64, f64) {
        self.records
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.gamma), hi.max(r.gamma)))
    }

    pub fn reached(&self) -> bool {
        self.termination == Termination::Reached
    }

    /// Smallest `|det J|` along the path.
    pub fn min_abs_det(&self) -> f64 {
        self.records.iter().map(|r| r.det_j.abs()).fold(f64::INFINITY, f64::min)
    }

    /// Record closest to `gamma`.
    pub fn at(&self, gamma: f64) -> &PathRecord {
        self.records
            .iter()
            .min_by(|a, b| (a.gamma - gamma).abs().total_cmp(&(b.gamma - gamma).abs()))
            .expect("nonempty")
    }

    /// One JSON object per record: `gamma`, `phases`, `detJ`, `residual`.
    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            gamma: f64,
            phases: &'a [f64],
            #[serde(rename = "detJ")]
            det_j: f64,
            residual: f64,
        }
        for r in &self.records {
            let line = Line { gamma: r.gamma, phases: &r.phases, det_j: r.det_j, residual: r.residual };
            serde_json::to_writer(&mut out, &line)?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

fn default_scale(seed: &Seed, seed_det: f64) -> f64 {
    match seed.symmetry {
        Symmetry::Pd => seed_det.abs(),
        _ if seed.family == SeedFamily::Found => seed_det.abs(),
        _ => 2f64.powf((seed.n * (seed.n + 1)) as f64 / 2.0),
    }
}

/// Traces the seed's solution from `γ₀` toward `gamma_target`.
///
/// Returns the partial path, flagged, when the Jacobian becomes singular on
/// the way; fails outright only if the seed itself is unusable.
pub fn continue_path(seed: &Seed, gamma_target: f64, opts: &ContinuationOptions) -> Result<ContinuationPath> {
    let spec = seed.spec()?;
    let (r0, j0) = residual_and_jacobian(&spec, &seed.half)?;
    let res0 = r0.norm();
    if !(res0 < RECORD_TOL) {
        return Err(Error::ResidualTooLarge { residual: res0, tolerance: RECORD_TOL });
    }
    let det0 = j0.determinant();
    let scale = opts.det_scale.unwrap_or_else(|| default_scale(seed, det0));
    let threshold = opts.singular_rel_tol * scale;
    if !(det0.abs() >= threshold) {
        return Err(Error::SingularJacobian { det: det0 });
    }

    let mut records = vec![PathRecord {
        gamma: seed.gamma0,
        phases: seed.half.clone(),
        det_j: det0,
        residual: res0,
        step: 0.0,
    }];
    let dir = (gamma_target - seed.gamma0).signum();
    let mut gamma = seed.gamma0;
    let mut x = seed.half.clone();
    let mut jac = j0;
    let mut step = opts.initial_step;
    let mut streak = 0;
    let newton_opts = NewtonOptions {
        tol: opts.newton_tol,
        accept: 0.1 * RECORD_TOL,
        max_iter: opts.max_corrector_iter,
        line_search: false,
        blowup: 1.0,
    };
    let mut last_failure_singular = false;

    let termination = loop {
        let remaining = (gamma_target - gamma).abs();
        if remaining <= 1e-14 {
            break Termination::Reached;
        }
        if step < opts.min_step {
            break if last_failure_singular {
                Termination::Singular { gamma }
            } else {
                Termination::StepUnderflow { gamma }
            };
        }
        let h = step.min(remaining);
        let g_new = if h == remaining { gamma_target } else { gamma + dir * h };
        let at = spec.with_gamma(gamma);
        let rhs: DVector<f64> = -gamma_derivative(&at);
        let Some(tangent) = solve(&jac, &rhs) else {
            break Termination::Singular { gamma };
        };
        let pred: Vec<f64> = x.iter().zip(tangent.iter()).map(|(a, t)| a + t * (g_new - gamma)).collect();
        let target_spec = spec.with_gamma(g_new);
        let accepted = newton(|p: &[f64]| residual_and_jacobian(&target_spec, p), &pred, &newton_opts)
            .ok()
            .filter(|o| o.converged && o.residual < RECORD_TOL)
            .filter(|o| o.x.iter().zip(&pred).all(|(a, b)| (a - b).abs() <= opts.max_jump))
            .and_then(|o| {
                let (_, j) = residual_and_jacobian(&target_spec, &o.x).ok()?;
                let det = j.determinant();
                last_failure_singular = !(det.abs() >= threshold);
                (!last_failure_singular).then_some((o, j, det))
            });
        match accepted {
            Some((o, j, det)) => {
                gamma = g_new;
                x = o.x;
                jac = j;
                records.push(PathRecord { gamma, phases: x.clone(), det_j: det, residual: o.residual, step: h });
                streak += 1;
                if streak >= 3 {
                    step = (2.0 * step).min(opts.max_step);
                    streak = 0;
                }
            }
            None => {
                step *= 0.5;
                streak = 0;
            }
        }
    };
    Ok(ContinuationPath { seed: seed.clone(), records, termination })
}

/// Paths from the seed toward `lo` and toward `hi`.
pub fn continue_both(
    seed: &Seed,
    lo: f64,
    hi: f64,
    opts: &ContinuationOptions,
) -> Result<(ContinuationPath, ContinuationPath)> {
    Ok((continue_path(seed, lo, opts)?, continue_path(seed, hi, opts)?))
}

/// Merges the `γ` ranges of several paths into disjoint intervals.
pub fn coverage(paths: &[ContinuationPath]) -> Vec<(f64, f64)> {
    let mut iv: Vec<(f64, f64)> = paths.iter().map(ContinuationPath::gamma_range).collect();
    iv.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::new();
    for (lo, hi) in iv {
        match out.last_mut() {
            Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
            _ => out.push((lo, hi)),
        }
    }
    out
}

/// Whether merged intervals contain `[lo, hi]`.
pub fn covers(intervals: &[(f64, f64)], lo: f64, hi: f64) -> bool {
    intervals.iter().any(|&(a, b)| a <= lo && b >= hi)
}

/// Of two paths covering `gamma`, the one with larger minimum `|det J|`.
pub fn prefer<'a>(a: &'a ContinuationPath, b: &'a ContinuationPath) -> &'a ContinuationPath {
    if a.min_abs_det() >= b.min_abs_det() {
        a
    } else {
        b
    }
}

/// κ along a path.
pub fn kappa_profile(path: &ContinuationPath) -> Result<Vec<(f64, f64)>> {
    path.records
        .iter()
        .map(|r| {
            let full = algebra::expand_symmetry(&r.phases, path.seed.symmetry);
            Ok((r.gamma, algebra::kappa(path.seed.n, r.gamma, &full)?))
        })
        .collect()
}

fn binom(n: i64, k: i64) -> BigInt {
    if k < 0 || n < 0 || k > n {
        return BigInt::zero();
    }
    (0..k).fold(BigInt::one(), |acc, i| acc * (n - i) / (i + 1))
}

/// Integer matrix `D_{jk} = Σ_{r<j} C(k−1, j−r−1) C(k+r−1, r)`, `1 ≤ j, k ≤ n`,
/// the combinatorial core of the γ = 0 ToP Jacobian.
pub fn top_d_matrix(n: usize) -> Vec<Vec<BigInt>> {
    let n = n as i64;
    (1..=n)
        .map(|j| (1..=n).map(|k| (0..j).map(|r| binom(k - 1, j - r - 1) * binom(k + r - 1, r)).sum()).collect())
        .collect()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn bareiss_det(mut m: Vec<Vec<BigInt>>) -> BigInt {
    let n = m.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for k in 0..n {
        if m[k][k].is_zero() {
            let Some(p) = (k + 1..n).find(|&i| !m[i][k].is_zero()) else { return BigInt::zero() };
            m.swap(k, p);
            sign = -sign;
        }
        for i in k + 1..n {
            for j in k + 1..n {
                m[i][j] = (&m[i][j] * &m[k][k] - &m[i][k] * &m[k][j]) / &prev;
            }
        }
        prev = m[k][k].clone();
    }
    sign * m[n - 1][n - 1].clone()
}

/// `det J` of the antipalindromic system at the `γ = 0` ToP seed
/// (full-pivot LU, which stays accurate through `n = 12`).
pub fn top_jacobian_determinant(n: usize) -> Result<f64> {
    let s = seed_top(n, 0)?;
    Ok(algebra::jacobian(&s.spec()?, &s.half)?.full_piv_lu().determinant())
}

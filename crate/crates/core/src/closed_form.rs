//! Closed-form solutions for short sequences.
//!
//! With `t_k = tan(φ_k/2)` the symmetric constraint systems for `n ≤ 4`
//! triangularize into a univariate polynomial `h` in `u = t₁²` of degree at
//! most four, followed by explicit formulas for the remaining `t_k`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::algebra::{
    self, full_residual, norm, residual_and_jacobian, residual_and_jacobian_free, ConstraintSpec,
    PulseFamily,
};
use crate::error::{Error, Result};
use crate::linalg::{newton, poly_roots, NewtonOptions};
use crate::search::canonicalize;
use crate::su2::{PulseSequence, Symmetry};

/// Residual required of every returned solution.
pub const SOLUTION_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ClosedFormFamily {
    Ap1,
    Ap2,
    Pd2,
    /// Unsymmetrized four-pulse family with the free parameter `t₄`.
    Ns2,
    Ap3,
    Pd4,
}

impl ClosedFormFamily {
    pub const ALL: [ClosedFormFamily; 6] = [Self::Ap1, Self::Ap2, Self::Pd2, Self::Ns2, Self::Ap3, Self::Pd4];

    /// Correction order.
    pub fn order(self) -> usize {
        match self {
            Self::Ap1 => 1,
            Self::Ap2 | Self::Pd2 | Self::Ns2 => 2,
            Self::Ap3 => 3,
            Self::Pd4 => 4,
        }
    }

    pub fn symmetry(self) -> Symmetry {
        match self {
            Self::Ap1 | Self::Ap2 | Self::Ap3 => Symmetry::Ap,
            Self::Pd2 | Self::Pd4 => Symmetry::Pd,
            Self::Ns2 => Symmetry::None,
        }
    }

    /// Real solutions exist only for `|γ| ≤ 2⌊n/2⌋ + 2`.
    pub fn gamma_range(self) -> f64 {
        (2 * (self.order() / 2) + 2) as f64
    }
}

impl fmt::Display for ClosedFormFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Ap1 => "AP1",
            Self::Ap2 => "AP2",
            Self::Pd2 => "PD2",
            Self::Ns2 => "NS2",
            Self::Ap3 => "AP3",
            Self::Pd4 => "PD4",
        })
    }
}

impl FromStr for ClosedFormFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|f| f.to_string().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidArgument(format!("unknown closed-form family `{s}`")))
    }
}

/// Polynomial in `γ` with ascending real coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct GammaPoly(pub Vec<f64>);

impl GammaPoly {
    pub fn constant(c: f64) -> Self {
        Self(vec![c])
    }

    /// `γ + c`.
    pub fn linear(c: f64) -> Self {
        Self(vec![c, 1.0])
    }

    pub fn eval(&self, g: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * g + c)
    }

    /// `p(−γ)`.
    pub fn reflect(&self) -> Self {
        Self(self.0.iter().enumerate().map(|(k, c)| if k % 2 == 1 { -c } else { *c }).collect())
    }

    pub fn scale(&self, s: f64) -> Self {
        Self(self.0.iter().map(|c| c * s).collect())
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self(out)
    }

    fn product(factors: &[GammaPoly]) -> Self {
        factors.iter().fold(Self::constant(1.0), |acc, f| acc.mul(f))
    }
}

fn lin(c: f64) -> GammaPoly {
    GammaPoly::linear(c)
}

fn poly(c: &[f64]) -> GammaPoly {
    GammaPoly(c.to_vec())
}

#[derive(Debug, Clone, PartialEq)]
enum Substitution {
    /// `t₂ = t₁ · num(γ)/den(γ)`.
    Ratio { num: GammaPoly, den: GammaPoly },
    /// `t₂ = −t₁`.
    Negate,
    /// Formulas for `t₂, t₃` given `t₁, t₄`.
    Ns2,
    /// `t₂², t₃²` as rational functions of `γ` and `s₁ = 1 + t₁²`; signs
    /// fixed by a side condition.
    Ap3,
    /// `t_k = ±t₁ (b_k(γ) + a_k(γ)u)/(a_k(−γ) + b_k(−γ)u)`, `k = 2, 3, 4`.
    Pd4 { a: Vec<GammaPoly>, b: Vec<GammaPoly> },
    None,
}

/// Triangular solution of one family: head polynomial plus substitutions.
#[derive(Debug, Clone, PartialEq)]
pub struct RegularChain {
    family: ClosedFormFamily,
    /// Coefficients of `h` in ascending powers of `u = t₁²`; for NS2 the
    /// four blocks `c₀ + c₁(t₁² + t₄²) + c₂ t₁t₄ + c₃ t₁²t₄²`.
    head: Vec<GammaPoly>,
    subst: Substitution,
}

/// Roots of a chain at one `γ`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ChainRoots {
    /// Each entry is `(t₁, …, t_m)`.
    pub roots: Vec<Vec<f64>>,
    /// The leading coefficient of `h` vanished at this `γ` and the degree
    /// was reduced (a root escaped to `t₁ = ∞`, i.e. `φ₁ = π`).
    pub degree_reduced: bool,
}

impl RegularChain {
    pub fn new(family: ClosedFormFamily) -> Self {
        use ClosedFormFamily::*;
        let (head, subst) = match family {
            Ap1 => (vec![lin(2.0), lin(-2.0)], Substitution::None),
            Ap2 => (
                vec![
                    GammaPoly::product(&[lin(2.0), lin(2.0), lin(4.0)]),
                    GammaPoly::product(&[poly(&[0.0, 2.0]), poly(&[4.0, 0.0, 1.0])]),
                    GammaPoly::product(&[lin(-4.0), lin(-2.0), lin(-2.0)]),
                ],
                Substitution::Ratio { num: poly(&[2.0, -1.0]), den: lin(2.0) },
            ),
            Pd2 => (vec![lin(4.0), lin(-4.0)], Substitution::Negate),
            Ns2 => (
                vec![
                    GammaPoly::product(&[lin(2.0), lin(2.0), lin(4.0)]),
                    GammaPoly::product(&[poly(&[0.0, 1.0]), poly(&[-4.0, 0.0, 1.0])]),
                    poly(&[0.0, -16.0]),
                    GammaPoly::product(&[lin(-4.0), lin(-2.0), lin(-2.0)]),
                ],
                Substitution::Ns2,
            ),
            Ap3 => {
                let a1 = GammaPoly::product(&[
                    lin(-2.0),
                    lin(2.0),
                    lin(2.0),
                    lin(2.0),
                    lin(4.0),
                    lin(4.0),
                    lin(6.0),
                    lin(6.0),
                ]);
                let a2 = GammaPoly::product(&[
                    lin(2.0),
                    lin(4.0),
                    lin(6.0),
                    poly(&[192.0, 256.0, 96.0, -32.0, 0.0, 1.0]),
                ]);
                let a3 = poly(&[-9216.0, 0.0, 9152.0, 0.0, 816.0, 0.0, -60.0, 0.0, 1.0]);
                (
                    vec![a1.clone(), a2.scale(4.0), a3.scale(6.0), a2.reflect().scale(4.0), a1.reflect()],
                    Substitution::Ap3,
                )
            }
            Pd4 => {
                let base = GammaPoly::product(&[lin(-8.0), lin(-4.0), lin(4.0)]);
                let a = vec![
                    base.mul(&GammaPoly::product(&[lin(-8.0), lin(-4.0), lin(-4.0), poly(&[0.0, -1.0])])),
                    base.mul(&poly(&[0.0, -12.0, 6.0, -3.0])),
                    base.mul(&GammaPoly::product(&[poly(&[0.0, 1.0]), lin(2.0), poly(&[-4.0, -6.0, 1.0])])),
                    base.mul(&lin(-4.0)),
                ];
                let b = [
                    poly(&[-1024.0, 1024.0, 1024.0, 128.0, -64.0, 0.0, 1.0]),
                    poly(&[128.0, -64.0, -64.0, -76.0, -10.0, 5.0]),
                    poly(&[-4.0, -6.0, 1.0]).mul(&poly(&[-64.0, -32.0, -48.0, 2.0, 1.0])),
                    poly(&[32.0, -64.0, 4.0, 1.0]),
                ]
                .iter()
                .map(|p| lin(8.0).mul(p))
                .collect::<Vec<_>>();
                let head = vec![
                    a[0].reflect(),
                    b[0].scale(3.0),
                    b[0].reflect().scale(-3.0),
                    a[0].scale(-1.0),
                ];
                (head, Substitution::Pd4 { a, b })
            }
        };
        Self { family, head, subst }
    }

    pub fn family(&self) -> ClosedFormFamily {
        self.family
    }

    /// Coefficients of `h(u)` at `γ`, ascending in `u = t₁²` (not NS2).
    pub fn head_coefficients(&self, gamma: f64) -> Vec<f64> {
        self.head.iter().map(|p| p.eval(gamma)).collect()
    }

    /// Evaluates `h` at `(γ, t₁)` (with `t₄` for NS2).
    pub fn eval_head(&self, gamma: f64, t1: f64, t4: f64) -> f64 {
        let c = self.head_coefficients(gamma);
        if self.family == ClosedFormFamily::Ns2 {
            c[0] + c[1] * (t1 * t1 + t4 * t4) + c[2] * t1 * t4 + c[3] * t1 * t1 * t4 * t4
        } else {
            c.iter().rev().fold(0.0, |acc, k| acc * t1 * t1 + k)
        }
    }
}

/// Real roots of a polynomial, keeping near-real (double) roots whose
/// real part nearly annihilates the polynomial.
pub(crate) fn real_roots(coeffs: &[f64]) -> (Vec<f64>, bool) {
    let scale = coeffs.iter().map(|c| c.abs()).fold(0.0, f64::max);
    if scale == 0.0 {
        return (Vec::new(), false);
    }
    let mut deg = coeffs.len() - 1;
    let mut reduced = false;
    while deg > 0 && coeffs[deg].abs() <= 1e-13 * scale {
        deg -= 1;
        reduced = true;
    }
    let c = &coeffs[..=deg];
    let eval = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x + k);
    let mag = |x: f64| c.iter().rev().fold(0.0, |acc, k| acc * x.abs() + k.abs());
    let mut out: Vec<f64> = Vec::new();
    for z in poly_roots(c) {
        let real = z.im.abs() <= 1e-9 * (1.0 + z.norm())
            || (z.im.abs() <= 1e-5 * (1.0 + z.norm()) && eval(z.re).abs() <= 1e-10 * mag(z.re));
        if real && !out.iter().any(|r| (r - z.re).abs() <= 1e-10 * (1.0 + r.abs())) {
            out.push(z.re);
        }
    }
    (out, reduced)
}

fn ns2_partner(g: f64, ta: f64, tb: f64) -> f64 {
    let sa = 1.0 + ta * ta;
    let sb = 1.0 + tb * tb;
    ta * ((g - 4.0) * (g - 2.0) - 8.0 * (1.0 - g) / sb - 8.0 / sa)
        / ((4.0 - g) * (g + 2.0) - 8.0 * (g + 1.0) / sb - 8.0 / sa)
}

fn ap3_side(t: &[f64]) -> f64 {
    let s: Vec<f64> = t.iter().map(|x| 1.0 + x * x).collect();
    let q = |k: usize| (2.0 - s[k]) / s[k];
    t[0] / s[0] * (q(0) + 2.0 * q(1) + 2.0 * q(2)) + t[1] / s[1] * (q(1) + 2.0 * q(2)) + t[2] / s[2] * q(2)
}

/// Back-substitutes every real root of the head polynomial.
pub fn chain_roots(chain: &RegularChain, gamma: f64) -> Result<ChainRoots> {
    chain_roots_with(chain, gamma, None)
}

/// As [`chain_roots`], with the free parameter `t₄` required by NS2.
pub fn chain_roots_with(chain: &RegularChain, gamma: f64, ns2_t4: Option<f64>) -> Result<ChainRoots> {
    let g = gamma;
    let mut out = ChainRoots::default();
    if chain.family == ClosedFormFamily::Ns2 {
        let t4 = ns2_t4
            .ok_or_else(|| Error::InvalidArgument("NS2 needs the free parameter t₄".into()))?;
        let c = chain.head_coefficients(g);
        let quad = [c[0] + c[1] * t4 * t4, c[2] * t4, c[1] + c[3] * t4 * t4];
        let (roots, reduced) = real_roots(&quad);
        out.degree_reduced = reduced;
        for t1 in roots {
            out.roots.push(vec![t1, ns2_partner(g, t1, t4), ns2_partner(g, t4, t1), t4]);
        }
        return Ok(out);
    }

    let (us, reduced) = real_roots(&chain.head_coefficients(g));
    out.degree_reduced = reduced;
    for u in us {
        let scale = 1.0 + u.abs();
        if u < -1e-9 * scale {
            continue;
        }
        let u = u.max(0.0);
        let r = u.sqrt();
        let signs: &[f64] = if r == 0.0 { &[1.0] } else { &[1.0, -1.0] };
        for &sg in signs {
            let t1 = sg * r;
            match &chain.subst {
                Substitution::None => out.roots.push(vec![t1]),
                Substitution::Negate => out.roots.push(vec![t1, -t1]),
                Substitution::Ratio { num, den } => {
                    out.roots.push(vec![t1, t1 * num.eval(g) / den.eval(g)])
                }
                Substitution::Pd4 { a, b } => {
                    let mut t = vec![t1];
                    for k in 2..=4usize {
                        let sign = if (1 + (k + 1) / 2) % 2 == 0 { 1.0 } else { -1.0 };
                        let (ak, bk) = (&a[k - 1], &b[k - 1]);
                        t.push(t1 * sign * (bk.eval(g) + ak.eval(g) * u) / (ak.eval(-g) + bk.eval(-g) * u));
                    }
                    out.roots.push(t);
                }
                Substitution::Ap3 => {
                    let s1 = u + 1.0;
                    let t2s = -(96.0 * g
                        + 16.0 * (g * g - 3.0 * g + 2.0) * s1
                        + (g - 4.0) * (g - 2.0) * (g + 2.0) * s1 * s1)
                        / (96.0 * g
                            + 16.0 * (g * g - 9.0 * g + 2.0) * s1
                            + (g - 6.0) * (g - 4.0) * (g - 2.0) * s1 * s1);
                    let t3s = -(g + 2.0) / (g - 2.0) * (16.0 * (g + 1.0) + (g - 4.0) * (g - 2.0) * s1)
                        / (16.0 * (g - 1.0) + (g - 6.0) * (g - 4.0) * s1);
                    if !(t2s >= -1e-9) || !(t3s >= -1e-9) {
                        continue;
                    }
                    let (a2, a3) = (t2s.max(0.0).sqrt(), t3s.max(0.0).sqrt());
                    let best = [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)]
                        .iter()
                        .map(|&(s2, s3)| vec![t1, s2 * a2, s3 * a3])
                        .min_by(|x, y| ap3_side(x).abs().total_cmp(&ap3_side(y).abs()));
                    out.roots.extend(best);
                }
                Substitution::Ns2 => unreachable!("handled above"),
            }
        }
    }
    Ok(out)
}

/// Newton polish of a candidate in phase space; returns the polished phases
/// (half list for symmetric families, full list for NS2).
fn polish(family: ClosedFormFamily, gamma: f64, phases: &[f64]) -> Result<Vec<f64>> {
    let opts = NewtonOptions { max_iter: 8, ..Default::default() };
    let n = family.order();
    if family == ClosedFormFamily::Ns2 {
        let spec = ConstraintSpec::new(n, 2 * n, gamma, PulseFamily::TwoPi, Symmetry::None)?;
        let t4 = phases[3];
        let eval = |x: &[f64]| {
            let full = [x[0], x[1], x[2], t4];
            residual_and_jacobian_free(&spec, &full, &[0, 1, 2])
        };
        let outcome = newton(eval, &phases[..3], &opts)?;
        let mut x = outcome.x;
        x.push(t4);
        return Ok(x);
    }
    let spec = ConstraintSpec::symmetric(n, gamma, family.symmetry())?;
    let outcome = newton(|x: &[f64]| residual_and_jacobian(&spec, x), phases, &opts)?;
    Ok(outcome.x)
}

/// All real solutions of a closed-form family at `γ`, canonicalized
/// (first phase in `(0, π]`, the `−φ` partner dropped).
pub fn solve_closed_form(
    family: ClosedFormFamily,
    gamma: f64,
    ns2_t4: Option<f64>,
) -> Result<Vec<PulseSequence>> {
    if family == ClosedFormFamily::Ns2 && ns2_t4.is_none() {
        return Err(Error::InvalidArgument("NS2 needs the free parameter t₄".into()));
    }
    if !gamma.is_finite() || gamma.abs() > family.gamma_range() {
        return Ok(Vec::new());
    }
    let n = family.order();
    let chain = RegularChain::new(family);
    let roots = chain_roots_with(&chain, gamma, ns2_t4)?;
    let mut found: Vec<Vec<f64>> = Vec::new();
    for t in roots.roots {
        let raw: Vec<f64> = t.iter().map(|x| 2.0 * x.atan()).collect();
        let Ok(mut phases) = polish(family, gamma, &raw) else { continue };
        if family != ClosedFormFamily::Ns2 {
            phases = canonicalize(&phases);
        }
        let full = algebra::expand_symmetry(&phases, family.symmetry());
        if !(norm(&full_residual(&full, n, gamma)) < SOLUTION_TOL) {
            continue;
        }
        let dup = found.iter().any(|f| crate::search::angular_distance(f, &phases) < 1e-6);
        if !dup {
            found.push(phases);
        }
    }
    found.sort_by(|a, b| a[0].total_cmp(&b[0]));
    found
        .into_iter()
        .map(|p| {
            Ok(PulseSequence::from_half(2.0 * PI, &p, family.symmetry())?
                .with_gamma(gamma)
                .with_label(family.to_string()))
        })
        .collect()
}

/// Complex roots of the head polynomial in `u` (diagnostics).
pub fn head_roots(chain: &RegularChain, gamma: f64) -> Vec<Complex64> {
    poly_roots(&chain.head_coefficients(gamma))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::expand_symmetry;
    use proptest::prelude::*;

    fn half(seq: &PulseSequence) -> Vec<f64> {
        seq.half().to_vec()
    }

    #[test]
    fn ap1_examples() {
        let s = solve_closed_form(ClosedFormFamily::Ap1, 1.0, None).unwrap();
        assert_eq!(s.len(), 1);
        assert!((s[0].phases()[0] - 2.0 * PI / 3.0).abs() < 1e-12);
        assert!(solve_closed_form(ClosedFormFamily::Ap1, 3.0, None).unwrap().is_empty());
        // cos φ₁ = −γ/2
        for g in [-1.5, -0.3, 0.4, 1.9] {
            let s = solve_closed_form(ClosedFormFamily::Ap1, g, None).unwrap();
            assert!((s[0].phases()[0].cos() + g / 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn pd2_example() {
        let s = solve_closed_form(ClosedFormFamily::Pd2, 1.0, None).unwrap();
        assert_eq!(s.len(), 1);
        let p = s[0].phases();
        assert!((p[0] - 1.82348).abs() < 1e-5);
        for (a, b) in p.iter().zip([p[0], -p[0], -p[0], p[0]]) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn chain_roots_at_zero_gamma() {
        for fam in [ClosedFormFamily::Ap1, ClosedFormFamily::Pd2] {
            let r = chain_roots(&RegularChain::new(fam), 0.0).unwrap();
            let mut t1: Vec<f64> = r.roots.iter().map(|t| t[0]).collect();
            t1.sort_by(f64::total_cmp);
            assert_eq!(t1.len(), 2);
            assert!((t1[0] + 1.0).abs() < 1e-14 && (t1[1] - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn ap2_chain_roots_solve_the_system() {
        let chain = RegularChain::new(ClosedFormFamily::Ap2);
        let spec = ConstraintSpec::symmetric(2, 1.0, Symmetry::Ap).unwrap();
        let r = chain_roots(&chain, 1.0).unwrap();
        assert!(!r.roots.is_empty());
        for t in &r.roots {
            let h: Vec<f64> = t.iter().map(|x| 2.0 * x.atan()).collect();
            assert!(norm(&algebra::symmetric_residual(&spec, &h).unwrap()) < 1e-9);
        }
        let s = solve_closed_form(ClosedFormFamily::Ap2, 1.0, None).unwrap();
        assert!(s.iter().any(|q| (half(q)[0] - 2.35949).abs() < 1e-5 && (half(q)[1] - 1.35980).abs() < 1e-5));
    }

    #[test]
    fn degree_reduction_is_flagged() {
        // AP1 at γ = 2: h = 4, the root sits at t₁ = ∞.
        let r = chain_roots(&RegularChain::new(ClosedFormFamily::Ap1), 2.0).unwrap();
        assert!(r.degree_reduced);
        assert!(r.roots.is_empty());
    }

    #[test]
    fn pd4_matches_table_rows() {
        let s = solve_closed_form(ClosedFormFamily::Pd4, 1.0, None).unwrap();
        let rows = [
            [2.26950, -1.76948, -0.80579, 1.93044],
            [2.61153, -1.49208, 0.15281, 2.20741],
        ];
        let hit = |row: &[f64; 4]| s.iter().any(|q| q.half().iter().zip(row).all(|(a, b)| (a - b).abs() < 1e-4));
        assert!(hit(&rows[0]), "{s:?}");
    }

    #[test]
    fn ap3_at_zero_gamma() {
        let s = solve_closed_form(ClosedFormFamily::Ap3, 0.0, None).unwrap();
        assert!(!s.is_empty());
        for q in &s {
            assert!(norm(&full_residual(q.phases(), 3, 0.0)) < 1e-9);
        }
    }

    #[test]
    fn ns2_reproduces_ap2_and_pd2() {
        let g = 1.0;
        let ap2 = solve_closed_form(ClosedFormFamily::Ap2, g, None).unwrap();
        for q in &ap2 {
            let full = q.phases().to_vec();
            let t4 = (full[3] / 2.0).tan();
            let ns = solve_closed_form(ClosedFormFamily::Ns2, g, Some(t4)).unwrap();
            assert!(
                ns.iter().any(|r| crate::search::angular_distance(r.phases(), &full) < 1e-8),
                "{full:?} not in {:?}",
                ns.iter().map(|r| r.phases().to_vec()).collect::<Vec<_>>()
            );
        }
        // At the PD2 point the t₂/t₃ substitution is 0/0, so approach it
        // along the free parameter instead.
        let pd2 = solve_closed_form(ClosedFormFamily::Pd2, g, None).unwrap();
        let full = pd2[0].phases().to_vec();
        let t4 = (full[3] / 2.0).tan();
        let degenerate = solve_closed_form(ClosedFormFamily::Ns2, g, Some(t4)).unwrap();
        assert!(degenerate.iter().all(|r| crate::search::angular_distance(r.phases(), &full) > 1e-3));
        for delta in [1e-4, -1e-4] {
            let ns = solve_closed_form(ClosedFormFamily::Ns2, g, Some(t4 + delta)).unwrap();
            assert!(
                ns.iter().any(|r| crate::search::angular_distance(r.phases(), &full) < 1e-3),
                "{full:?} not near {:?}",
                ns.iter().map(|r| r.phases().to_vec()).collect::<Vec<_>>()
            );
        }
        assert!(solve_closed_form(ClosedFormFamily::Ns2, g, None).is_err());
    }

    #[test]
    fn family_names_round_trip() {
        for f in ClosedFormFamily::ALL {
            assert_eq!(f.to_string().parse::<ClosedFormFamily>().unwrap(), f);
        }
        assert!("AP9".parse::<ClosedFormFamily>().is_err());
    }

    #[test]
    fn head_is_even_polynomial_of_low_degree() {
        for f in ClosedFormFamily::ALL {
            if f != ClosedFormFamily::Ns2 {
                assert!(RegularChain::new(f).head_coefficients(0.3).len() <= 5);
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn solutions_satisfy_full_system(g in -2.0f64..2.0, fam in 0usize..5) {
            let family = [ClosedFormFamily::Ap1, ClosedFormFamily::Ap2, ClosedFormFamily::Pd2,
                          ClosedFormFamily::Ap3, ClosedFormFamily::Pd4][fam];
            let n = family.order();
            for q in solve_closed_form(family, g, None).unwrap() {
                let full = expand_symmetry(q.half(), family.symmetry());
                prop_assert!(norm(&full_residual(&full, n, g)) < 1e-9);
                prop_assert!(q.half()[0] > 0.0);
            }
        }

        #[test]
        fn every_family_has_solutions_in_range(g in -1.9f64..1.9) {
            for family in [ClosedFormFamily::Ap1, ClosedFormFamily::Ap2, ClosedFormFamily::Pd2, ClosedFormFamily::Pd4] {
                prop_assert!(!solve_closed_form(family, g, None).unwrap().is_empty(), "{family} at {g}");
            }
        }
    }
}

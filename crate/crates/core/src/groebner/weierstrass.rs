//! Polynomial form of the symmetric constraint systems via `t = tan(φ/2)`.
//!
//! With `t = tan(φ/2)`, `e^{iφ} = (1+it)/(1−it)`, so a phase-sum monomial
//! `e^{i m φ}` becomes `(1+it)^{D+m}(1−it)^{D−m}/(1+t²)^D` for any `D ≥ |m|`.
//! Multiplying each constraint row through by `∏(1+t_k²)^{D_k}` gives integer
//! polynomials in `t` whose coefficients are polynomial in `γ`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{Monomial, MultivariatePoly, PolySystem};
use super::ratfun::{QPoly, RationalCoefficient};
use crate::algebra::{ConstraintSpec, PulseFamily};
use crate::error::{Error, Result};
use crate::su2::Symmetry;

/// Largest order accepted by [`weierstrass_system`].
pub const MAX_EXACT_ORDER: usize = 4;

/// `f_L^j(γ)` for `j = 0..=jmax` with exact rational coefficients.
pub fn ml_poly_exact(len: usize, jmax: usize) -> Vec<QPoly> {
    let mut f = vec![QPoly::one()];
    if jmax >= 1 {
        f.push(QPoly::from_ints(&[0, -1]));
    }
    let minus_gamma = QPoly::from_ints(&[0, -1]);
    for j in 1..jmax {
        let a = &minus_gamma * &f[j];
        let b = f[j - 1].scale(&BigRational::from_integer(BigInt::from(j as i64 - 1 - len as i64)));
        let next = (&a + &b).scale(&BigRational::new(BigInt::one(), BigInt::from(j as i64 + 1)));
        f.push(next);
    }
    f.truncate(jmax + 1);
    f
}

/// Gaussian-integer polynomial in `t`: `(re, im)` per exponent.
type GaussPoly = BTreeMap<Vec<u32>, (BigInt, BigInt)>;

fn binomial_row(k: u32) -> Vec<BigInt> {
    let mut row = vec![BigInt::one()];
    for i in 0..k {
        let next = row[i as usize].clone() * BigInt::from(k - i) / BigInt::from(i + 1);
        row.push(next);
    }
    row
}

/// Coefficients of `(1+it)^a (1−it)^b` as Gaussian integers, ascending.
fn gauss_factor(a: u32, b: u32) -> Vec<(BigInt, BigInt)> {
    // (1+it)^a: coefficient of t^k is C(a,k) i^k.
    let pow = |e: u32, sign: i64| -> Vec<(BigInt, BigInt)> {
        binomial_row(e)
            .into_iter()
            .enumerate()
            .map(|(k, c)| {
                let s = if sign < 0 && k % 2 == 1 { -c } else { c };
                match k % 4 {
                    0 => (s, BigInt::zero()),
                    1 => (BigInt::zero(), s),
                    2 => (-s, BigInt::zero()),
                    _ => (BigInt::zero(), -s),
                }
            })
            .collect()
    };
    let (p, q) = (pow(a, 1), pow(b, -1));
    let mut out = vec![(BigInt::zero(), BigInt::zero()); p.len() + q.len() - 1];
    for (i, (pr, pi)) in p.iter().enumerate() {
        for (j, (qr, qi)) in q.iter().enumerate() {
            out[i + j].0 += pr * qr - pi * qi;
            out[i + j].1 += pr * qi + pi * qr;
        }
    }
    out
}

fn gauss_term(m: &[i64], d: &[u32]) -> GaussPoly {
    let mut acc: GaussPoly = BTreeMap::from([(vec![0; m.len()], (BigInt::one(), BigInt::zero()))]);
    for (k, (&mk, &dk)) in m.iter().zip(d).enumerate() {
        let a = (dk as i64 + mk) as u32;
        let b = (dk as i64 - mk) as u32;
        let factor = gauss_factor(a, b);
        let mut next = GaussPoly::new();
        for (e, (ar, ai)) in &acc {
            for (deg, (fr, fi)) in factor.iter().enumerate() {
                if fr.is_zero() && fi.is_zero() {
                    continue;
                }
                let mut e2 = e.clone();
                e2[k] += deg as u32;
                let slot = next.entry(e2).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
                slot.0 += ar * fr - ai * fi;
                slot.1 += ar * fi + ai * fr;
            }
        }
        acc = next;
    }
    acc
}

/// Multiplicity vectors of `Φ^j` over the independent half.
///
/// Each ordered choice of `j` positions contributes `e^{i Σ ±φ}` with signs
/// alternating `+, −, +, …` by rank; mirrored positions map back to their
/// half index (negated under `AP`).
fn multiplicities(n: usize, symmetry: Symmetry, j: usize) -> BTreeMap<Vec<i64>, i64> {
    let len = 2 * n;
    let slot = |pos: usize| -> (usize, i64) {
        if pos < n {
            (pos, 1)
        } else {
            let k = len - 1 - pos;
            (k, if symmetry == Symmetry::Ap { -1 } else { 1 })
        }
    };
    let mut out = BTreeMap::new();
    let mut chosen = Vec::with_capacity(j);
    fn rec(
        start: usize,
        len: usize,
        j: usize,
        chosen: &mut Vec<usize>,
        visit: &mut dyn FnMut(&[usize]),
    ) {
        if chosen.len() == j {
            visit(chosen);
            return;
        }
        for p in start..len {
            chosen.push(p);
            rec(p + 1, len, j, chosen, visit);
            chosen.pop();
        }
    }
    rec(0, len, j, &mut chosen, &mut |pos: &[usize]| {
        let mut m = vec![0i64; n];
        for (rank, &p) in pos.iter().enumerate() {
            let (k, s) = slot(p);
            m[k] += if rank % 2 == 0 { s } else { -s };
        }
        *out.entry(m).or_insert(0) += 1;
    });
    out
}

/// `(1 + t_k²)` for `k = 0..nvars`.
pub fn spurious_factors(nvars: usize) -> Vec<MultivariatePoly> {
    (0..nvars)
        .map(|k| {
            MultivariatePoly::from_terms(
                nvars,
                [
                    (Monomial::one(nvars), RationalCoefficient::one()),
                    (Monomial::var(nvars, k, 2), RationalCoefficient::one()),
                ],
            )
        })
        .collect()
}

/// Integer-coefficient polynomial in `t` whose coefficients are `QPoly`s.
fn to_multivariate(nvars: usize, terms: BTreeMap<Vec<u32>, QPoly>) -> MultivariatePoly {
    // Primitive part over ℤ[γ]: clear denominators, divide out the integer
    // content, make the leading coefficient's leading entry positive.
    let lcm = terms.values().fold(BigInt::one(), |acc, q| acc.lcm(&q.denominator_lcm()));
    let k = BigRational::from_integer(lcm);
    let scaled: BTreeMap<Vec<u32>, QPoly> = terms.into_iter().map(|(e, q)| (e, q.scale(&k))).collect();
    let content = scaled
        .values()
        .flat_map(|q| q.coeffs().iter())
        .fold(BigInt::zero(), |acc, c| acc.gcd(c.numer()));
    let mut p = MultivariatePoly::zero(nvars);
    if content.is_zero() {
        return p;
    }
    for (e, q) in scaled {
        let q = q.scale(&BigRational::new(BigInt::one(), content.clone()));
        p.add_term(Monomial(e), &RationalCoefficient::from_poly(q));
    }
    if p.lc().and_then(|c| c.num().lead()).is_some_and(|l| l.is_negative()) {
        p = p.scale(&RationalCoefficient::from_int(-1));
    }
    p
}

/// Removes every `(1+t_k²)` factor that divides `p` exactly.
fn strip_factors(mut p: MultivariatePoly, factors: &[MultivariatePoly]) -> MultivariatePoly {
    if p.is_zero() {
        return p;
    }
    for f in factors {
        while let Some(q) = p.exact_div(f) {
            p = q;
        }
    }
    p
}

/// The constraint rows of a symmetric order-`n` system as polynomials in
/// `t_k = tan(φ_k/2)` over `ℚ(γ)`.
///
/// Each row is primitive over `ℤ[γ]`, and any `(1+t_k²)` factor introduced
/// while clearing denominators that divides the row is removed again.
/// [`spurious_factors`] lists what may still be hidden in the ideal.
pub fn weierstrass_system(spec: &ConstraintSpec) -> Result<PolySystem> {
    let n = spec.n();
    let symmetry = spec.symmetry();
    if symmetry == Symmetry::None || spec.family() != PulseFamily::TwoPi || spec.len() != 2 * n {
        return Err(Error::Unsupported(
            "polynomial form needs an AP or PD system of length 2n".into(),
        ));
    }
    if n > MAX_EXACT_ORDER {
        return Err(Error::Unsupported(format!(
            "exact polynomial systems are limited to n ≤ {MAX_EXACT_ORDER}, got n = {n}"
        )));
    }
    let f = ml_poly_exact(2 * n, n);
    let factors = spurious_factors(n);
    let mut polys = Vec::new();
    for j in 1..=n {
        let odd = j % 2 == 1;
        let parts: &[bool] = match (symmetry, odd) {
            (Symmetry::Ap, true) => &[true],
            (Symmetry::Ap, false) => &[false],
            (Symmetry::Pd, true) => &[true, false],
            _ => &[],
        };
        if parts.is_empty() {
            continue;
        }
        let mult = multiplicities(n, symmetry, j);
        let mut d = vec![0u32; n];
        for m in mult.keys() {
            for (dk, mk) in d.iter_mut().zip(m) {
                *dk = (*dk).max(mk.unsigned_abs() as u32);
            }
        }
        let mut num = GaussPoly::new();
        for (m, count) in &mult {
            for (e, (re, im)) in gauss_term(m, &d) {
                let slot = num.entry(e).or_insert_with(|| (BigInt::zero(), BigInt::zero()));
                slot.0 += re * BigInt::from(*count);
                slot.1 += im * BigInt::from(*count);
            }
        }
        for &real in parts {
            let mut terms: BTreeMap<Vec<u32>, QPoly> = BTreeMap::new();
            for (e, (re, im)) in &num {
                let c = if real { re } else { im };
                if !c.is_zero() {
                    terms.insert(e.clone(), QPoly::constant(BigRational::from_integer(c.clone())));
                }
            }
            if real {
                // − f^j(γ) · ∏ (1+t_k²)^{D_k}
                let zeros = vec![0i64; n];
                for (e, (re, _)) in gauss_term(&zeros, &d) {
                    let q = f[j].scale(&BigRational::from_integer(-re));
                    let slot = terms.entry(e).or_default();
                    *slot = &*slot + &q;
                }
            }
            terms.retain(|_, q| !q.is_zero());
            let p = strip_factors(to_multivariate(n, terms), &factors);
            if !p.is_zero() {
                polys.push(p);
            }
        }
    }
    Ok(PolySystem::new(n, polys))
}

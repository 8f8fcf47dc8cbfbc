//! Sparse multivariate polynomials over `ℚ(γ)` in lexicographic order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use super::ratfun::RationalCoefficient;

/// Exponent vector `(e₁, …, e_m)` of `t₁^{e₁}⋯t_m^{e_m}`.
///
/// Ordered lexicographically with `t_m > t_{m−1} > … > t₁`: exponents are
/// compared from the highest-index variable down, so eliminating down to
/// `t₁` leaves a univariate polynomial in `t₁`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Monomial(pub Vec<u32>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Self(vec![0; nvars])
    }

    pub fn var(nvars: usize, k: usize, e: u32) -> Self {
        let mut m = Self::one(nvars);
        m.0[k] = e;
        m
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self / other`; caller guarantees divisibility.
    pub fn div(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.iter().rev().cmp(other.0.iter().rev())
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_one() {
            return f.write_str("1");
        }
        let mut first = true;
        for (k, &e) in self.0.iter().enumerate().rev() {
            if e == 0 {
                continue;
            }
            if !first {
                f.write_str("*")?;
            }
            first = false;
            write!(f, "t{}", k + 1)?;
            if e > 1 {
                write!(f, "^{e}")?;
            }
        }
        Ok(())
    }
}

/// Sparse polynomial; zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq)]
pub struct MultivariatePoly {
    nvars: usize,
    terms: BTreeMap<Monomial, RationalCoefficient>,
}

impl MultivariatePoly {
    pub fn zero(nvars: usize) -> Self {
        Self { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: RationalCoefficient) -> Self {
        Self::term(Monomial::one(nvars), c)
    }

    pub fn term(m: Monomial, c: RationalCoefficient) -> Self {
        let nvars = m.0.len();
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { nvars, terms }
    }

    /// `t_k` (0-based `k`).
    pub fn var(nvars: usize, k: usize) -> Self {
        Self::term(Monomial::var(nvars, k, 1), RationalCoefficient::one())
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, RationalCoefficient)>) -> Self {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Terms from the leading one downward.
    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &RationalCoefficient)> {
        self.terms.iter().rev()
    }

    pub fn coefficient(&self, m: &Monomial) -> Option<&RationalCoefficient> {
        self.terms.get(m)
    }

    /// Leading power product.
    pub fn lpp(&self) -> Option<&Monomial> {
        self.terms.keys().next_back()
    }

    /// Leading power product and coefficient, cloned.
    pub fn leading_term(&self) -> Option<(Monomial, RationalCoefficient)> {
        self.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone()))
    }

    /// Leading coefficient.
    pub fn lc(&self) -> Option<&RationalCoefficient> {
        self.terms.values().next_back()
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
    }

    /// Whether only `t_k` appears.
    pub fn is_univariate_in(&self, k: usize) -> bool {
        self.terms.keys().all(|m| m.0.iter().enumerate().all(|(i, &e)| i == k || e == 0))
    }

    pub fn add_term(&mut self, m: Monomial, c: &RationalCoefficient) {
        if c.is_zero() {
            return;
        }
        match self.terms.get_mut(&m) {
            Some(v) => {
                let s = &*v + c;
                if s.is_zero() {
                    self.terms.remove(&m);
                } else {
                    *v = s;
                }
            }
            None => {
                self.terms.insert(m, c.clone());
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), &-c);
        }
        out
    }

    pub fn scale(&self, c: &RationalCoefficient) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self { nvars: self.nvars, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    /// `self · c · m`.
    pub fn mul_term(&self, m: &Monomial, c: &RationalCoefficient) -> Self {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        Self {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(k, v)| (k.mul(m), v * c)).collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &other.terms {
            out = out.add(&self.mul_term(m, c));
        }
        out
    }

    pub fn pow(&self, e: u32) -> Self {
        (0..e).fold(Self::constant(self.nvars, RationalCoefficient::one()), |acc, _| acc.mul(self))
    }

    /// Scaled to leading coefficient one.
    pub fn monic(&self) -> Self {
        match self.lc() {
            Some(lc) => self.scale(&lc.recip()),
            None => self.clone(),
        }
    }

    /// Division by a single polynomial: `self = q·d + r`.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        let (lm, lc) = (d.lpp().expect("nonzero divisor").clone(), d.lc().expect("nonzero").clone());
        let mut p = self.clone();
        let mut q = Self::zero(self.nvars);
        let mut r = Self::zero(self.nvars);
        while let Some((m, c)) = p.terms.iter().next_back().map(|(m, c)| (m.clone(), c.clone())) {
            if lm.divides(&m) {
                let qm = m.div(&lm);
                let qc = &c / &lc;
                p = p.sub(&d.mul_term(&qm, &qc));
                q.add_term(qm, &qc);
            } else {
                p.terms.remove(&m);
                r.add_term(m, &c);
            }
        }
        (q, r)
    }

    /// Exact quotient when `d` divides `self`.
    pub fn exact_div(&self, d: &Self) -> Option<Self> {
        let (q, r) = self.div_rem(d);
        r.is_zero().then_some(q)
    }

    /// Numerical value at `γ` and `t`.
    pub fn eval(&self, gamma: f64, t: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|(m, c)| c.eval(gamma) * m.0.iter().zip(t).map(|(&e, x)| x.powi(e as i32)).product::<f64>())
            .sum()
    }

    /// Coefficients (ascending) in `t_k` after fixing `γ` and the other
    /// variables.
    pub fn univariate_at(&self, k: usize, gamma: f64, t: &[f64]) -> Vec<f64> {
        let deg = self.terms.keys().map(|m| m.0[k]).max().unwrap_or(0) as usize;
        let mut c = vec![0.0; deg + 1];
        for (m, v) in &self.terms {
            let rest: f64 = m
                .0
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != k)
                .map(|(i, &e)| t[i].powi(e as i32))
                .product();
            c[m.0[k] as usize] += v.eval(gamma) * rest;
        }
        c
    }
}

/// `c₁*t2^2*t1 + c₂*t1 + …`, leading term first.
impl fmt::Display for MultivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (i, (m, c)) in self.terms().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            if m.is_one() {
                write!(f, "{c}")?;
            } else {
                write!(f, "{c}*{m:?}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for MultivariatePoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

/// Polynomials sharing a variable set and the lex order `t_m > … > t₁`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PolySystem {
    nvars: usize,
    polys: Vec<MultivariatePoly>,
}

impl PolySystem {
    pub fn new(nvars: usize, polys: Vec<MultivariatePoly>) -> Self {
        assert!(polys.iter().all(|p| p.nvars() == nvars), "mixed variable sets");
        Self { nvars, polys }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn polys(&self) -> &[MultivariatePoly] {
        &self.polys
    }

    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Each member scaled monic, sorted by leading power product.
    pub fn normalized(&self) -> Vec<MultivariatePoly> {
        let mut v: Vec<MultivariatePoly> = self.polys.iter().filter(|p| !p.is_zero()).map(|p| p.monic()).collect();
        v.sort_by(|a, b| a.lpp().cmp(&b.lpp()).then_with(|| a.to_string().cmp(&b.to_string())));
        v
    }

    /// Equal as sets after monic normalization.
    pub fn same_up_to_units(&self, other: &PolySystem) -> bool {
        self.normalized() == other.normalized()
    }

    /// Textual dump: one polynomial per line, monomials sorted leading first.
    pub fn dump(&self) -> String {
        self.polys.iter().map(|p| format!("{p}\n")).collect()
    }
}

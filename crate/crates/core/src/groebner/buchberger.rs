//! S-polynomials, multivariate division, Buchberger completion and the
//! post-processing steps (reduced basis, removal of spurious factors).

use super::poly::{Monomial, MultivariatePoly, PolySystem};
use super::ratfun::RationalCoefficient;
use crate::closed_form::real_roots;
use crate::error::{Error, Result};

/// Limits on basis growth before giving up with [`Error::ResourceLimit`].
#[derive(Clone, Copy, Debug)]
pub struct BuchbergerLimits {
    pub max_basis: usize,
    pub max_pairs: usize,
}

impl Default for BuchbergerLimits {
    fn default() -> Self {
        Self { max_basis: 256, max_pairs: 20_000 }
    }
}

/// `lcm(LPP(f), LPP(g)) · (f/LM(f) − g/LM(g))`.
pub fn spol(f: &MultivariatePoly, g: &MultivariatePoly) -> MultivariatePoly {
    let (Some(lf), Some(lg)) = (f.lpp(), g.lpp()) else {
        return MultivariatePoly::zero(f.nvars());
    };
    let l = lf.lcm(lg);
    let a = f.mul_term(&l.div(lf), &f.lc().expect("nonzero").recip());
    let b = g.mul_term(&l.div(lg), &g.lc().expect("nonzero").recip());
    a.sub(&b)
}

/// Remainder of `f` on division by `divisors`, tried in the listed order.
pub fn reduce(f: &MultivariatePoly, divisors: &[MultivariatePoly]) -> MultivariatePoly {
    let leads: Vec<(Monomial, RationalCoefficient)> = divisors
        .iter()
        .filter_map(|g| Some((g.lpp()?.clone(), g.lc()?.clone())))
        .collect();
    let active: Vec<&MultivariatePoly> = divisors.iter().filter(|g| !g.is_zero()).collect();
    let mut p = f.clone();
    let mut r = MultivariatePoly::zero(f.nvars());
    while let Some((m, c)) = p.leading_term() {
        match leads.iter().position(|(lm, _)| lm.divides(&m)) {
            Some(i) => {
                let (lm, lc) = &leads[i];
                p = p.sub(&active[i].mul_term(&m.div(lm), &(&c / lc)));
            }
            None => {
                let lt = MultivariatePoly::term(m.clone(), c.clone());
                p = p.sub(&lt);
                r.add_term(m, &c);
            }
        }
    }
    r
}

/// Buchberger completion with the normal selection strategy: the pending
/// pair with the lowest-degree lcm is processed first (ties broken by lex
/// order of the lcm, then by age). Pairs with coprime leading power products
/// are skipped, as their S-polynomials always reduce to zero.
pub fn buchberger(f: &PolySystem) -> Result<PolySystem> {
    buchberger_with(f, BuchbergerLimits::default())
}

pub fn buchberger_with(f: &PolySystem, limits: BuchbergerLimits) -> Result<PolySystem> {
    let mut g: Vec<MultivariatePoly> = f.polys().iter().filter(|p| !p.is_zero()).cloned().collect();
    if g.is_empty() {
        return Err(Error::InvalidArgument("empty polynomial system".into()));
    }
    let mut pairs: Vec<(usize, usize)> = (0..g.len()).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
    let mut processed = 0usize;
    while !pairs.is_empty() {
        let key = |&(i, j): &(usize, usize)| {
            let l = g[i].lpp().expect("nonzero").lcm(g[j].lpp().expect("nonzero"));
            (l.degree(), l, j, i)
        };
        let best = (0..pairs.len()).min_by_key(|&k| key(&pairs[k])).expect("nonempty");
        let (i, j) = pairs.swap_remove(best);
        processed += 1;
        if processed > limits.max_pairs {
            return Err(Error::ResourceLimit(format!("more than {} S-pairs", limits.max_pairs)));
        }
        if g[i].lpp().expect("nonzero").coprime(g[j].lpp().expect("nonzero")) {
            continue;
        }
        let h = reduce(&spol(&g[i], &g[j]), &g);
        if h.is_zero() {
            continue;
        }
        if g.len() >= limits.max_basis {
            return Err(Error::ResourceLimit(format!("basis exceeded {} elements", limits.max_basis)));
        }
        let k = g.len();
        pairs.extend((0..k).map(|i| (i, k)));
        g.push(h);
    }
    Ok(PolySystem::new(f.nvars(), g))
}

/// Definition-style check: every S-polynomial reduces to zero.
pub fn is_groebner(g: &PolySystem) -> bool {
    let p = g.polys();
    (0..p.len()).all(|j| (0..j).all(|i| reduce(&spol(&p[i], &p[j]), p).is_zero()))
}

/// Repeats `g ← RED(g, G∖{g})` over the basis until nothing changes, drops
/// zeros and scales every member monic. Output is sorted by leading power
/// product, lowest first.
pub fn reduce_basis(g: &PolySystem) -> PolySystem {
    let mut basis: Vec<MultivariatePoly> = g.polys().iter().filter(|p| !p.is_zero()).cloned().collect();
    loop {
        let mut changed = false;
        let mut k = 0;
        while k < basis.len() {
            let others: Vec<MultivariatePoly> =
                basis.iter().enumerate().filter(|(i, _)| *i != k).map(|(_, p)| p.clone()).collect();
            let r = reduce(&basis[k], &others);
            if r.is_zero() {
                basis.remove(k);
                changed = true;
                continue;
            }
            if r.monic() != basis[k].monic() {
                changed = true;
            }
            basis[k] = r;
            k += 1;
        }
        if !changed {
            break;
        }
    }
    PolySystem::new(g.nvars(), PolySystem::new(g.nvars(), basis).normalized())
}

/// Removes the zero locus of `factors` from the ideal of `g`.
///
/// Each generator is divided by every listed factor for as long as the
/// division is exact, then the result is re-completed and re-reduced; this
/// repeats until no factor divides any generator.
pub fn saturate(g: &PolySystem, factors: &[MultivariatePoly]) -> Result<PolySystem> {
    let mut current = g.clone();
    loop {
        let mut changed = false;
        let polys: Vec<MultivariatePoly> = current
            .polys()
            .iter()
            .map(|p| {
                let mut p = p.clone();
                for f in factors.iter().filter(|f| !f.is_constant()) {
                    while let Some(q) = p.exact_div(f) {
                        p = q;
                        changed = true;
                    }
                }
                p
            })
            .collect();
        if !changed {
            return Ok(current);
        }
        current = reduce_basis(&buchberger(&PolySystem::new(g.nvars(), polys))?);
    }
}

/// Real common zeros of a lex Gröbner basis at fixed `γ`, found by
/// back-substitution from `t₁` upward.
pub fn real_zeros(g: &PolySystem, gamma: f64) -> Vec<Vec<f64>> {
    let m = g.nvars();
    let level = |p: &MultivariatePoly| -> Option<usize> {
        p.terms().flat_map(|(mono, _)| mono.0.iter().enumerate().filter(|(_, e)| **e > 0).map(|(k, _)| k)).max()
    };
    let mut partial: Vec<Vec<f64>> = vec![vec![0.0; m]];
    for k in 0..m {
        let members: Vec<&MultivariatePoly> = g.polys().iter().filter(|p| level(p) == Some(k)).collect();
        let mut next = Vec::new();
        for t in &partial {
            let polys: Vec<Vec<f64>> = members.iter().map(|p| p.univariate_at(k, gamma, t)).collect();
            let nonzero = |c: &Vec<f64>| {
                let s = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
                c.iter().skip(1).any(|x| x.abs() > 1e-12 * s.max(1.0))
            };
            let Some(driver) = polys.iter().filter(|c| nonzero(c)).min_by_key(|c| c.len()) else {
                continue;
            };
            for root in real_roots(driver).0 {
                let ok = polys.iter().all(|c| {
                    let v = c.iter().rev().fold(0.0, |acc, x| acc * root + x);
                    let mag = c.iter().rev().fold(0.0, |acc, x: &f64| acc * root.abs() + x.abs());
                    v.abs() <= 1e-8 * mag.max(1.0)
                });
                if ok {
                    let mut t2 = t.clone();
                    t2[k] = root;
                    next.push(t2);
                }
            }
        }
        partial = next;
    }
    partial
}

//! Multi-start Newton enumeration of the real solutions of a symmetric
//! system at fixed `γ`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{self, kappa, residual_and_jacobian, ConstraintSpec, PulseFamily};
use crate::error::{Error, Result};
use crate::continuation::{continue_path, ContinuationOptions, Seed, SeedFamily};
use crate::linalg::{newton, NewtonOptions};
use crate::su2::{wrap_angle, Symmetry};

/// Members must satisfy their system to this residual.
pub const MEMBER_TOL: f64 = 1e-10;
/// Max-norm distance below which two canonical roots are the same class.
pub const DEDUPE_TOL: f64 = 1e-6;

/// Wraps to `(−π, π]` and picks the global-sign representative with
/// `φ₁ ∈ (0, π]`. Negating every phase conjugates all phase sums, which
/// maps solutions to solutions with the same leading error.
pub fn canonicalize(phases: &[f64]) -> Vec<f64> {
    let wrapped: Vec<f64> = phases.iter().map(|&p| wrap_angle(p)).collect();
    // 0 and π are their own mirrors, so the sign is decided by the first
    // phase that is neither; for φ₁ ∉ {0, π} this is the φ₁ ≤ 0 rule.
    match wrapped.iter().find(|&&p| p != 0.0 && p != PI) {
        Some(&p) if p < 0.0 => wrapped.iter().map(|&p| wrap_angle(-p)).collect(),
        _ => wrapped.iter().map(|&p| if p == 0.0 { 0.0 } else { p }).collect(),
    }
}

/// Max-norm distance between phase lists on the circle.
pub fn angular_distance(a: &[f64], b: &[f64]) -> f64 {
    if a.len() != b.len() {
        return f64::INFINITY;
    }
    a.iter().zip(b).map(|(x, y)| wrap_angle(x - y).abs()).fold(0.0, f64::max)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchSolution {
    /// Canonical half phases.
    pub phases: Vec<f64>,
    pub kappa: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchStats {
    pub starts: usize,
    pub converged: usize,
    /// Converged starts that landed on an already known class.
    pub deduped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionSet {
    pub spec: ConstraintSpec,
    /// Distinct classes, sorted by κ.
    pub members: Vec<SearchSolution>,
    pub stats: SearchStats,
    pub seed: u64,
}

impl SolutionSet {
    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    /// Finds a member within `tol` of `phases` (either global sign).
    /// Adds `phases` as a new class unless it is already present or fails
    /// the membership residual. Returns whether it was added.
    pub fn absorb(&mut self, phases: &[f64]) -> Result<bool> {
        let phases = canonicalize(phases);
        if self.find(&phases, DEDUPE_TOL).is_some() {
            return Ok(false);
        }
        let residual = algebra::norm(&algebra::symmetric_residual(&self.spec, &phases)?);
        if residual >= MEMBER_TOL {
            return Ok(false);
        }
        let full = algebra::expand_symmetry(&phases, self.spec.symmetry());
        let kappa = kappa(self.spec.n(), self.spec.gamma(), &full)?;
        self.members.push(SearchSolution { phases, kappa, residual });
        self.sort();
        Ok(true)
    }

    fn sort(&mut self) {
        self.members.sort_by(|a, b| a.kappa.total_cmp(&b.kappa).then(a.phases[0].total_cmp(&b.phases[0])));
    }

    pub fn find(&self, phases: &[f64], tol: f64) -> Option<&SearchSolution> {
        let c = canonicalize(phases);
        self.members.iter().find(|m| angular_distance(&m.phases, &c) < tol)
    }
}

/// Default number of starts, `10³·2ⁿ`.
pub fn default_starts(n: usize) -> usize {
    1000usize << n.min(20)
}

fn start_point(seed: u64, index: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    (0..n).map(|_| PI - rng.random_range(0.0..2.0 * PI)).collect()
}

/// Runs Newton with backtracking from `num_starts` uniform random points.
///
/// Each start draws from its own ChaCha substream (stream = start index), so
/// the result depends only on `seed`, never on scheduling.
pub fn multistart_search(spec: &ConstraintSpec, num_starts: usize, seed: u64) -> Result<SolutionSet> {
    if spec.symmetry() == Symmetry::None || spec.family() != PulseFamily::TwoPi {
        return Err(Error::Unsupported("search needs an AP or PD 2π system".into()));
    }
    if spec.len() != 2 * spec.n() {
        return Err(Error::Unsupported("search needs L = 2n".into()));
    }
    let n = spec.n();
    let opts = NewtonOptions {
        tol: 1e-13,
        accept: MEMBER_TOL * 0.5,
        max_iter: 60,
        line_search: true,
        blowup: f64::INFINITY,
    };
    let roots: Vec<Option<Vec<f64>>> = (0..num_starts as u64)
        .into_par_iter()
        .map(|i| {
            let x0 = start_point(seed, i, n);
            let out = newton(|x: &[f64]| residual_and_jacobian(spec, x), &x0, &opts).ok()?;
            out.converged.then(|| canonicalize(&out.x))
        })
        .collect();

    let mut stats = SearchStats { starts: num_starts, converged: 0, deduped: 0 };
    let mut classes: Vec<Vec<f64>> = Vec::new();
    for root in roots.into_iter().flatten() {
        stats.converged += 1;
        if classes.iter().any(|c| angular_distance(c, &root) < DEDUPE_TOL) {
            stats.deduped += 1;
        } else {
            classes.push(root);
        }
    }
    let mut members = Vec::with_capacity(classes.len());
    for phases in classes {
        let full = algebra::expand_symmetry(&phases, spec.symmetry());
        let residual = algebra::norm(&algebra::symmetric_residual(spec, &phases)?);
        if residual >= MEMBER_TOL {
            continue;
        }
        let kappa = kappa(n, spec.gamma(), &full)?;
        members.push(SearchSolution { phases, kappa, residual });
    }
    let mut set = SolutionSet { spec: *spec, members, stats, seed };
    set.sort();
    Ok(set)
}

/// Searches at every `γ` in `gammas`, then continues each class found at
/// one `γ` to all the others and merges the results.
///
/// Solution classes at different `γ` are usually connected by smooth paths,
/// so a class with a tiny basin at one `γ` is often easy to hit at another.
/// `extra` seeds (e.g. analytic continuation seeds) are continued to every
/// `γ` as well. The returned sets follow the order of `gammas`; their stats
/// describe the direct search only.
pub fn search_across(
    n: usize,
    symmetry: Symmetry,
    gammas: &[f64],
    starts: usize,
    seed: u64,
    extra: &[Seed],
) -> Result<Vec<SolutionSet>> {
    let mut sets = gammas
        .iter()
        .map(|&g| multistart_search(&ConstraintSpec::symmetric(n, g, symmetry)?, starts, seed))
        .collect::<Result<Vec<_>>>()?;
    let mut seeds: Vec<Seed> = extra.iter().filter(|s| s.n == n && s.symmetry == symmetry).cloned().collect();
    for set in &sets {
        seeds.extend(set.members.iter().map(|m| Seed {
            family: SeedFamily::Found,
            n,
            gamma0: set.spec.gamma(),
            symmetry,
            half: m.phases.clone(),
        }));
    }
    let opts = ContinuationOptions::default();
    for set in &mut sets {
        let target = set.spec.gamma();
        for seed in seeds.iter().filter(|s| s.gamma0 != target) {
            let Ok(path) = continue_path(seed, target, &opts) else { continue };
            if path.reached() {
                set.absorb(&path.last().phases)?;
            }
        }
    }
    Ok(sets)
}

/// Classes of both symmetry families at one `(n, γ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Census {
    pub n: usize,
    pub gamma: f64,
    pub ap: SolutionSet,
    /// Absent for odd `n`, where the palindromic system is overdetermined.
    pub pd: Option<SolutionSet>,
}

impl Census {
    /// Canonical classes of AP and PD together (one per `±φ` pair).
    pub fn pooled_classes(&self) -> usize {
        self.ap.len() + self.pd.as_ref().map_or(0, SolutionSet::len)
    }

    /// Signed sequences per family (each canonical class stands for `φ`
    /// and `−φ`).
    pub fn signed_counts(&self) -> (usize, Option<usize>) {
        (2 * self.ap.len(), self.pd.as_ref().map(|p| 2 * p.len()))
    }
}

/// Expected number of signed sequences per symmetry family, `2^⌈n/2⌉`.
pub fn expected_family_count(n: usize) -> usize {
    1 << n.div_ceil(2)
}

pub fn census(n: usize, gamma: f64, starts: usize, seed: u64) -> Result<Census> {
    let ap = multistart_search(&ConstraintSpec::symmetric(n, gamma, Symmetry::Ap)?, starts, seed)?;
    let pd = if n % 2 == 0 {
        Some(multistart_search(&ConstraintSpec::symmetric(n, gamma, Symmetry::Pd)?, starts, seed)?)
    } else {
        None
    };
    Ok(Census { n, gamma, ap, pd })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn canonicalize_examples() {
        let c = canonicalize(&[-2.0 * PI / 3.0]);
        assert!((c[0] - 2.0 * PI / 3.0).abs() < 1e-15);
        assert_eq!(canonicalize(&[2.35949, 1.35980]), vec![2.35949, 1.35980]);
        assert_eq!(canonicalize(&[PI, 0.5]), vec![PI, 0.5]);
        assert_eq!(canonicalize(&[-PI, 0.5]), vec![PI, 0.5]);
        assert_eq!(canonicalize(&[0.0, -0.5]), vec![0.0, 0.5]);
    }

    #[test]
    fn ap2_search_finds_table_row() {
        let spec = ConstraintSpec::symmetric(2, 1.0, Symmetry::Ap).unwrap();
        let set = multistart_search(&spec, 1000, 3).unwrap();
        assert_eq!(set.len(), 1);
        assert!(set.find(&[2.35949, 1.35980], 1e-4).is_some());
        assert!(set.find(&[-2.35949, -1.35980], 1e-4).is_some());
        assert_eq!(set.stats.starts, 1000);
        assert!(set.stats.converged > 100);
    }

    #[test]
    fn small_census() {
        let c = census(2, 1.0, 1000, 9).unwrap();
        assert_eq!(c.pooled_classes(), 2);
        let c = census(1, 1.0, 500, 9).unwrap();
        assert_eq!(c.pooled_classes(), 1);
        assert_eq!(c.signed_counts().0, expected_family_count(1));
    }

    #[test]
    fn search_is_deterministic() {
        let spec = ConstraintSpec::symmetric(3, 0.5, Symmetry::Ap).unwrap();
        let a = multistart_search(&spec, 400, 42).unwrap();
        let b = multistart_search(&spec, 400, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn transfer_fills_sparse_searches() {
        // 40 starts is too few at n = 5; pooling across γ recovers the rest.
        let sets = search_across(5, Symmetry::Ap, &[1.0, 0.5, 0.25], 40, 1, &[]).unwrap();
        let direct: Vec<usize> = sets.iter().map(|s| s.stats.converged - s.stats.deduped).collect();
        for set in &sets {
            assert!(set.len() >= *direct.iter().max().unwrap());
            for m in &set.members {
                assert!(m.residual < MEMBER_TOL);
            }
        }
    }

    #[test]
    fn absorb_skips_duplicates_and_non_roots() {
        let spec = ConstraintSpec::symmetric(2, 1.0, Symmetry::Ap).unwrap();
        let mut set = multistart_search(&spec, 200, 3).unwrap();
        let before = set.len();
        let first = set.members[0].phases.clone();
        let negated: Vec<f64> = first.iter().map(|p| -p).collect();
        assert!(!set.absorb(&negated).unwrap());
        assert!(!set.absorb(&[0.1, 0.2]).unwrap());
        assert_eq!(set.len(), before);
    }

    #[test]
    fn search_rejects_unsymmetric_specs() {
        let spec = ConstraintSpec::new(2, 4, 1.0, PulseFamily::TwoPi, Symmetry::None).unwrap();
        assert!(multistart_search(&spec, 10, 0).is_err());
    }

    proptest! {
        #[test]
        fn canonicalize_is_idempotent(p in proptest::collection::vec(-10.0f64..10.0, 1..6)) {
            let c = canonicalize(&p);
            prop_assert_eq!(canonicalize(&c), c.clone());
            prop_assert!(c.iter().all(|x| *x > -PI && *x <= PI));
            let neg: Vec<f64> = p.iter().map(|x| -x).collect();
            prop_assert!(angular_distance(&canonicalize(&neg), &c) < 1e-12);
        }
    }
}

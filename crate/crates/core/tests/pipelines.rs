//! Cross-module checks: the independent solvers must agree with each other.

use std::f64::consts::PI;

use arbpulse::algebra::{expand_symmetry, full_residual, kappa, norm};
use arbpulse::closed_form::{solve_closed_form, ClosedFormFamily};
use arbpulse::continuation::{
    continue_path, coverage, covers, kappa_profile, seed_bootstrap, seed_top, ContinuationOptions, ContinuationPath,
};
use arbpulse::groebner::{buchberger, real_zeros, reduce_basis, saturate, spurious_factors, weierstrass_system};
use arbpulse::harness::{literature_library, transition_curve};
use arbpulse::search::{angular_distance, canonicalize, multistart_search};
use arbpulse::{ConstraintSpec, PulseSequence, SequenceRecord, Symmetry};
use proptest::prelude::*;

fn sorted_canonical(mut v: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    v.iter_mut().for_each(|p| *p = canonicalize(p));
    v.sort_by(|a, b| a.iter().zip(b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    v.dedup_by(|a, b| angular_distance(a, b) < 1e-9);
    v
}

fn groebner_phases(n: usize, sym: Symmetry, gamma: f64) -> Vec<Vec<f64>> {
    let w = weierstrass_system(&ConstraintSpec::symmetric(n, 0.0, sym).unwrap()).unwrap();
    let g = saturate(&reduce_basis(&buchberger(&w).unwrap()), &spurious_factors(w.nvars())).unwrap();
    sorted_canonical(real_zeros(&g, gamma).into_iter().map(|t| t.iter().map(|x| 2.0 * x.atan()).collect()).collect())
}

fn closed_phases(family: ClosedFormFamily, gamma: f64) -> Vec<Vec<f64>> {
    sorted_canonical(solve_closed_form(family, gamma, None).unwrap().iter().map(|s| s.half().to_vec()).collect())
}

#[test]
fn groebner_zero_set_matches_closed_form() {
    // Rational γ values spread over the real range of both families.
    for k in -9..=10 {
        let gamma = k as f64 / 5.5;
        for (family, n, sym) in [(ClosedFormFamily::Ap1, 1, Symmetry::Ap), (ClosedFormFamily::Pd2, 2, Symmetry::Pd)] {
            let a = groebner_phases(n, sym, gamma);
            let b = closed_phases(family, gamma);
            assert_eq!(a.len(), b.len(), "{family} γ={gamma}: {a:?} vs {b:?}");
            for (x, y) in a.iter().zip(&b) {
                assert!(angular_distance(x, y) < 1e-10, "{family} γ={gamma}: {x:?} vs {y:?}");
            }
        }
    }
}

#[test]
fn search_recovers_every_closed_form_class() {
    for (family, gamma) in [(ClosedFormFamily::Ap3, 0.5), (ClosedFormFamily::Pd4, 1.0), (ClosedFormFamily::Ap2, 0.25)] {
        let spec = ConstraintSpec::symmetric(family.order(), gamma, family.symmetry()).unwrap();
        let found = multistart_search(&spec, 4000, 5).unwrap();
        let closed = closed_phases(family, gamma);
        assert_eq!(found.len(), closed.len(), "{family} γ={gamma}");
        for c in &closed {
            assert!(found.find(c, 1e-8).is_some(), "{family} γ={gamma}: {c:?} not found");
        }
    }
}

#[test]
fn continuation_lands_on_a_closed_form_solution() {
    for (n, family) in [(2, ClosedFormFamily::Ap2), (3, ClosedFormFamily::Ap3)] {
        for gamma in [0.25, 0.5, 1.0] {
            let path = continue_path(&seed_top(n, 0).unwrap(), gamma, &ContinuationOptions::default()).unwrap();
            assert!(path.reached());
            let end = canonicalize(&path.last().phases);
            let closed = closed_phases(family, gamma);
            assert!(closed.iter().any(|c| angular_distance(c, &end) < 1e-8), "n={n} γ={gamma}");
        }
    }
}

fn assert_path_consistent(path: &ContinuationPath) {
    for r in &path.records {
        let full = expand_symmetry(&r.phases, path.seed.symmetry);
        assert!(norm(&full_residual(&full, path.seed.n, r.gamma)) < 1e-9, "γ={}", r.gamma);
    }
    // κ = (2|f − Φ|)^{1/(n+1)} vanishes at the ToP seeds (γ = 0 and γ = 2)
    // and leaves them like a root, so the jump bound only applies between.
    let profile: Vec<(f64, f64)> =
        kappa_profile(path).unwrap().into_iter().filter(|p| (0.05..=1.95).contains(&p.0)).collect();
    for w in profile.windows(2) {
        assert!((w[1].1 - w[0].1).abs() <= 0.5, "κ jumps {} → {} near γ={}", w[0].1, w[1].1, w[1].0);
    }
}

#[test]
fn restart_structure_of_top_paths() {
    let opts = ContinuationOptions::default();
    for n in 1..=12 {
        let mut paths = vec![continue_path(&seed_top(n, 0).unwrap(), 2.0, &opts).unwrap()];
        if n <= 6 {
            assert!(covers(&coverage(&paths), 0.0, 2.0), "n={n}: {:?}", paths[0].termination);
        }
        if n >= 2 {
            paths.push(continue_path(&seed_top(n, 1).unwrap(), 0.0, &opts).unwrap());
        }
        if n >= 11 {
            let boot = seed_bootstrap(n).unwrap();
            paths.push(continue_path(&boot, 0.0, &opts).unwrap());
            paths.push(continue_path(&boot, 2.0, &opts).unwrap());
        }
        for p in &paths {
            assert_path_consistent(p);
        }
        assert!(covers(&coverage(&paths), 0.05, 1.95), "n={n}: {:?}", coverage(&paths));
    }
}

#[test]
fn broadband_inversion_beats_short_class_a_sequences_far_from_zero() {
    let lib = literature_library().unwrap();
    let p_at = |label: &str| {
        let entry = lib.iter().find(|e| e.sequence.label() == label).unwrap();
        transition_curve(&entry.sequence, &[0.2]).unwrap().points[0].1
    };
    let bb4 = p_at("BB4");
    assert!(bb4 > p_at("Delta2"), "BB4 {bb4} vs Δ₂");
    assert!(bb4 > p_at("C9"), "BB4 {bb4} vs C₉");
}

#[test]
fn records_round_trip_through_json() {
    for seq in solve_closed_form(ClosedFormFamily::Pd4, 0.5, None).unwrap() {
        let rec = SequenceRecord::from_sequence(&seq, 4, 0.5, "closed_form:PD4");
        let text = serde_json::to_string(&rec).unwrap();
        let back: SequenceRecord = serde_json::from_str(&text).unwrap();
        assert_eq!(back, rec);
        assert_eq!(back.to_sequence().unwrap().phases(), seq.phases());
        assert!(rec.residual_norm < 1e-9);
        let k = kappa(4, 0.5, seq.phases()).unwrap();
        assert_eq!(rec.kappa, Some(k));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn closed_form_solutions_are_search_fixed_points(g in 0.05f64..1.95) {
        // Every closed-form solution is a converged root of the symmetric
        // system the search works on, so Newton from it stays put.
        for family in [ClosedFormFamily::Ap2, ClosedFormFamily::Pd2, ClosedFormFamily::Ap3] {
            for seq in solve_closed_form(family, g, None).unwrap() {
                let spec = ConstraintSpec::symmetric(family.order(), g, family.symmetry()).unwrap();
                let r = arbpulse::algebra::symmetric_residual(&spec, seq.half()).unwrap();
                prop_assert!(norm(&r) < 1e-9);
            }
        }
    }

    #[test]
    fn two_pi_products_of_even_length_are_identity(phases in proptest::collection::vec(-PI..PI, 1..10)) {
        let mut p = phases.clone();
        if p.len() % 2 == 1 {
            p.push(0.3);
        }
        let seq = PulseSequence::new(2.0 * PI, p).unwrap();
        let u = arbpulse::su2::compose(&seq, 0.0);
        prop_assert!(u.max_abs_diff(&arbpulse::Unitary2::identity()) < 1e-12);
    }
}

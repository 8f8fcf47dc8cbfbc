//! Shared inputs for the criterion benchmarks.
//!
//! Everything here is deterministic so successive runs time identical work.

use std::f64::consts::PI;

use arbpulse::continuation::top_at_unit_gamma;
use arbpulse::groebner::weierstrass_system;
use arbpulse::{ConstraintSpec, PolySystem, PulseSequence, Symmetry};

/// ToP`n` at `γ = 1`, the full antipalindromic sequence.
pub fn top_sequence(n: usize) -> PulseSequence {
    let half = top_at_unit_gamma(n).expect("bootstrap converges for benchmark orders");
    PulseSequence::from_half(2.0 * PI, &half, Symmetry::Ap)
        .expect("valid half list")
        .with_gamma(1.0)
        .with_label(format!("ToP{n}"))
}

/// Half phase list of ToP`n` at `γ = 1` with its system.
pub fn top_system(n: usize) -> (ConstraintSpec, Vec<f64>) {
    let spec = ConstraintSpec::symmetric(n, 1.0, Symmetry::Ap).expect("valid order");
    (spec, top_at_unit_gamma(n).expect("bootstrap converges"))
}

/// `len` pseudo-random phases from a fixed linear congruential stream.
pub fn scrambled_phases(len: usize) -> Vec<f64> {
    let mut state: u64 = 0x2545_f491_4f6c_dd1d;
    (0..len)
        .map(|_| {
            state = state.wrapping_mul(6_364_136_223_846_793_005).wrapping_add(1_442_695_040_888_963_407);
            ((state >> 11) as f64 / (1u64 << 53) as f64) * 2.0 * PI - PI
        })
        .collect()
}

/// Symbolic palindromic `n = 2` system, the smallest nontrivial Gröbner input.
pub fn pd2_polynomials() -> PolySystem {
    weierstrass_system(&ConstraintSpec::symmetric(2, 0.0, Symmetry::Pd).expect("valid order"))
        .expect("PD2 is within the exact-arithmetic range")
}

#[cfg(test)]
mod tests {
    use super::*;
    use arbpulse::algebra::{norm, symmetric_residual};

    #[test]
    fn fixtures_are_solutions() {
        for n in [2, 4, 8] {
            let (spec, half) = top_system(n);
            assert!(norm(&symmetric_residual(&spec, &half).unwrap()) < 1e-9);
            assert_eq!(top_sequence(n).len(), 2 * n);
        }
    }

    #[test]
    fn scrambled_phases_are_deterministic_and_wrapped() {
        let a = scrambled_phases(100);
        assert_eq!(a, scrambled_phases(100));
        assert!(a.iter().all(|p| (-PI..PI).contains(p)));
    }

    #[test]
    fn pd2_has_two_generators() {
        assert_eq!(pd2_polynomials().len(), 2);
    }
}

//! Sequence-level transformations: toggling 2π sequences into π-pulse
//! sequences, assembling the corrected rotation, the Class-B `V_n` family,
//! nonlinear amplitude-error models and the zeroth-pulse-centred
//! rearrangement of antipalindromic sequences.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::su2::{compose, compose_phases, faulty_pulse, rotation, PulseSequence, Symmetry, Unitary2};

/// Relative tolerance for `θ_T = γ θ₀`.
const GAMMA_TOL: f64 = 1e-9;

/// Frame change from 2π pulses to π pulses:
/// `ψ_k = −Σ_{h<k} (−1)^h φ_h + Σ_{h>k} (−1)^h φ_h` (1-based `h`).
pub fn toggle(phases: &[f64]) -> Vec<f64> {
    let signed: Vec<f64> = phases
        .iter()
        .enumerate()
        .map(|(i, &p)| if (i + 1) % 2 == 0 { p } else { -p })
        .collect();
    let total: f64 = signed.iter().sum();
    let mut before = 0.0;
    signed
        .iter()
        .map(|&s| {
            let after = total - before - s;
            let psi = after - before;
            before += s;
            psi
        })
        .collect()
}

/// `BB_n`-style broadband π-pulse sequence from a 2π solution: the toggled
/// phases as θ₀ = π pulses, no symmetry tag.
pub fn toggled_sequence(seq: &PulseSequence) -> Result<PulseSequence> {
    let mut out = PulseSequence::new(PI, toggle(seq.phases()))?;
    if let Some(g) = seq.gamma() {
        out = out.with_gamma(g);
    }
    let label = if seq.label().is_empty() { "toggled".to_string() } else { format!("toggled {}", seq.label()) };
    Ok(out.with_label(label))
}

fn check_gamma(seq: &PulseSequence, theta_t: f64) -> Result<()> {
    if let Some(g) = seq.gamma() {
        let expect = g * seq.theta0();
        if (expect - theta_t).abs() > GAMMA_TOL * expect.abs().max(theta_t.abs()).max(1.0) {
            return Err(Error::GammaMismatch { gamma: g, theta_t, theta0: seq.theta0() });
        }
    }
    Ok(())
}

/// `U_T = S · M₀[θ_T]` under the linear error model.
///
/// Sequences that carry a target `γ` must satisfy `θ_T = γ θ₀`.
pub fn corrected_rotation(seq: &PulseSequence, theta_t: f64, eps: f64) -> Result<Unitary2> {
    check_gamma(seq, theta_t)?;
    Ok(compose(seq, eps) * faulty_pulse(0.0, theta_t, eps))
}

/// Class-B inverting sequence
/// `V_n = (2π/(n+1)) (0, 1, −1, 2, −2, …, n/2, −n/2)` with θ₀ = π.
pub fn vitanov(n: usize) -> Result<PulseSequence> {
    if n % 2 != 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("V_n needs a positive even n, got {n}")));
    }
    let unit = 2.0 * PI / (n as f64 + 1.0);
    let mut phases = vec![0.0];
    for k in 1..=n / 2 {
        phases.push(unit * k as f64);
        phases.push(-unit * k as f64);
    }
    Ok(PulseSequence::new(PI, phases)?.with_label(format!("V{n}")))
}

/// Amplitude error `M_φ[θ] = R_φ[θ + ε E(θ)]` for an arbitrary `E`.
#[derive(Clone)]
pub struct NonlinearErrorModel {
    error: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    theta0: f64,
    theta_t: f64,
}

impl fmt::Debug for NonlinearErrorModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("NonlinearErrorModel")
            .field("theta0", &self.theta0)
            .field("theta_t", &self.theta_t)
            .field("E(theta0)", &(self.error)(self.theta0))
            .finish()
    }
}

impl NonlinearErrorModel {
    pub fn new(error: impl Fn(f64) -> f64 + Send + Sync + 'static, theta0: f64, theta_t: f64) -> Result<Self> {
        let e0 = error(theta0);
        if e0 == 0.0 || !e0.is_finite() {
            return Err(Error::InvalidArgument(format!("E(θ₀) must be finite and nonzero, got {e0}")));
        }
        Ok(Self { error: Arc::new(error), theta0, theta_t })
    }

    /// The linear model `E(θ) = θ`.
    pub fn linear(theta0: f64, theta_t: f64) -> Result<Self> {
        Self::new(|t| t, theta0, theta_t)
    }

    pub fn error(&self, theta: f64) -> f64 {
        (self.error)(theta)
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn theta_t(&self) -> f64 {
        self.theta_t
    }

    /// Faulty pulse under this model.
    pub fn pulse(&self, phase: f64, theta: f64, eps: f64) -> Unitary2 {
        rotation(phase, theta + eps * self.error(theta))
    }
}

/// `(x per unit ε, γ_eff) = (E(θ₀)/2, E(θ_T)/E(θ₀))`.
///
/// With `x = ε E(θ₀)/2` every pulse is `R_φ[θ₀ + 2x]` and the final one is
/// `R₀[θ_T + 2xγ_eff]`, which is the linear problem at `γ_eff`.
pub fn nonlinear_remap(model: &NonlinearErrorModel) -> Result<(f64, f64)> {
    let e0 = model.error(model.theta0);
    if e0 == 0.0 {
        return Err(Error::InvalidArgument("E(θ₀) = 0".into()));
    }
    Ok((0.5 * e0, model.error(model.theta_t) / e0))
}

/// `S · M₀[θ_T]` with every pulse subject to the model's error. The
/// sequence's own `γ` tag is ignored: under a nonlinear model it refers to
/// `γ_eff`, not to `θ_T/θ₀`.
pub fn corrected_rotation_nonlinear(seq: &PulseSequence, model: &NonlinearErrorModel, eps: f64) -> Unitary2 {
    let s = seq
        .phases()
        .iter()
        .fold(Unitary2::identity(), |acc, &p| acc * model.pulse(p, seq.theta0(), eps));
    s * model.pulse(0.0, model.theta_t, eps)
}

/// Zeroth-pulse-centred arrangement of an antipalindromic γ = 1 sequence.
///
/// An AP list `(a₁…a_n, −a_n…−a₁)` followed by `M₀[2π]` is a cyclic shift
/// away from `(−a_n…−a₁, 0, a₁…a_n)`; the products are conjugate by the
/// first half, so the error order is unchanged. The returned sequence is
/// the whole operator (its own zeroth pulse included).
pub fn rearrange_symmetric(seq: &PulseSequence) -> Result<PulseSequence> {
    if seq.symmetry() != Symmetry::Ap {
        return Err(Error::InvalidArgument("rearrangement needs an AP-tagged sequence".into()));
    }
    if (seq.theta0() - 2.0 * PI).abs() > 1e-12 {
        return Err(Error::InvalidArgument("rearrangement needs θ₀ = 2π".into()));
    }
    if seq.gamma().is_some_and(|g| (g - 1.0).abs() > GAMMA_TOL) {
        return Err(Error::InvalidArgument("rearrangement needs γ = 1".into()));
    }
    let half = seq.half();
    let mut phases: Vec<f64> = half.iter().rev().map(|p| -p).collect();
    phases.push(0.0);
    phases.extend_from_slice(half);
    let label = if seq.label().is_empty() { "centred".to_string() } else { format!("centred {}", seq.label()) };
    Ok(PulseSequence::new(2.0 * PI, phases)?.with_label(label))
}

/// Product of a bare phase list under the linear model, followed by
/// `M₀[θ_T]`; convenience for lists that are not wrapped in a sequence.
pub fn corrected_rotation_phases(phases: &[f64], theta0: f64, theta_t: f64, eps: f64) -> Unitary2 {
    compose_phases(phases, theta0, eps) * faulty_pulse(0.0, theta_t, eps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::{constraint_residual, full_residual, norm, phase_sums, ConstraintSpec, PulseFamily};
    use crate::closed_form::{solve_closed_form, ClosedFormFamily};
    use crate::su2::trace_distance;
    use proptest::prelude::*;

    /// Direct transcription of the double sum, 1-based.
    fn toggle_oracle(phi: &[f64]) -> Vec<f64> {
        let l = phi.len();
        let sgn = |h: usize| if h % 2 == 0 { 1.0 } else { -1.0 };
        (1..=l)
            .map(|k| {
                let a: f64 = (1..k).map(|h| sgn(h) * phi[h - 1]).sum();
                let b: f64 = (k + 1..=l).map(|h| sgn(h) * phi[h - 1]).sum();
                -a + b
            })
            .collect()
    }

    fn slope(f: impl Fn(f64) -> f64) -> f64 {
        let eps: Vec<f64> = (0..6).map(|k| 1e-3 * 10f64.powf(k as f64 / 5.0)).collect();
        let pts: Vec<(f64, f64)> = eps.iter().map(|&e| (e.ln(), f(e).ln())).collect();
        let n = pts.len() as f64;
        let (sx, sy) = pts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y));
        let (mx, my) = (sx / n, sy / n);
        let num: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
        let den: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
        num / den
    }

    fn pd(n: usize, gamma: f64) -> PulseSequence {
        let fam = if n == 2 { ClosedFormFamily::Pd2 } else { ClosedFormFamily::Pd4 };
        solve_closed_form(fam, gamma, None).unwrap().remove(0)
    }

    #[test]
    fn toggle_small_cases() {
        assert_eq!(toggle(&[0.0; 5]), vec![0.0; 5]);
        assert_eq!(toggle(&[0.3, 1.1]), vec![1.1, 0.3]);
    }

    proptest! {
        #[test]
        fn toggle_matches_double_sum(phi in prop::collection::vec(-4.0f64..4.0, 1..20)) {
            let a = toggle(&phi);
            let b = toggle_oracle(&phi);
            prop_assert_eq!(a.len(), phi.len());
            for (x, y) in a.iter().zip(&b) {
                prop_assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn toggled_pd_sequences_are_broadband() {
        for n in [2usize, 4] {
            for g in [0.25, 0.5, 1.0] {
                let seq = pd(n, g);
                let bb = toggled_sequence(&seq).unwrap();
                assert_eq!(bb.theta0(), PI);
                let s = slope(|e| trace_distance(&corrected_rotation(&bb, g * PI, e).unwrap(), &rotation(0.0, g * PI)));
                assert!((s - (n as f64 + 1.0)).abs() < 0.1, "n={n} γ={g}: slope {s}");
            }
        }
    }

    #[test]
    fn toggled_sequences_satisfy_pi_family_system() {
        for n in [2usize, 4] {
            for g in [0.25, 0.5, 1.0] {
                let seq = pd(n, g);
                assert!(norm(&full_residual(seq.phases(), n, g)) < 1e-9);
                let psi = toggle(seq.phases());
                let spec = ConstraintSpec::new(n, 2 * n, g, PulseFamily::Pi, Symmetry::None).unwrap();
                let r = constraint_residual(&spec, &psi).unwrap();
                assert!(norm(&r) < 1e-9, "n={n} γ={g}: {}", norm(&r));
            }
        }
    }

    #[test]
    fn narrowband_variant_is_narrower() {
        let g = 0.5;
        let seq = pd(2, g);
        let broad = toggled_sequence(&seq).unwrap();
        let narrow = PulseSequence::new(PI, seq.phases().to_vec()).unwrap();
        // Full width of the region around ε = 0 where the transition
        // probability of S · M₀[θ_T] stays above one half of its ε = 0 value.
        let width = |s: &PulseSequence| {
            let p = |e: f64| crate::su2::transition_probability(&corrected_rotation_phases(s.phases(), PI, g * PI, e));
            let p0 = p(0.0);
            let edge = |dir: f64| {
                let mut e = 0.0;
                while e < 1.0 && (p(dir * e) - p0).abs() < 0.5 * p0 {
                    e += 1e-3;
                }
                e
            };
            edge(1.0) + edge(-1.0)
        };
        assert!(width(&narrow) < width(&broad), "{} vs {}", width(&narrow), width(&broad));
    }

    #[test]
    fn corrected_rotation_checks() {
        let ap1 = solve_closed_form(ClosedFormFamily::Ap1, 1.0, None).unwrap().remove(0);
        let target = rotation(0.0, 2.0 * PI);
        let u0 = corrected_rotation(&ap1, 2.0 * PI, 0.0).unwrap();
        assert!(u0.max_abs_diff(&target) < 1e-14);
        let bare = faulty_pulse(0.0, 2.0 * PI, 0.1);
        let u = corrected_rotation(&ap1, 2.0 * PI, 0.1).unwrap();
        assert!(trace_distance(&u, &target) < trace_distance(&bare, &target));
        assert!(matches!(corrected_rotation(&ap1, PI, 0.1), Err(Error::GammaMismatch { .. })));
    }

    #[test]
    fn ap4_table_row_error_bound() {
        let path = crate::continuation::continue_path(
            &crate::continuation::seed_top(4, 0).unwrap(),
            0.5,
            &Default::default(),
        )
        .unwrap();
        let half = &path.last().phases;
        for (a, b) in half.iter().zip([2.10426, 1.11746, 1.80109, 1.52196]) {
            assert!((a - b).abs() < 1e-4);
        }
        let seq = PulseSequence::from_half(2.0 * PI, half, Symmetry::Ap).unwrap().with_gamma(0.5);
        let d = trace_distance(&corrected_rotation(&seq, PI, 1e-2).unwrap(), &rotation(0.0, PI));
        let k = crate::algebra::kappa(4, 0.5, seq.phases()).unwrap();
        assert!((k - 1.15341).abs() < 1e-3);
        let lead = 0.5 * (k * 1e-2 * PI).powi(5);
        eprintln!("D = {d:e}, leading estimate {lead:e}");
        assert!((d / lead - 1.0).abs() < 0.05);
    }

    #[test]
    fn vitanov_family() {
        let v2 = vitanov(2).unwrap();
        assert_eq!(v2.phases(), &[0.0, 2.0 * PI / 3.0, -2.0 * PI / 3.0]);
        for n in [2usize, 8, 24] {
            let v = vitanov(n).unwrap();
            assert_eq!(v.len(), n + 1);
            let t = phase_sums(v.phases(), v.len()).unwrap();
            for j in (1..v.len()).step_by(2) {
                assert!(t.get(j).norm() < 1e-10, "n={n} j={j}");
            }
            assert!((crate::su2::transition_probability(&compose(&v, 0.0)) - 1.0).abs() < 1e-14);
        }
        assert!(vitanov(3).is_err());
    }

    #[test]
    fn nonlinear_remap_examples() {
        let lin = NonlinearErrorModel::linear(2.0 * PI, PI).unwrap();
        assert_eq!(nonlinear_remap(&lin).unwrap(), (PI, 0.5));
        let quad = NonlinearErrorModel::new(|t| t * t, 2.0 * PI, PI).unwrap();
        let (x, g) = nonlinear_remap(&quad).unwrap();
        assert!((g - 0.25).abs() < 1e-15);
        assert!((x - 2.0 * PI * PI).abs() < 1e-12);
        assert!(NonlinearErrorModel::new(|t| t - 2.0 * PI, 2.0 * PI, PI).is_err());
    }

    #[test]
    fn quadratic_error_is_corrected_at_remapped_gamma() {
        let quad = NonlinearErrorModel::new(|t| t * t, 2.0 * PI, PI).unwrap();
        let (_, g) = nonlinear_remap(&quad).unwrap();
        for (fam, n) in [(ClosedFormFamily::Ap1, 1usize), (ClosedFormFamily::Pd2, 2)] {
            let seq = solve_closed_form(fam, g, None).unwrap().remove(0);
            // x = ε·E(θ₀)/2 = 2π² ε, so keep ε small enough for the asymptotic regime.
            let s = slope(|e| {
                trace_distance(&corrected_rotation_nonlinear(&seq, &quad, e * 1e-2), &rotation(0.0, PI))
            });
            assert!((s - (n as f64 + 1.0)).abs() < 0.1, "{fam}: slope {s}");
        }
    }

    #[test]
    fn centred_arrangement() {
        let ap2 = solve_closed_form(ClosedFormFamily::Ap2, 1.0, None).unwrap().remove(0);
        let c = rearrange_symmetric(&ap2).unwrap();
        assert_eq!(c.len(), 5);
        let target = rotation(0.0, 2.0 * PI);
        let orig = |e: f64| corrected_rotation(&ap2, 2.0 * PI, e).unwrap();
        assert!(compose(&c, 0.0).max_abs_diff(&orig(0.0)) < 1e-14);
        let s = slope(|e| trace_distance(&compose(&c, e), &target));
        assert!((s - 3.0).abs() < 0.1, "slope {s}");
        let s = slope(|e| trace_distance(&compose(&c, e), &orig(e)));
        assert!(s > 3.0 - 0.1, "slope {s}");
        let pd2 = PulseSequence::from_half(2.0 * PI, &[1.0, -1.0], Symmetry::Pd).unwrap();
        assert!(rearrange_symmetric(&pd2).is_err());
    }
}

//! The JSON record shared by the CLI and exports.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::algebra::{self, ConstraintSpec, PulseFamily};
use crate::su2::{PulseSequence, Symmetry};

/// `{n, L, theta0, gamma, symmetry, phases[], kappa, residual_norm, provenance}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRecord {
    pub n: usize,
    #[serde(rename = "L")]
    pub len: usize,
    pub theta0: f64,
    pub gamma: f64,
    pub symmetry: Symmetry,
    pub phases: Vec<f64>,
    pub kappa: Option<f64>,
    pub residual_norm: f64,
    pub provenance: String,
}

/// Constraint residual appropriate to the sequence's pulse family.
///
/// `θ₀ = 2π`: the full unsymmetrized system; `θ₀ = π` with `L ∈ 4ℤ`: the
/// toggled-frame system; anything else: the largest series coefficient
/// through `x^n`.
pub fn residual_norm(seq: &PulseSequence, n: usize, gamma: f64) -> f64 {
    let len = seq.len();
    let theta0 = seq.theta0();
    if (theta0 - 2.0 * PI).abs() < 1e-12 {
        return algebra::norm(&algebra::full_residual(seq.phases(), n, gamma));
    }
    if (theta0 - PI).abs() < 1e-12 && len % 4 == 0 && len > n {
        if let Ok(spec) = ConstraintSpec::new(n, len, gamma, PulseFamily::Pi, Symmetry::None) {
            if let Ok(r) = algebra::constraint_residual(&spec, seq.phases()) {
                return algebra::norm(&r);
            }
        }
    }
    algebra::verify_expansion(seq, gamma, n).max_residual_through(n)
}

impl SequenceRecord {
    pub fn from_sequence(seq: &PulseSequence, n: usize, gamma: f64, provenance: impl Into<String>) -> Self {
        let two_pi = (seq.theta0() - 2.0 * PI).abs() < 1e-12;
        let kappa = if two_pi && seq.len() == 2 * n {
            algebra::kappa(n, gamma, seq.phases()).ok()
        } else {
            None
        };
        Self {
            n,
            len: seq.len(),
            theta0: seq.theta0(),
            gamma,
            symmetry: seq.symmetry(),
            phases: seq.phases().to_vec(),
            kappa,
            residual_norm: residual_norm(seq, n, gamma),
            provenance: provenance.into(),
        }
    }

    /// Rebuilds the sequence (symmetry is re-checked).
    pub fn to_sequence(&self) -> crate::Result<PulseSequence> {
        Ok(PulseSequence::with_symmetry(self.theta0, self.phases.clone(), self.symmetry)?
            .with_gamma(self.gamma))
    }
}

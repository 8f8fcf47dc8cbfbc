//! SU(2) kernel: rotations, faulty pulses, sequence products and distances.
//!
//! Global phase is kept exactly everywhere; `R_φ[2π] = −I`, not `I`.

use std::f64::consts::{FRAC_PI_2, PI};
use std::fmt;
use std::ops::{Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);
const I: Complex64 = Complex64::new(0.0, 1.0);

/// `e^{iφ}`, exact at multiples of π/2.
///
/// `cos(π/2)` evaluates to `6.1e-17` rather than zero; seeds built from
/// quadrantal angles would otherwise carry a residual floor that grows
/// with the number of pulses.
pub fn phasor(phi: f64) -> Complex64 {
    let k = (phi / FRAC_PI_2).round();
    let off = phi - k * FRAC_PI_2;
    if off.abs() <= 4.0 * f64::EPSILON * phi.abs().max(1.0) {
        match (k as i64).rem_euclid(4) {
            0 => return ONE,
            1 => return I,
            2 => return -ONE,
            _ => return -I,
        }
    }
    Complex64::new(phi.cos(), phi.sin())
}

/// A 2×2 complex matrix stored row-major.
#[derive(Clone, Copy, PartialEq)]
pub struct Unitary2 {
    m: [Complex64; 4],
}

impl Unitary2 {
    pub const fn new(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> Self {
        Self { m: [a, b, c, d] }
    }

    pub const fn identity() -> Self {
        Self::new(ONE, ZERO, ZERO, ONE)
    }

    pub const fn pauli_x() -> Self {
        Self::new(ZERO, ONE, ONE, ZERO)
    }

    pub fn pauli_y() -> Self {
        Self::new(ZERO, -I, I, ZERO)
    }

    pub fn pauli_z() -> Self {
        Self::new(ONE, ZERO, ZERO, -ONE)
    }

    /// Entry at row `r`, column `c` (both 0 or 1).
    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.m[2 * r + c]
    }

    pub fn entries(&self) -> [Complex64; 4] {
        self.m
    }

    pub fn adjoint(&self) -> Self {
        let [a, b, c, d] = self.m;
        Self::new(a.conj(), c.conj(), b.conj(), d.conj())
    }

    pub fn det(&self) -> Complex64 {
        let [a, b, c, d] = self.m;
        a * d - b * c
    }

    pub fn trace(&self) -> Complex64 {
        self.m[0] + self.m[3]
    }

    pub fn scale(&self, k: Complex64) -> Self {
        let [a, b, c, d] = self.m;
        Self::new(a * k, b * k, c * k, d * k)
    }

    /// Squared Frobenius norm.
    pub fn norm_sqr(&self) -> f64 {
        self.m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Largest entry modulus of `U·U† − I`.
    pub fn unitarity_deviation(&self) -> f64 {
        let p = *self * self.adjoint() - Self::identity();
        p.m.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.m
            .iter()
            .zip(other.m.iter())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// Pauli decomposition `U = c_I I + c_X X + c_Y Y + c_Z Z`.
    pub fn pauli_components(&self) -> [Complex64; 4] {
        let [a, b, c, d] = self.m;
        [(a + d) * 0.5, (b + c) * 0.5, (b - c) * I * 0.5, (a - d) * 0.5]
    }
}

impl fmt::Debug for Unitary2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.m;
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

impl Mul for Unitary2 {
    type Output = Unitary2;

    fn mul(self, rhs: Unitary2) -> Unitary2 {
        let [a, b, c, d] = self.m;
        let [e, f, g, h] = rhs.m;
        Unitary2::new(a * e + b * g, a * f + b * h, c * e + d * g, c * f + d * h)
    }
}

impl Sub for Unitary2 {
    type Output = Unitary2;

    fn sub(self, rhs: Unitary2) -> Unitary2 {
        let mut m = self.m;
        for (x, y) in m.iter_mut().zip(rhs.m.iter()) {
            *x -= y;
        }
        Unitary2 { m }
    }
}

impl Neg for Unitary2 {
    type Output = Unitary2;

    fn neg(self) -> Unitary2 {
        self.scale(-ONE)
    }
}

/// `R_φ[θ] = cos(θ/2) I − i sin(θ/2) σ_φ` with `σ_φ = cos φ X + sin φ Y`.
pub fn rotation(phase: f64, amplitude: f64) -> Unitary2 {
    let (s, c) = (0.5 * amplitude).sin_cos();
    let e = phasor(phase);
    let off = Complex64::new(0.0, -s);
    Unitary2::new(Complex64::new(c, 0.0), off * e.conj(), off * e, Complex64::new(c, 0.0))
}

/// `M_φ[θ] = R_φ[(1+ε)θ]`.
pub fn faulty_pulse(phase: f64, amplitude: f64, eps: f64) -> Unitary2 {
    rotation(phase, (1.0 + eps) * amplitude)
}

/// Trace distance `½ Σ σ_i(U − V)`.
///
/// For a 2×2 matrix `A` the singular values satisfy `σ₁² + σ₂² = ‖A‖_F²`
/// and `σ₁σ₂ = |det A|`, so `σ₁ + σ₂ = √(‖A‖_F² + 2|det A|)`.
pub fn trace_distance(u: &Unitary2, v: &Unitary2) -> f64 {
    let a = *u - *v;
    0.5 * (a.norm_sqr() + 2.0 * a.det().norm()).sqrt()
}

/// Gate infidelity `1 − |Tr(U V†)|/2`.
///
/// Evaluated as `|w|²/(1 + |w₀|)` from the Pauli components of `W = UV†`,
/// which keeps full relative precision when the infidelity is tiny.
pub fn infidelity(u: &Unitary2, v: &Unitary2) -> f64 {
    let w = *u * v.adjoint();
    let [c0, cx, cy, cz] = w.pauli_components();
    let off = cx.norm_sqr() + cy.norm_sqr() + cz.norm_sqr();
    let f = c0.norm().min(1.0);
    (off / (1.0 + f)).clamp(0.0, 1.0)
}

/// Fidelity `|Tr(U V†)|/2`.
pub fn fidelity(u: &Unitary2, v: &Unitary2) -> f64 {
    1.0 - infidelity(u, v)
}

/// `|⟨1|U|0⟩|²`.
pub fn transition_probability(u: &Unitary2) -> f64 {
    u.get(1, 0).norm_sqr().min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum Symmetry {
    #[default]
    #[serde(rename = "none")]
    None,
    /// Antipalindromic: `φ_k = −φ_{L−k+1}`.
    #[serde(rename = "AP")]
    Ap,
    /// Palindromic: `φ_k = φ_{L−k+1}`.
    #[serde(rename = "PD")]
    Pd,
}

impl fmt::Display for Symmetry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Symmetry::None => "none",
            Symmetry::Ap => "AP",
            Symmetry::Pd => "PD",
        })
    }
}

impl std::str::FromStr for Symmetry {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" | "ns" => Ok(Symmetry::None),
            "ap" => Ok(Symmetry::Ap),
            "pd" => Ok(Symmetry::Pd),
            _ => Err(Error::InvalidArgument(format!("unknown symmetry `{s}`"))),
        }
    }
}

/// A list of equal-amplitude pulses with individual phases.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PulseSequence {
    theta0: f64,
    phases: Vec<f64>,
    symmetry: Symmetry,
    gamma: Option<f64>,
    label: String,
}

impl PulseSequence {
    pub fn new(theta0: f64, phases: Vec<f64>) -> Result<Self> {
        Self::with_symmetry(theta0, phases, Symmetry::None)
    }

    /// Builds a sequence and checks the declared mirror symmetry exactly.
    pub fn with_symmetry(theta0: f64, phases: Vec<f64>, symmetry: Symmetry) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::InvalidArgument("a sequence needs at least one pulse".into()));
        }
        if !theta0.is_finite() || phases.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("non-finite amplitude or phase".into()));
        }
        let len = phases.len();
        let mirrored = |f: fn(f64) -> f64| (0..len).all(|k| phases[k] == f(phases[len - 1 - k]));
        let ok = match symmetry {
            Symmetry::None => true,
            Symmetry::Ap => mirrored(|x| -x),
            Symmetry::Pd => mirrored(|x| x),
        };
        if !ok {
            return Err(Error::InvalidArgument(format!("phases are not {symmetry}-symmetric")));
        }
        Ok(Self { theta0, phases, symmetry, gamma: None, label: String::new() })
    }

    /// Expands an independent half list into a full symmetric sequence.
    pub fn from_half(theta0: f64, half: &[f64], symmetry: Symmetry) -> Result<Self> {
        let full = match symmetry {
            Symmetry::None => half.to_vec(),
            s => crate::algebra::expand_symmetry(half, s),
        };
        Self::with_symmetry(theta0, full, symmetry)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn gamma(&self) -> Option<f64> {
        self.gamma
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// The independent half of a symmetric sequence (the whole list otherwise).
    pub fn half(&self) -> &[f64] {
        match self.symmetry {
            Symmetry::None => &self.phases,
            _ => &self.phases[..self.phases.len() / 2],
        }
    }
}

/// Product `M_{φ₁} M_{φ₂} ⋯ M_{φ_L}` with index 1 as the leftmost factor.
pub fn compose(seq: &PulseSequence, eps: f64) -> Unitary2 {
    compose_phases(seq.phases(), seq.theta0(), eps)
}

/// As [`compose`], for a bare phase list.
///
/// The product is formed as a balanced binary tree, which keeps rounding
/// growth logarithmic in the number of pulses.
pub fn compose_phases(phases: &[f64], theta0: f64, eps: f64) -> Unitary2 {
    let mut level: Vec<Unitary2> = phases.iter().map(|&p| faulty_pulse(p, theta0, eps)).collect();
    if level.is_empty() {
        return Unitary2::identity();
    }
    while level.len() > 1 {
        level = level
            .chunks(2)
            .map(|pair| match pair {
                [a, b] => *a * *b,
                [a] => *a,
                _ => unreachable!(),
            })
            .collect();
    }
    level[0]
}

/// Wraps an angle into `(−π, π]`.
pub fn wrap_angle(phi: f64) -> f64 {
    let mut w = phi.rem_euclid(2.0 * PI);
    if w > PI {
        w -= 2.0 * PI;
    }
    if w <= -PI {
        w += 2.0 * PI;
    }
    w
}

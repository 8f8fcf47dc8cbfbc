//! Phase sums, target polynomials and the constraint systems built from them.
//!
//! Writing a faulty pulse as `cos(θ₀/2 + x) I − i sin(θ₀/2 + x) σ_φ` with
//! `x = εθ₀/2`, the sequence product expands into powers of `x` whose
//! coefficients are the *phase sums*
//!
//! ```text
//! Φ_L^j(φ) = Σ_{h₁<…<h_j} exp(−i Σ_k (−1)^k φ_{h_k}),
//! ```
//!
//! and a sequence is correct to order `n` when `Φ_L^j = f_L^j(γ)` for
//! `0 < j ≤ n`, where `f_L^j` is the `y^j` coefficient of
//! `(1+y)^{(L−γ)/2} (1−y)^{(L+γ)/2}`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::su2::{phasor, PulseSequence, Symmetry};

/// Residuals above this make κ meaningless.
pub const KAPPA_RESIDUAL_LIMIT: f64 = 1e-3;

/// `Φ_L^j` for `0 ≤ j ≤ jmax`.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSumTable {
    len: usize,
    values: Vec<Complex64>,
}

impl PhaseSumTable {
    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn jmax(&self) -> usize {
        self.values.len() - 1
    }

    pub fn get(&self, j: usize) -> Complex64 {
        self.values[j]
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }
}

#[inline]
fn alt_sign(j: usize) -> f64 {
    if j % 2 == 1 {
        1.0
    } else {
        -1.0
    }
}

/// Fills `Φ^j` by the recursion `Φ_l^j = Φ_{l−1}^j + Φ_{l−1}^{j−1} e^{i(−1)^{j+1}φ_l}`.
pub fn phase_sums(phases: &[f64], jmax: usize) -> Result<PhaseSumTable> {
    if jmax > phases.len() {
        return Err(Error::InvalidArgument(format!(
            "phase sum order {jmax} exceeds sequence length {}",
            phases.len()
        )));
    }
    Ok(PhaseSumTable { len: phases.len(), values: phase_sums_raw(phases, jmax) })
}

pub(crate) fn phase_sums_raw(phases: &[f64], jmax: usize) -> Vec<Complex64> {
    let mut v = vec![Complex64::new(0.0, 0.0); jmax + 1];
    v[0] = Complex64::new(1.0, 0.0);
    for (l, &phi) in phases.iter().enumerate() {
        let e = phasor(phi);
        let ec = e.conj();
        for j in (1..=jmax.min(l + 1)).rev() {
            let f = if j % 2 == 1 { e } else { ec };
            let prev = v[j - 1];
            v[j] += prev * f;
        }
    }
    v
}

/// `f_L^j(γ)`, the target value of the `j`-th phase sum.
///
/// Evaluated with the three-term recurrence
/// `(j+1) f_{j+1} = −γ f_j + (j−1−L) f_{j−1}`, which follows from the
/// generating function's logarithmic derivative. The literal binomial sum
/// ([`ml_poly_binomial`]) loses ~10 digits to cancellation around `L = 24`.
pub fn ml_poly(len: usize, j: usize, gamma: f64) -> f64 {
    ml_poly_table(len, j, gamma)[j]
}

/// `[f_L^0(γ), …, f_L^{jmax}(γ)]`.
pub fn ml_poly_table(len: usize, jmax: usize, gamma: f64) -> Vec<f64> {
    let mut f = Vec::with_capacity(jmax + 1);
    f.push(1.0);
    if jmax >= 1 {
        f.push(-gamma);
    }
    for j in 1..jmax {
        let next = (-gamma * f[j] + (j as f64 - 1.0 - len as f64) * f[j - 1]) / (j as f64 + 1.0);
        f.push(next);
    }
    f
}

/// `[d f_L^j / dγ]` for `0 ≤ j ≤ jmax`.
pub fn ml_poly_derivative_table(len: usize, jmax: usize, gamma: f64) -> Vec<f64> {
    let f = ml_poly_table(len, jmax, gamma);
    let mut d = Vec::with_capacity(jmax + 1);
    d.push(0.0);
    if jmax >= 1 {
        d.push(-1.0);
    }
    for j in 1..jmax {
        let next =
            (-f[j] - gamma * d[j] + (j as f64 - 1.0 - len as f64) * d[j - 1]) / (j as f64 + 1.0);
        d.push(next);
    }
    d
}

/// `f_L^j(γ) = Σ_k (−1)^k C(T, k) C(L−T, j−k)` with `T = (γ+L)/2`.
pub fn ml_poly_binomial(len: usize, j: usize, gamma: f64) -> f64 {
    let t = 0.5 * (gamma + len as f64);
    (0..=j)
        .map(|k| {
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            sign * gen_binomial(t, k) * gen_binomial(len as f64 - t, j - k)
        })
        .sum()
}

/// `C(t, k) = t(t−1)⋯(t−k+1)/k!` for real `t`.
pub fn gen_binomial(t: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (t - i as f64) / (i as f64 + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PulseFamily {
    /// `θ₀ = 2π`.
    #[serde(rename = "two-pi")]
    TwoPi,
    /// `θ₀ = π`, phases in the toggled frame.
    #[serde(rename = "pi")]
    Pi,
}

impl PulseFamily {
    pub fn theta0(self) -> f64 {
        match self {
            PulseFamily::TwoPi => 2.0 * PI,
            PulseFamily::Pi => PI,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Part {
    Re,
    Im,
}

/// Order, length, target and symmetry of a constraint system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSpec {
    n: usize,
    len: usize,
    gamma: f64,
    family: PulseFamily,
    symmetry: Symmetry,
}

impl ConstraintSpec {
    pub fn new(
        n: usize,
        len: usize,
        gamma: f64,
        family: PulseFamily,
        symmetry: Symmetry,
    ) -> Result<Self> {
        let infeasible = |reason: &str| Error::Infeasible { n, len, reason: reason.to_string() };
        if n == 0 {
            return Err(Error::InvalidArgument("order n must be positive".into()));
        }
        if !gamma.is_finite() {
            return Err(Error::InvalidArgument("γ must be finite".into()));
        }
        match family {
            PulseFamily::TwoPi if len % 2 != 0 => {
                return Err(infeasible("2π sequences need an even number of pulses"))
            }
            PulseFamily::Pi if len % 4 != 0 => {
                return Err(infeasible("π sequences need a multiple of four pulses"))
            }
            _ => {}
        }
        if len <= n {
            return Err(infeasible("at least n+1 pulses are required"));
        }
        if symmetry != Symmetry::None && family == PulseFamily::Pi {
            return Err(Error::Unsupported("symmetric systems are only defined for 2π pulses".into()));
        }
        if symmetry == Symmetry::Pd && n % 2 == 1 {
            return Err(infeasible("the palindromic system is overdetermined for odd n"));
        }
        Ok(Self { n, len, gamma, family, symmetry })
    }

    /// The symmetric square system for `L = 2n` 2π pulses.
    pub fn symmetric(n: usize, gamma: f64, symmetry: Symmetry) -> Result<Self> {
        Self::new(n, 2 * n, gamma, PulseFamily::TwoPi, symmetry)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn family(&self) -> PulseFamily {
        self.family
    }

    pub fn symmetry(&self) -> Symmetry {
        self.symmetry
    }

    pub fn with_gamma(&self, gamma: f64) -> Self {
        Self { gamma, ..*self }
    }

    /// Number of free phases (`L/2` for symmetric systems).
    pub fn unknowns(&self) -> usize {
        match self.symmetry {
            Symmetry::None => self.len,
            _ => self.len / 2,
        }
    }

    pub fn rows(&self) -> usize {
        self.layout().len()
    }

    /// Row layout: `j` ascending, real part before imaginary part.
    fn layout(&self) -> Vec<(usize, Part)> {
        let mut rows = Vec::new();
        if self.family == PulseFamily::Pi {
            rows.push((0, Part::Re));
            rows.push((0, Part::Im));
        }
        for j in 1..=self.n {
            let odd = j % 2 == 1;
            match self.symmetry {
                Symmetry::None => {
                    if odd {
                        rows.push((j, Part::Re));
                    }
                    rows.push((j, Part::Im));
                }
                Symmetry::Ap => rows.push((j, if odd { Part::Re } else { Part::Im })),
                Symmetry::Pd => {
                    if odd {
                        rows.push((j, Part::Re));
                        rows.push((j, Part::Im));
                    }
                }
            }
        }
        rows
    }
}

/// Mirrors an independent half into a full list.
///
/// `AP`: `(a, b) → (a, b, −b, −a)`; `PD`: `(a, b) → (a, b, b, a)`.
pub fn expand_symmetry(half: &[f64], tag: Symmetry) -> Vec<f64> {
    let mut full = half.to_vec();
    match tag {
        Symmetry::None => {}
        Symmetry::Ap => full.extend(half.iter().rev().map(|p| -p)),
        Symmetry::Pd => full.extend(half.iter().rev()),
    }
    full
}

/// Stacked residuals of the unsymmetrized order-`n` system for any length.
///
/// No feasibility guard: this is the map whose minimum is bounded away from
/// zero when `L ≤ n`.
pub fn full_residual(phases: &[f64], n: usize, gamma: f64) -> Vec<f64> {
    let len = phases.len();
    let jmax = n.min(len);
    let phi = phase_sums_raw(phases, jmax);
    let f = ml_poly_table(len, n, gamma);
    let mut out = Vec::with_capacity(3 * n / 2 + 1);
    for j in 1..=n {
        let p = if j <= jmax { phi[j] } else { Complex64::new(0.0, 0.0) };
        if j % 2 == 1 {
            out.push(p.re - f[j]);
        }
        out.push(p.im);
    }
    out
}

pub fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Residual vector of the system described by `spec` at the full phase list.
pub fn constraint_residual(spec: &ConstraintSpec, phases: &[f64]) -> Result<Vec<f64>> {
    if phases.len() != spec.len {
        return Err(Error::LengthMismatch { expected: spec.len, got: phases.len() });
    }
    let f = ml_poly_table(spec.len, spec.n, spec.gamma);
    let layout = spec.layout();
    let values: Vec<Complex64> = match spec.family {
        PulseFamily::TwoPi => {
            let phi = phase_sums_raw(phases, spec.n);
            (0..=spec.n).map(|j| phi[j] - f[j]).collect()
        }
        PulseFamily::Pi => {
            // Φ^j(φ) → (−i)^L Φ^{L−j}(ψ)
            let phi = phase_sums_raw(phases, spec.len);
            let pre = Complex64::new(0.0, -1.0).powi(spec.len as i32);
            (0..=spec.n).map(|j| pre * phi[spec.len - j] - f[j]).collect()
        }
    };
    Ok(layout
        .iter()
        .map(|&(j, part)| match part {
            Part::Re => values[j].re,
            Part::Im => values[j].im,
        })
        .collect())
}

/// Residual of a symmetric system evaluated from its independent half.
pub fn symmetric_residual(spec: &ConstraintSpec, half: &[f64]) -> Result<Vec<f64>> {
    if spec.symmetry == Symmetry::None {
        return constraint_residual(spec, half);
    }
    if half.len() != spec.unknowns() {
        return Err(Error::LengthMismatch { expected: spec.unknowns(), got: half.len() });
    }
    constraint_residual(spec, &expand_symmetry(half, spec.symmetry))
}

fn require_square(spec: &ConstraintSpec, half: &[f64]) -> Result<()> {
    if spec.symmetry == Symmetry::None || spec.family != PulseFamily::TwoPi {
        return Err(Error::Unsupported("Jacobian requires an AP or PD 2π system".into()));
    }
    if spec.len != 2 * spec.n {
        return Err(Error::Unsupported("Jacobian requires L = 2n".into()));
    }
    if half.len() != spec.n {
        return Err(Error::LengthMismatch { expected: spec.n, got: half.len() });
    }
    Ok(())
}

/// Residual and analytic Jacobian of a symmetric system with respect to
/// the independent half phases.
///
/// Each column is one forward-mode sweep of the phase-sum recursion; the
/// mirrored phase contributes with sign `−1` (AP) or `+1` (PD).
pub fn residual_and_jacobian(
    spec: &ConstraintSpec,
    half: &[f64],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    require_square(spec, half)?;
    let len = spec.len;
    let full = expand_symmetry(half, spec.symmetry);
    let mirror = if spec.symmetry == Symmetry::Ap { -1.0 } else { 1.0 };
    let dirs: Vec<Vec<(usize, f64)>> =
        (0..spec.n).map(|q| vec![(q, 1.0), (len - 1 - q, mirror)]).collect();
    Ok(sweep(spec, &full, &dirs))
}

/// Residual and Jacobian of an unsymmetrized 2π system with respect to the
/// phases listed in `free` (the others are held fixed).
pub fn residual_and_jacobian_free(
    spec: &ConstraintSpec,
    phases: &[f64],
    free: &[usize],
) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if spec.family != PulseFamily::TwoPi || spec.symmetry != Symmetry::None {
        return Err(Error::Unsupported("expected an unsymmetrized 2π system".into()));
    }
    if phases.len() != spec.len {
        return Err(Error::LengthMismatch { expected: spec.len, got: phases.len() });
    }
    if let Some(&bad) = free.iter().find(|&&k| k >= spec.len) {
        return Err(Error::InvalidArgument(format!("free index {bad} out of range")));
    }
    let dirs: Vec<Vec<(usize, f64)>> = free.iter().map(|&k| vec![(k, 1.0)]).collect();
    Ok(sweep(spec, phases, &dirs))
}

/// Forward-mode differentiation of the phase-sum recursion, one sweep per
/// direction; a direction lists `(pulse index, weight)` pairs.
fn sweep(
    spec: &ConstraintSpec,
    full: &[f64],
    dirs: &[Vec<(usize, f64)>],
) -> (DVector<f64>, DMatrix<f64>) {
    let n = spec.n;
    let e: Vec<Complex64> = full.iter().map(|&p| phasor(p)).collect();
    let layout = spec.layout();
    let f = ml_poly_table(spec.len, n, spec.gamma);

    let zero = Complex64::new(0.0, 0.0);
    let mut phi = vec![zero; n + 1];
    let mut dphi = vec![zero; n + 1];
    let mut jac = DMatrix::zeros(layout.len(), dirs.len());
    let mut res = DVector::zeros(layout.len());
    for (q, dir) in dirs.iter().enumerate() {
        phi.iter_mut().for_each(|z| *z = zero);
        dphi.iter_mut().for_each(|z| *z = zero);
        phi[0] = Complex64::new(1.0, 0.0);
        for (l, el) in e.iter().enumerate() {
            let d: f64 = dir.iter().filter(|(k, _)| *k == l).map(|(_, w)| w).sum();
            for j in (1..=n.min(l + 1)).rev() {
                let fac = if j % 2 == 1 { *el } else { el.conj() };
                let mut nd = dphi[j] + dphi[j - 1] * fac;
                if d != 0.0 {
                    nd += phi[j - 1] * fac * Complex64::new(0.0, alt_sign(j) * d);
                }
                dphi[j] = nd;
                let prev = phi[j - 1];
                phi[j] += prev * fac;
            }
        }
        for (r, &(j, part)) in layout.iter().enumerate() {
            jac[(r, q)] = match part {
                Part::Re => dphi[j].re,
                Part::Im => dphi[j].im,
            };
            if q == 0 {
                res[r] = match part {
                    Part::Re => phi[j].re - f[j],
                    Part::Im => phi[j].im,
                };
            }
        }
    }
    if dirs.is_empty() {
        let r = constraint_residual(spec, full).expect("length checked by caller");
        res = DVector::from_vec(r);
    }
    (res, jac)
}

/// Analytic Jacobian `∂r/∂φ_half` (see [`residual_and_jacobian`]).
pub fn jacobian(spec: &ConstraintSpec, half: &[f64]) -> Result<DMatrix<f64>> {
    residual_and_jacobian(spec, half).map(|(_, j)| j)
}

/// `∂r/∂γ` for the residual map (only real rows depend on `γ`).
pub fn gamma_derivative(spec: &ConstraintSpec) -> DVector<f64> {
    let df = ml_poly_derivative_table(spec.len, spec.n, spec.gamma);
    let layout = spec.layout();
    DVector::from_iterator(
        layout.len(),
        layout.iter().map(|&(j, part)| match part {
            Part::Re => -df[j],
            Part::Im => 0.0,
        }),
    )
}

/// `f_L^{n+1}(γ) − Φ_L^{n+1}(φ)`, the coefficient of the leading error term.
pub fn leading_error(n: usize, gamma: f64, phases: &[f64]) -> Result<Complex64> {
    let len = phases.len();
    if n + 1 > len {
        return Err(Error::InvalidArgument(format!("order {n} needs more than {len} pulses")));
    }
    let phi = phase_sums_raw(phases, n + 1);
    Ok(Complex64::new(ml_poly(len, n + 1, gamma), 0.0) - phi[n + 1])
}

/// Leading-error scale κ.
///
/// The first surviving term of the corrected product is
/// `(f − Φ^{n+1}) (−ix)^{n+1}` times a Pauli-type operator, i.e. a rotation
/// by `2|f − Φ^{n+1}| x^{n+1}`. Writing that angle as `(κ x)^{n+1}` gives
/// `κ = (2|f − Φ^{n+1}|)^{1/(n+1)}`.
pub fn kappa(n: usize, gamma: f64, phases: &[f64]) -> Result<f64> {
    let r = norm(&full_residual(phases, n, gamma));
    if !(r <= KAPPA_RESIDUAL_LIMIT) {
        return Err(Error::ResidualTooLarge { residual: r, tolerance: KAPPA_RESIDUAL_LIMIT });
    }
    let lead = leading_error(n, gamma, phases)?;
    Ok((2.0 * lead.norm()).powf(1.0 / (n as f64 + 1.0)))
}

/// Maclaurin coefficients in `x` of `S(x)·R₀[2xγ] − I`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesExpansion {
    /// `coefficients[k]` holds the `(I, X, Y, Z)` Pauli components of the
    /// `x^k` coefficient.
    pub coefficients: Vec<[Complex64; 4]>,
}

impl SeriesExpansion {
    pub fn order(&self) -> usize {
        self.coefficients.len() - 1
    }

    /// Largest Pauli-component modulus of the `x^k` coefficient.
    pub fn residual(&self, k: usize) -> f64 {
        self.coefficients[k].iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest residual over orders `0..=k`.
    pub fn max_residual_through(&self, k: usize) -> f64 {
        (0..=k.min(self.order())).map(|i| self.residual(i)).fold(0.0, f64::max)
    }
}

type Mat = [Complex64; 4];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    [
        a[0] * b[0] + a[1] * b[2],
        a[0] * b[1] + a[1] * b[3],
        a[2] * b[0] + a[3] * b[2],
        a[2] * b[1] + a[3] * b[3],
    ]
}

fn series_mul(a: &[Mat], b: &[Mat]) -> Vec<Mat> {
    let order = a.len() - 1;
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![[zero; 4]; order + 1];
    for i in 0..=order {
        for k in 0..=(order - i) {
            let p = mat_mul(&a[i], &b[k]);
            for (o, v) in out[i + k].iter_mut().zip(p.iter()) {
                *o += v;
            }
        }
    }
    out
}

/// Taylor coefficients of `(cos(a + x), sin(a + x))` up to `x^order`.
fn shifted_trig_series(a: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (sa, ca) = a.sin_cos();
    let mut fact = 1.0;
    let mut c = Vec::with_capacity(order + 1);
    let mut s = Vec::with_capacity(order + 1);
    for k in 0..=order {
        if k > 0 {
            fact *= k as f64;
        }
        // cos x and sin x Taylor terms at order k
        let (ck, sk) = match k % 4 {
            0 => (1.0, 0.0),
            1 => (0.0, 1.0),
            2 => (-1.0, 0.0),
            _ => (0.0, -1.0),
        };
        c.push((ca * ck - sa * sk) / fact);
        s.push((sa * ck + ca * sk) / fact);
    }
    (c, s)
}

fn pulse_series(phase: f64, half_amplitude: f64, scale: f64, order: usize) -> Vec<Mat> {
    // cos(a + s·x) I − i sin(a + s·x) σ_φ
    let (c, s) = shifted_trig_series(half_amplitude, order);
    let e = phasor(phase);
    let mi = Complex64::new(0.0, -1.0);
    let mut pow = 1.0;
    (0..=order)
        .map(|k| {
            if k > 0 {
                pow *= scale;
            }
            let ck = Complex64::new(c[k] * pow, 0.0);
            let sk = mi * (s[k] * pow);
            [ck, sk * e.conj(), sk * e, ck]
        })
        .collect()
}

/// Exact truncated power-series expansion of the corrected product.
///
/// Every pulse is expanded as `cos(θ₀/2 + x) I − i sin(θ₀/2 + x) σ_φ` with
/// exact Taylor coefficients and the products are formed in truncated
/// series arithmetic, so each order is resolved to rounding precision.
pub fn verify_expansion(seq: &PulseSequence, gamma: f64, order: usize) -> SeriesExpansion {
    let half = 0.5 * seq.theta0();
    let mut acc = pulse_series(0.0, 0.0, 0.0, order);
    for &p in seq.phases() {
        acc = series_mul(&acc, &pulse_series(p, half, 1.0, order));
    }
    // R₀[2xγ] = cos(γx) I − i sin(γx) X
    acc = series_mul(&acc, &pulse_series(0.0, 0.0, gamma, order));
    acc[0][0] -= 1.0;
    acc[0][3] -= 1.0;
    let coefficients = acc
        .iter()
        .map(|m| crate::su2::Unitary2::new(m[0], m[1], m[2], m[3]).pauli_components())
        .collect();
    SeriesExpansion { coefficients }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c_binomial(n: usize, k: usize) -> f64 {
        gen_binomial(n as f64, k)
    }

    /// Brute-force enumeration over index subsets.
    fn phase_sum_oracle(phases: &[f64], j: usize) -> Complex64 {
        let len = phases.len();
        let mut total = Complex64::new(0.0, 0.0);
        for mask in 0u32..(1 << len) {
            if mask.count_ones() as usize != j {
                continue;
            }
            let mut arg = 0.0;
            let mut k = 0;
            for h in 0..len {
                if mask & (1 << h) != 0 {
                    k += 1;
                    let s = if k % 2 == 0 { 1.0 } else { -1.0 };
                    arg -= s * phases[h];
                }
            }
            total += Complex64::new(arg.cos(), arg.sin());
        }
        total
    }

    /// Maclaurin coefficients of (1+y)^a (1−y)^b by series multiplication.
    fn generating_oracle(len: usize, gamma: f64, jmax: usize) -> Vec<f64> {
        let a = 0.5 * (len as f64 - gamma);
        let b = 0.5 * (len as f64 + gamma);
        let p: Vec<f64> = (0..=jmax).map(|k| gen_binomial(a, k)).collect();
        let q: Vec<f64> = (0..=jmax)
            .map(|k| gen_binomial(b, k) * if k % 2 == 0 { 1.0 } else { -1.0 })
            .collect();
        (0..=jmax).map(|j| (0..=j).map(|k| p[k] * q[j - k]).sum()).collect()
    }

    #[test]
    fn first_order_pair_phase_sum() {
        let t = phase_sums(&[2.0 * PI / 3.0, -2.0 * PI / 3.0], 1).unwrap();
        assert!((t.get(1) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        assert_eq!(t.get(0), Complex64::new(1.0, 0.0));
    }

    #[test]
    fn zero_phases_give_binomials() {
        let t = phase_sums(&[0.0; 7], 7).unwrap();
        for j in 0..=7 {
            assert!((t.get(j).re - c_binomial(7, j)).abs() < 1e-12);
            assert_eq!(t.get(j).im, 0.0);
        }
    }

    #[test]
    fn phase_sums_reject_large_order() {
        assert!(phase_sums(&[0.1, 0.2], 3).is_err());
    }

    #[test]
    fn phase_sums_match_enumeration() {
        let phases = [0.3, -1.7, 2.4, 0.05, -2.9, 1.1];
        let t = phase_sums(&phases, 6).unwrap();
        for j in 0..=6 {
            assert!((t.get(j) - phase_sum_oracle(&phases, j)).norm() < 1e-12, "j={j}");
            assert!(t.get(j).norm() <= c_binomial(6, j) + 1e-12);
        }
    }

    #[test]
    fn ml_poly_examples() {
        assert!((ml_poly(2, 1, 1.0) + 1.0).abs() < 1e-15);
        assert!((ml_poly(2, 2, 1.0) + 0.5).abs() < 1e-15);
        for len in [1, 4, 9] {
            assert_eq!(ml_poly(len, 0, 0.37), 1.0);
        }
        assert!((ml_poly_binomial(2, 2, 1.0) + 0.5).abs() < 1e-15);
    }

    #[test]
    fn ml_poly_matches_generating_function() {
        for len in 1..=24 {
            for &g in &[-1.3, 0.0, 0.25, 0.5, 1.0, 1.7, 2.0] {
                let gf = generating_oracle(len, g, 12);
                let rec = ml_poly_table(len, 12, g);
                for j in 0..=12 {
                    assert!((gf[j] - rec[j]).abs() < 1e-10 * gf[j].abs().max(1.0), "L={len} j={j} γ={g}");
                }
            }
        }
    }

    #[test]
    fn ml_poly_derivative_matches_difference() {
        let h = 1e-6;
        for len in [4, 10, 24] {
            let d = ml_poly_derivative_table(len, 12, 0.7);
            let up = ml_poly_table(len, 12, 0.7 + h);
            let dn = ml_poly_table(len, 12, 0.7 - h);
            for j in 0..=12 {
                let fd = (up[j] - dn[j]) / (2.0 * h);
                assert!((fd - d[j]).abs() < 1e-6 * fd.abs().max(1.0));
            }
        }
    }

    #[test]
    fn spec_validation() {
        use PulseFamily::*;
        assert!(ConstraintSpec::new(1, 3, 1.0, TwoPi, Symmetry::None).is_err());
        assert!(ConstraintSpec::new(2, 2, 1.0, TwoPi, Symmetry::None).is_err());
        assert!(ConstraintSpec::new(2, 6, 1.0, Pi, Symmetry::None).is_err());
        assert!(ConstraintSpec::new(2, 8, 1.0, Pi, Symmetry::None).is_ok());
        assert!(ConstraintSpec::symmetric(3, 1.0, Symmetry::Pd).is_err());
        assert_eq!(ConstraintSpec::symmetric(4, 1.0, Symmetry::Pd).unwrap().rows(), 4);
        assert_eq!(ConstraintSpec::symmetric(5, 1.0, Symmetry::Ap).unwrap().rows(), 5);
        assert_eq!(ConstraintSpec::new(3, 4, 1.0, TwoPi, Symmetry::None).unwrap().rows(), 5);
    }

    #[test]
    fn residual_examples() {
        let spec = ConstraintSpec::symmetric(1, 1.0, Symmetry::Ap).unwrap();
        let r = constraint_residual(&spec, &[2.0 * PI / 3.0, -2.0 * PI / 3.0]).unwrap();
        assert!(norm(&r) < 1e-12);
        let r = constraint_residual(&spec, &[0.0, 0.0]).unwrap();
        assert!((r[0] - 3.0).abs() < 1e-15);
        let spec = ConstraintSpec::symmetric(2, 1.0, Symmetry::Ap).unwrap();
        let full = expand_symmetry(&[2.35949, 1.35980], Symmetry::Ap);
        assert!(norm(&constraint_residual(&spec, &full).unwrap()) < 1e-4);
        assert!(constraint_residual(&spec, &full[..3]).is_err());
    }

    #[test]
    fn expand_symmetry_examples() {
        assert_eq!(expand_symmetry(&[1.0, 2.0], Symmetry::Ap), vec![1.0, 2.0, -2.0, -1.0]);
        assert_eq!(expand_symmetry(&[1.0, 2.0], Symmetry::Pd), vec![1.0, 2.0, 2.0, 1.0]);
    }

    #[test]
    fn top1_jacobian() {
        let spec = ConstraintSpec::symmetric(1, 0.0, Symmetry::Ap).unwrap();
        let j = jacobian(&spec, &[PI / 2.0]).unwrap();
        assert!((j[(0, 0)] + 2.0).abs() < 1e-15);
        let spec = ConstraintSpec::symmetric(3, 0.0, Symmetry::Ap).unwrap();
        let d = jacobian(&spec, &[PI / 2.0; 3]).unwrap().determinant();
        assert!((d + 64.0).abs() < 1e-9);
    }

    #[test]
    fn jacobian_requires_symmetry() {
        let spec = ConstraintSpec::new(1, 2, 0.0, PulseFamily::TwoPi, Symmetry::None).unwrap();
        assert!(jacobian(&spec, &[0.1, 0.2]).is_err());
    }

    #[test]
    fn ap1_expansion_orders() {
        let seq = PulseSequence::new(2.0 * PI, vec![2.0 * PI / 3.0, -2.0 * PI / 3.0]).unwrap();
        let s = verify_expansion(&seq, 1.0, 3);
        assert!(s.residual(0) < 1e-12 && s.residual(1) < 1e-12);
        assert!(s.residual(2) > 1e-3);
    }

    #[test]
    fn zeroth_order_vanishes_for_even_two_pi() {
        let seq = PulseSequence::new(2.0 * PI, vec![0.4, 2.0, -1.0, 0.3, 0.1, 3.0]).unwrap();
        assert!(verify_expansion(&seq, 0.8, 0).residual(0) < 1e-14);
        let odd = PulseSequence::new(2.0 * PI, vec![0.4, 2.0, -1.0]).unwrap();
        assert!(verify_expansion(&odd, 0.8, 0).residual(0) > 1.0);
    }

    #[test]
    fn series_leading_term_matches_kappa() {
        // PD2 at γ = 1: the x³ coefficient has modulus |f − Φ³|.
        let t1 = ((4.0 + 1.0) / (4.0 - 1.0f64)).sqrt();
        let p = 2.0 * t1.atan();
        let full = expand_symmetry(&[p, -p], Symmetry::Pd);
        let seq = PulseSequence::new(2.0 * PI, full.clone()).unwrap();
        let s = verify_expansion(&seq, 1.0, 3);
        assert!(s.max_residual_through(2) < 1e-13);
        let lead = leading_error(2, 1.0, &full).unwrap().norm();
        let c3 = s.coefficients[3].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!((c3 - lead).abs() < 1e-12, "{c3} vs {lead}");
        assert!((kappa(2, 1.0, &full).unwrap() - 1.16499).abs() < 1e-5);
    }

    #[test]
    fn kappa_refuses_non_solutions() {
        assert!(kappa(1, 1.0, &[0.0, 0.0]).is_err());
        let k = kappa(1, 1.0, &[2.0 * PI / 3.0, -2.0 * PI / 3.0]).unwrap();
        assert!((k - 1.31607).abs() < 1e-5);
        let k2 = kappa(1, 1.0, &[-2.0 * PI / 3.0, 2.0 * PI / 3.0]).unwrap();
        assert!((k - k2).abs() < 1e-14);
    }

    #[test]
    fn infeasible_when_length_equals_order() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            let g: f64 = rng.random_range(0.0..1.0);
            let bound = (ml_poly(n, n, g).abs() - 1.0).abs();
            let mut worst: f64 = 0.0;
            for _ in 0..1000 {
                let phases: Vec<f64> = (0..n).map(|_| rng.random_range(-PI..PI)).collect();
                let r = norm(&full_residual(&phases, n, g));
                // |Φ_n^n| = 1 always, so no draw can beat ||f| − 1|.
                assert!(r >= bound - 1e-12);
                worst = worst.max(r);
            }
            assert!(worst > 0.1);
        }
    }

    proptest! {
        #[test]
        fn reversal_conjugation(phases in proptest::collection::vec(-PI..PI, 1..9)) {
            let len = phases.len();
            let t = phase_sums(&phases, len).unwrap();
            for j in 0..=len {
                let s = if j % 2 == 0 { 1.0 } else { -1.0 };
                let rev: Vec<f64> = phases.iter().rev().map(|p| s * p).collect();
                let r = phase_sums(&rev, len).unwrap();
                prop_assert!((t.get(j) - r.get(j).conj()).norm() < 1e-11);
            }
        }

        #[test]
        fn ap_kills_odd_imaginary_parts(half in proptest::collection::vec(-PI..PI, 1..7)) {
            let full = expand_symmetry(&half, Symmetry::Ap);
            let t = phase_sums(&full, full.len()).unwrap();
            for j in (1..=full.len()).step_by(2) {
                prop_assert!(t.get(j).im.abs() < 1e-11);
            }
        }

        #[test]
        fn jacobian_matches_finite_differences(
            half in proptest::collection::vec(-PI..PI, 4),
            gamma in 0.0f64..2.0,
            pd in proptest::bool::ANY,
        ) {
            let sym = if pd { Symmetry::Pd } else { Symmetry::Ap };
            let spec = ConstraintSpec::symmetric(4, gamma, sym).unwrap();
            let (r0, jac) = residual_and_jacobian(&spec, &half).unwrap();
            let direct = symmetric_residual(&spec, &half).unwrap();
            for (a, b) in r0.iter().zip(direct.iter()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            let h = 1e-6;
            for q in 0..4 {
                let mut up = half.clone();
                let mut dn = half.clone();
                up[q] += h;
                dn[q] -= h;
                let ru = symmetric_residual(&spec, &up).unwrap();
                let rd = symmetric_residual(&spec, &dn).unwrap();
                for r in 0..4 {
                    let fd = (ru[r] - rd[r]) / (2.0 * h);
                    prop_assert!((fd - jac[(r, q)]).abs() < 1e-6);
                }
            }
        }

        #[test]
        fn gamma_derivative_matches_difference(half in proptest::collection::vec(-PI..PI, 3), gamma in -1.0f64..2.0) {
            let spec = ConstraintSpec::symmetric(3, gamma, Symmetry::Ap).unwrap();
            let h = 1e-6;
            let ru = symmetric_residual(&spec.with_gamma(gamma + h), &half).unwrap();
            let rd = symmetric_residual(&spec.with_gamma(gamma - h), &half).unwrap();
            let d = gamma_derivative(&spec);
            for r in 0..3 {
                prop_assert!(((ru[r] - rd[r]) / (2.0 * h) - d[r]).abs() < 1e-6);
            }
        }

        #[test]
        fn series_matches_direct_product(phases in proptest::collection::vec(-PI..PI, 4), gamma in 0.0f64..2.0) {
            // The truncated series, summed at small x, reproduces the exact product.
            let seq = PulseSequence::new(2.0 * PI, phases).unwrap();
            let s = verify_expansion(&seq, gamma, 14);
            let x: f64 = 0.05;
            let eps = 2.0 * x / seq.theta0();
            let u = crate::su2::compose(&seq, eps) * crate::su2::rotation(0.0, 2.0 * x * gamma)
                - crate::su2::Unitary2::identity();
            let direct = u.pauli_components();
            for c in 0..4 {
                let summed: Complex64 = s.coefficients.iter().enumerate().map(|(k, m)| m[c] * x.powi(k as i32)).sum();
                prop_assert!((summed - direct[c]).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn unitarity_makes_even_real_parts_automatic() {
        // Solve B^{2π}_{2,4} at γ = 0.6 through the PD closed form, then check
        // the j = 2 real part which is not part of the stacked system.
        let g: f64 = 0.6;
        let p = 2.0 * ((4.0 + g) / (4.0 - g)).sqrt().atan();
        let full = expand_symmetry(&[p, -p], Symmetry::Pd);
        assert!(norm(&full_residual(&full, 2, g)) < 1e-12);
        let t = phase_sums(&full, 2).unwrap();
        assert!((t.get(2).re - ml_poly(4, 2, g)).abs() < 1e-9);
    }
}

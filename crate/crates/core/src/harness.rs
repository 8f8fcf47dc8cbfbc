//! Error curves, Monte Carlo noise floors, literature sequences and the
//! leading-error trend, with CSV export.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::algebra::{expand_symmetry, leading_error};
use crate::continuation::bootstrap_top;
use crate::error::{Error, Result};
use crate::su2::{
    compose, infidelity, rotation, trace_distance, transition_probability, PulseSequence, Symmetry, Unitary2,
};
use crate::transforms::{corrected_rotation, toggle, vitanov};

/// Values below this are treated as double-precision noise by slope fits.
pub const FIT_FLOOR: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    TraceDistance,
    Infidelity,
    TransitionProbability,
}

impl Metric {
    /// Scores `u` against the ideal `target`.
    pub fn evaluate(self, u: &Unitary2, target: &Unitary2) -> f64 {
        match self {
            Metric::TraceDistance => trace_distance(u, target),
            Metric::Infidelity => infidelity(u, target),
            Metric::TransitionProbability => transition_probability(u),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Metric::TraceDistance => "trace-distance",
            Metric::Infidelity => "infidelity",
            Metric::TransitionProbability => "transition-probability",
        })
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "trace-distance" | "trace" | "D" => Ok(Metric::TraceDistance),
            "infidelity" => Ok(Metric::Infidelity),
            "transition-probability" | "transition" | "p" => Ok(Metric::TransitionProbability),
            _ => Err(Error::InvalidArgument(format!("unknown metric `{s}`"))),
        }
    }
}

/// A metric sampled on a strictly increasing `ε` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ErrorCurve {
    pub label: String,
    pub metric: Metric,
    pub theta_t: f64,
    /// Correction order, when known.
    pub n: Option<usize>,
    pub gamma: Option<f64>,
    pub points: Vec<(f64, f64)>,
}

impl ErrorCurve {
    pub fn epsilons(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.0)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.points.iter().map(|p| p.1)
    }

    /// Value at the grid point nearest to `eps`.
    pub fn value_at(&self, eps: f64) -> Option<f64> {
        self.points
            .iter()
            .min_by(|a, b| (a.0 - eps).abs().total_cmp(&(b.0 - eps).abs()))
            .map(|p| p.1)
    }

    /// Least-squares log-log slope over `[lo, hi]`; see [`fit_loglog`].
    pub fn slope(&self, lo: f64, hi: f64) -> Option<f64> {
        fit_loglog(&self.points, lo, hi).map(|f| f.slope)
    }

    /// `<label>_<metric>.csv`, with characters unsafe in file names replaced.
    pub fn file_name(&self) -> String {
        let label: String = self
            .label
            .chars()
            .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '.' { c } else { '_' })
            .collect();
        format!("{label}_{}.csv", self.metric)
    }
}

#[derive(Debug, Serialize)]
struct CsvRow<'a> {
    epsilon: f64,
    value: f64,
    label: &'a str,
    metric: String,
    n: Option<usize>,
    gamma: Option<f64>,
}

/// Writes curves as CSV (`epsilon,value,label,metric,n,gamma`).
pub fn write_csv<W: std::io::Write>(curves: &[ErrorCurve], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for c in curves {
        for &(epsilon, value) in &c.points {
            w.serialize(CsvRow { epsilon, value, label: &c.label, metric: c.metric.to_string(), n: c.n, gamma: c.gamma })?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One `<label>_<metric>.csv` per curve in `dir`; returns the paths written.
pub fn export_csv(curves: &[ErrorCurve], dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    curves
        .iter()
        .map(|c| {
            let path = dir.join(c.file_name());
            write_csv(std::slice::from_ref(c), std::fs::File::create(&path)?)?;
            Ok(path)
        })
        .collect()
}

/// `count` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..count).map(|k| (a + (b - a) * k as f64 / (count - 1) as f64).exp()).collect()
}

/// `count` evenly spaced points from `lo` to `hi` inclusive.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![lo];
    }
    (0..count).map(|k| lo + (hi - lo) * k as f64 / (count - 1) as f64).collect()
}

fn check_grid(eps: &[f64]) -> Result<()> {
    if eps.windows(2).any(|w| !(w[1] > w[0])) || eps.iter().any(|e| !e.is_finite()) {
        return Err(Error::InvalidArgument("ε grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

fn order_of(seq: &PulseSequence) -> Option<usize> {
    let digits: String = seq.label().chars().rev().take_while(|c| c.is_ascii_digit()).collect();
    digits.chars().rev().collect::<String>().parse().ok()
}

/// `metric(S · M₀[θ_T], R₀[θ_T])` on the grid.
pub fn error_curve(seq: &PulseSequence, theta_t: f64, eps: &[f64], metric: Metric) -> Result<ErrorCurve> {
    check_grid(eps)?;
    let target = rotation(0.0, theta_t);
    let points = eps
        .iter()
        .map(|&e| Ok((e, metric.evaluate(&corrected_rotation(seq, theta_t, e)?, &target))))
        .collect::<Result<Vec<_>>>()?;
    Ok(ErrorCurve {
        label: seq.label().to_string(),
        metric,
        theta_t,
        n: order_of(seq),
        gamma: seq.gamma(),
        points,
    })
}

/// `metric(S, target)` for a sequence that is already the whole operator
/// (inverting sequences carry their own zeroth pulse).
pub fn operator_curve(seq: &PulseSequence, target: &Unitary2, eps: &[f64], metric: Metric) -> Result<ErrorCurve> {
    check_grid(eps)?;
    let points = eps.iter().map(|&e| (e, metric.evaluate(&compose(seq, e), target))).collect();
    Ok(ErrorCurve {
        label: seq.label().to_string(),
        metric,
        theta_t: seq.theta0(),
        n: None,
        gamma: None,
        points,
    })
}

/// Inversion probability `|⟨1|S|0⟩|²` of a whole-operator sequence.
pub fn transition_curve(seq: &PulseSequence, eps: &[f64]) -> Result<ErrorCurve> {
    operator_curve(seq, &Unitary2::identity(), eps, Metric::TransitionProbability)
}

/// Gaussian per-pulse amplitude and phase jitter on top of the systematic
/// error, averaged over trials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub sigma_amplitude: f64,
    pub sigma_phase: f64,
    pub trials: usize,
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(sigma_amplitude: f64, sigma_phase: f64, trials: usize, seed: u64) -> Result<Self> {
        if !(sigma_amplitude >= 0.0 && sigma_phase >= 0.0) || trials == 0 {
            return Err(Error::InvalidArgument("noise needs σ ≥ 0 and at least one trial".into()));
        }
        Ok(Self { sigma_amplitude, sigma_phase, trials, seed })
    }

    /// The same `σ` for amplitude (relative) and phase (radians).
    pub fn isotropic(sigma: f64, trials: usize, seed: u64) -> Result<Self> {
        Self::new(sigma, sigma, trials, seed)
    }

    /// Generator for one trial: the master seed with the trial index as the
    /// stream, so trials are independent of scheduling.
    fn trial_rng(&self, trial: usize) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trial as u64);
        rng
    }
}

/// Mean metric over noisy realisations of `S · M₀[θ_T]`.
///
/// In each trial every pulse (the final `M₀[θ_T]` included) gets amplitude
/// `θ(1 + ε + g₁σ_a)` and phase `φ + g₂σ_p`; the draws are fixed per trial
/// and reused across the ε grid.
pub fn noise_mc(
    seq: &PulseSequence,
    theta_t: f64,
    eps: &[f64],
    metric: Metric,
    noise: &NoiseModel,
) -> Result<ErrorCurve> {
    check_grid(eps)?;
    let base = error_curve(seq, theta_t, &eps[..eps.len().min(1)], metric)?;
    let target = rotation(0.0, theta_t);
    let pulses: Vec<(f64, f64)> = seq
        .phases()
        .iter()
        .map(|&p| (p, seq.theta0()))
        .chain(std::iter::once((0.0, theta_t)))
        .collect();
    let per_trial: Vec<Vec<f64>> = (0..noise.trials)
        .into_par_iter()
        .map(|t| {
            let mut rng = noise.trial_rng(t);
            let draws: Vec<(f64, f64)> = pulses
                .iter()
                .map(|_| {
                    let ga: f64 = StandardNormal.sample(&mut rng);
                    let gp: f64 = StandardNormal.sample(&mut rng);
                    (ga * noise.sigma_amplitude, gp * noise.sigma_phase)
                })
                .collect();
            eps.iter()
                .map(|&e| {
                    let u = pulses
                        .iter()
                        .zip(&draws)
                        .fold(Unitary2::identity(), |acc, (&(p, th), &(da, dp))| {
                            acc * rotation(p + dp, th * (1.0 + e + da))
                        });
                    metric.evaluate(&u, &target)
                })
                .collect()
        })
        .collect();
    let points = eps
        .iter()
        .enumerate()
        .map(|(k, &e)| (e, per_trial.iter().map(|v| v[k]).sum::<f64>() / noise.trials as f64))
        .collect();
    Ok(ErrorCurve { label: format!("{} (noise)", base.label), points, ..base })
}

/// Result of a least-squares fit `ln y = slope · ln ε + intercept`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
    pub points: usize,
}

/// Fits over points with `ε ∈ [lo, hi]`, skipping values below
/// [`FIT_FLOOR`]. Needs at least two usable points.
pub fn fit_loglog(points: &[(f64, f64)], lo: f64, hi: f64) -> Option<LogLogFit> {
    let pts: Vec<(f64, f64)> = points
        .iter()
        .filter(|(e, v)| *e >= lo && *e <= hi && *e > 0.0 && *v >= FIT_FLOOR && v.is_finite())
        .map(|(e, v)| (e.ln(), v.ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = pts.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    Some(LogLogFit { slope, intercept: my - slope * mx, points: pts.len() })
}

/// Full width of the interval around `ε = 0` where the inversion
/// probability of a whole-operator sequence stays above `1 − threshold`.
///
/// Each edge is bracketed on a `1e-3` scan and refined by bisection.
pub fn high_fidelity_width(seq: &PulseSequence, threshold: f64) -> f64 {
    let ok = |e: f64| 1.0 - transition_probability(&compose(seq, e)) < threshold;
    let edge = |dir: f64| {
        if !ok(0.0) {
            return 0.0;
        }
        let step = 1e-3;
        let mut inside = 0.0;
        while inside < 1.0 && ok(dir * (inside + step)) {
            inside += step;
        }
        let mut outside = inside + step;
        for _ in 0..40 {
            let mid = 0.5 * (inside + outside);
            if ok(dir * mid) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    edge(1.0) + edge(-1.0)
}

/// Whether a sequence corrects arbitrary states or only inverts `|0⟩`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SequenceClass {
    A,
    B,
}

#[derive(Debug, Clone)]
pub struct LibraryEntry {
    pub sequence: PulseSequence,
    pub class: SequenceClass,
}

fn scaled(unit: f64, multipliers: &[i32]) -> Vec<f64> {
    multipliers.iter().map(|&m| unit * m as f64).collect()
}

/// Broadband inverting `BB_n` from a palindromic 2π solution at `γ = 1`:
/// the toggled phases followed by the zeroth pulse `M₀[π]`.
pub fn bb_from_pd(pd_full: &[f64], n: usize) -> Result<PulseSequence> {
    let mut phases = toggle(pd_full);
    phases.push(0.0);
    Ok(PulseSequence::new(PI, phases)?.with_label(format!("BB{n}")))
}

/// Inverting θ₀ = π sequences used as comparison points, each a complete
/// operator: Δ₂, C₉, S₂, the (toggled) V₈ and V₂₄, and BB4 built from the
/// `γ = 1` PD4 closed form.
pub fn literature_library() -> Result<Vec<LibraryEntry>> {
    let mut out = Vec::new();
    let mut push = |label: &str, phases: Vec<f64>, class| -> Result<()> {
        out.push(LibraryEntry { sequence: PulseSequence::new(PI, phases)?.with_label(label), class });
        Ok(())
    };
    push("Delta2", scaled(PI / 6.0, &[0, 3, 0, 4, 7, 4, 0, 3, 0]), SequenceClass::A)?;
    push("C9", scaled(PI / 12.0, &[0, 1, 12, 11, 18, 11, 12, 1, 0]), SequenceClass::A)?;
    push(
        "S2",
        scaled(PI / 3.0, &[0, 0, 2, 1, 2, 0, 0, 2, 1, 2, 2, 2, 4, 3, 4, 1, 1, 3, 2, 3, 2, 2, 4, 3, 4]),
        SequenceClass::A,
    )?;
    for n in [8usize, 24] {
        push(&format!("V{n}"), toggle(vitanov(n)?.phases()), SequenceClass::B)?;
    }
    let pd4 = crate::closed_form::solve_closed_form(crate::closed_form::ClosedFormFamily::Pd4, 1.0, None)?;
    let best = pd4
        .iter()
        .min_by(|a, b| {
            let k = |s: &PulseSequence| crate::algebra::kappa(4, 1.0, s.phases()).unwrap_or(f64::INFINITY);
            k(a).total_cmp(&k(b))
        })
        .ok_or_else(|| Error::Unsupported("no PD4 solution at γ = 1".into()))?;
    out.push(LibraryEntry { sequence: bb_from_pd(best.phases(), 4)?, class: SequenceClass::A });
    Ok(out)
}

/// `|f_{2n}^{n+1}(1) − Φ_{2n}^{n+1}|` for ToP`n` at `γ = 1`, `n = 1..=n_max`.
pub fn leading_error_trend(n_max: usize) -> Result<Vec<(usize, f64)>> {
    let mut out = Vec::with_capacity(n_max);
    let mut half = vec![2.0 * PI / 3.0];
    for n in 1..=n_max {
        if n > 1 {
            half = bootstrap_top(&half)?;
        }
        let full = expand_symmetry(&half, Symmetry::Ap);
        out.push((n, leading_error(n, 1.0, &full)?.norm()));
    }
    Ok(out)
}

/// Pearson correlation of `ys` against `ln xs`.
pub fn log_correlation(points: &[(usize, f64)]) -> f64 {
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    sxy / (sxx * syy).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{solve_closed_form, ClosedFormFamily};

    fn ap1_half() -> PulseSequence {
        solve_closed_form(ClosedFormFamily::Ap1, 0.5, None).unwrap().remove(0)
    }

    #[test]
    fn zero_error_gives_zero_distance() {
        let c = error_curve(&ap1_half(), PI, &[0.0, 1e-3], Metric::TraceDistance).unwrap();
        assert!(c.points[0].1 < 1e-15);
        assert_eq!(c.n, Some(1));
    }

    #[test]
    fn ap1_slope_is_two() {
        let c = error_curve(&ap1_half(), PI, &log_grid(1e-3, 1e-2, 11), Metric::TraceDistance).unwrap();
        let s = c.slope(1e-3, 1e-2).unwrap();
        assert!((s - 2.0).abs() < 0.1, "{s}");
    }

    #[test]
    fn grid_must_increase() {
        assert!(error_curve(&ap1_half(), PI, &[1e-2, 1e-3], Metric::TraceDistance).is_err());
    }

    #[test]
    fn fit_recovers_power_law_and_skips_floor() {
        let pts: Vec<(f64, f64)> = log_grid(1e-3, 1e-1, 9).into_iter().map(|e| (e, 3.0 * e.powi(4))).collect();
        let f = fit_loglog(&pts, 1e-3, 1e-1).unwrap();
        assert!((f.slope - 4.0).abs() < 1e-12 && (f.intercept - 3f64.ln()).abs() < 1e-10);
        let mut noisy = pts.clone();
        noisy.push((2e-1, 1e-16));
        noisy[0].1 = 1e-20;
        assert!((fit_loglog(&noisy, 0.0, 1.0).unwrap().slope - 4.0).abs() < 1e-12);
    }

    #[test]
    fn zero_noise_matches_systematic_curve() {
        let seq = ap1_half();
        let eps = log_grid(1e-3, 1e-1, 5);
        let a = error_curve(&seq, PI, &eps, Metric::TraceDistance).unwrap();
        let b = noise_mc(&seq, PI, &eps, Metric::TraceDistance, &NoiseModel::isotropic(0.0, 3, 1).unwrap()).unwrap();
        for (x, y) in a.values().zip(b.values()) {
            assert!((x - y).abs() < 1e-15);
        }
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let seq = ap1_half();
        let eps = log_grid(1e-4, 1e-1, 4);
        let noise = NoiseModel::isotropic(1e-3, 16, 42).unwrap();
        let a = noise_mc(&seq, PI, &eps, Metric::TraceDistance, &noise).unwrap();
        let b = noise_mc(&seq, PI, &eps, Metric::TraceDistance, &noise).unwrap();
        assert_eq!(a, b);
        let c = noise_mc(&seq, PI, &eps, Metric::TraceDistance, &NoiseModel { seed: 43, ..noise }).unwrap();
        assert_ne!(a, c);
        assert!(NoiseModel::new(-1.0, 0.0, 1, 0).is_err());
    }

    #[test]
    fn library_shapes() {
        let lib = literature_library().unwrap();
        let len = |name: &str| lib.iter().find(|e| e.sequence.label() == name).unwrap().sequence.len();
        assert_eq!((len("Delta2"), len("C9"), len("S2"), len("V8"), len("V24")), (9, 9, 25, 9, 25));
        for e in &lib {
            let p = transition_probability(&compose(&e.sequence, 0.0));
            assert!((p - 1.0).abs() < 1e-12, "{}", e.sequence.label());
        }
    }

    #[test]
    fn csv_layout() {
        let c = error_curve(&ap1_half(), PI, &[1e-3, 1e-2], Metric::TraceDistance).unwrap();
        let mut buf = Vec::new();
        write_csv(std::slice::from_ref(&c), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("epsilon,value,label,metric,n,gamma"));
        assert!(lines.next().unwrap().ends_with(",AP1,trace-distance,1,0.5"));
        assert_eq!(c.file_name(), "AP1_trace-distance.csv");
    }

    #[test]
    fn leading_error_at_first_order() {
        let t = leading_error_trend(1).unwrap();
        assert!((t[0].1 - 0.866).abs() < 1e-3);
    }

    #[test]
    fn metric_names_round_trip() {
        for m in [Metric::TraceDistance, Metric::Infidelity, Metric::TransitionProbability] {
            assert_eq!(m.to_string().parse::<Metric>().unwrap(), m);
        }
    }
}

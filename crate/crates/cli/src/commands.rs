use std::f64::consts::PI;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use arbpulse::closed_form::{solve_closed_form, ClosedFormFamily};
use arbpulse::continuation::{
    continue_path, seed_bootstrap, seed_pd, seed_top, ContinuationOptions, Termination,
};
use arbpulse::groebner::{
    buchberger, is_groebner, real_zeros, reduce_basis, saturate, spurious_factors, weierstrass_system, PolySystem,
};
use arbpulse::harness::{
    error_curve, export_csv, log_grid, noise_mc, operator_curve, transition_curve, literature_library, ErrorCurve,
    SequenceClass,
};
use arbpulse::record::residual_norm;
use arbpulse::search::{default_starts, multistart_search, search_across, SearchStats};
use arbpulse::su2::compose;
use arbpulse::{ConstraintSpec, NoiseModel, PulseSequence, SequenceRecord, Symmetry};
use serde::{Deserialize, Serialize};

use crate::output::{self, round_record, sig12, OUTPUT_DIR_ENV};
use crate::{BenchArgs, Cli, CliError, Command, ContinueArgs, Format, GroebnerArgs, SearchArgs, SeedKind, SolveArgs, VerifyArgs};

type Result<T> = std::result::Result<T, CliError>;

fn output_base() -> Option<PathBuf> {
    std::env::var_os(OUTPUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from)
}

fn output_path(cli: &Cli) -> Option<PathBuf> {
    cli.output.as_deref().map(|p| output::resolve(p, output_base().as_deref()))
}

pub fn dispatch(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Solve(a) => solve(cli, a),
        Command::Continue(a) => continue_cmd(cli, a),
        Command::Search(a) => search(cli, a),
        Command::Verify(a) => verify(cli, a),
        Command::Groebner(a) => groebner(cli, a),
        Command::Bench(a) => bench(cli, a),
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct Solutions {
    solutions: Vec<SequenceRecord>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    stats: Option<SearchStats>,
}

fn emit_records(cli: &Cli, records: Vec<SequenceRecord>, stats: Option<SearchStats>) -> Result<()> {
    let records: Vec<SequenceRecord> = records.iter().map(round_record).collect();
    let mut out = output::open(output_path(cli).as_deref())?;
    match cli.format {
        Format::Json => output::write_json(&mut *out, &Solutions { solutions: records, stats })?,
        Format::Csv => output::write_records_csv(&mut *out, &records)?,
    }
    Ok(())
}

fn parse_symmetry(s: &str) -> Result<Symmetry> {
    match s.parse::<Symmetry>()? {
        Symmetry::None => Err(CliError::Invalid("symmetry must be AP or PD".into())),
        sym => Ok(sym),
    }
}

fn solve(cli: &Cli, a: &SolveArgs) -> Result<()> {
    let family: ClosedFormFamily = a.family.parse()?;
    let seqs = solve_closed_form(family, a.gamma, a.t4)?;
    let n = family.order();
    let records: Vec<SequenceRecord> = seqs
        .iter()
        .map(|s| SequenceRecord::from_sequence(s, n, a.gamma, format!("closed_form:{family}")))
        .collect();
    let empty = records.is_empty();
    emit_records(cli, records, None)?;
    if empty {
        return Err(CliError::NoSolution(format!("{family} has no real solution at γ = {}", a.gamma)));
    }
    Ok(())
}

#[derive(Serialize)]
struct ContinueReport {
    seed: arbpulse::Seed,
    termination: Termination,
    gamma_range: (f64, f64),
    min_abs_det: f64,
    records: usize,
    #[serde(rename = "final")]
    last: SequenceRecord,
}

fn continue_cmd(cli: &Cli, a: &ContinueArgs) -> Result<()> {
    let seed = match a.seed {
        SeedKind::Top => seed_top(a.n, a.b)?,
        SeedKind::Pd => seed_pd(a.n, a.m.unwrap_or(a.n / 2))?,
        SeedKind::Bootstrap => seed_bootstrap(a.n)?,
    };
    let mut opts = ContinuationOptions::default();
    if let Some(v) = a.min_step {
        opts.min_step = v;
    }
    if let Some(v) = a.max_step {
        opts.max_step = v;
    }
    if let Some(v) = a.singular_tol {
        opts.singular_rel_tol = v;
    }
    if !(opts.min_step > 0.0 && opts.min_step <= opts.max_step) {
        return Err(CliError::Invalid("need 0 < min-step ≤ max-step".into()));
    }
    let path = continue_path(&seed, a.to, &opts)?;
    if let Some(p) = &a.path_jsonl {
        let p = output::resolve(p, output_base().as_deref());
        path.write_jsonl(output::open(Some(&p))?)?;
    }
    let last = path.last();
    let seq = PulseSequence::from_half(2.0 * PI, &last.phases, seed.symmetry)?.with_gamma(last.gamma);
    let record = round_record(&SequenceRecord::from_sequence(
        &seq,
        seed.n,
        last.gamma,
        format!("continuation:{:?}", seed.family).to_lowercase(),
    ));
    let mut out = output::open(output_path(cli).as_deref())?;
    match cli.format {
        Format::Json => output::write_json(
            &mut *out,
            &ContinueReport {
                seed: seed.clone(),
                termination: path.termination,
                gamma_range: path.gamma_range(),
                min_abs_det: sig12(path.min_abs_det()),
                records: path.records.len(),
                last: record,
            },
        )?,
        Format::Csv => {
            writeln!(out, "gamma,detJ,residual,step,phases")?;
            for r in &path.records {
                let phases: Vec<String> = r.phases.iter().map(|p| output::fmt12(*p)).collect();
                writeln!(
                    out,
                    "{},{},{},{},{}",
                    output::fmt12(r.gamma),
                    output::fmt12(r.det_j),
                    output::fmt12(r.residual),
                    output::fmt12(r.step),
                    phases.join(" ")
                )?;
            }
            out.flush()?;
        }
    }
    if !path.reached() {
        return Err(CliError::NoSolution(format!("path stopped before γ = {}: {:?}", a.to, path.termination)));
    }
    Ok(())
}

fn search(cli: &Cli, a: &SearchArgs) -> Result<()> {
    let symmetry = parse_symmetry(&a.symmetry)?;
    let starts = a.starts.unwrap_or_else(|| default_starts(a.n));
    let set = match &a.also_gamma {
        None => multistart_search(&ConstraintSpec::symmetric(a.n, a.gamma, symmetry)?, starts, a.seed)?,
        Some(extra) => {
            let mut gammas = vec![a.gamma];
            gammas.extend(extra.0.iter().copied().filter(|g| *g != a.gamma));
            search_across(a.n, symmetry, &gammas, starts, a.seed, &[])?.swap_remove(0)
        }
    };
    let records: Vec<SequenceRecord> = set
        .members
        .iter()
        .map(|m| {
            let seq = PulseSequence::from_half(2.0 * PI, &m.phases, symmetry)?.with_gamma(a.gamma);
            Ok(SequenceRecord::from_sequence(&seq, a.n, a.gamma, format!("root_search:seed={}", a.seed)))
        })
        .collect::<Result<_>>()?;
    let empty = records.is_empty();
    emit_records(cli, records, Some(set.stats))?;
    if empty {
        return Err(CliError::NoSolution(format!("no {symmetry}{} solution found at γ = {}", a.n, a.gamma)));
    }
    Ok(())
}

/// Accepts `{"solutions": [...]}`, `{"final": {...}}`, a bare record or a
/// list of records.
fn read_records(path: &Path) -> Result<Vec<SequenceRecord>> {
    let mut text = String::new();
    if path.as_os_str() == "-" {
        std::io::stdin().read_to_string(&mut text)?;
    } else {
        text = std::fs::read_to_string(path)?;
    }
    let value: serde_json::Value = serde_json::from_str(&text)?;
    let pick = |v: &serde_json::Value| -> Option<serde_json::Value> {
        if let Some(s) = v.get("solutions") {
            return Some(s.clone());
        }
        if let Some(f) = v.get("final") {
            return Some(serde_json::Value::Array(vec![f.clone()]));
        }
        match v {
            serde_json::Value::Array(_) => Some(v.clone()),
            serde_json::Value::Object(_) => Some(serde_json::Value::Array(vec![v.clone()])),
            _ => None,
        }
    };
    let list = pick(&value).ok_or_else(|| CliError::Invalid("input holds no sequence records".into()))?;
    Ok(serde_json::from_value(list)?)
}

#[derive(Serialize)]
struct Verdict {
    #[serde(flatten)]
    record: SequenceRecord,
    slope: Option<f64>,
    expected_slope: usize,
    passed: bool,
}

#[derive(Serialize)]
struct VerifyReport<'a> {
    results: &'a [Verdict],
}

fn slope_of(seq: &PulseSequence, gamma: f64) -> Option<f64> {
    let theta_t = gamma * seq.theta0();
    let curve = error_curve(seq, theta_t, &log_grid(1e-3, 1e-2, 11), arbpulse::Metric::TraceDistance).ok()?;
    curve.slope(1e-3, 1e-2)
}

fn verify(cli: &Cli, a: &VerifyArgs) -> Result<()> {
    let jobs: Vec<(PulseSequence, usize, f64)> = match (&a.phases, &a.input) {
        (Some(phases), None) => {
            let n = a.n.ok_or_else(|| CliError::Invalid("--n is required with --phases".into()))?;
            let gamma = a.gamma.ok_or_else(|| CliError::Invalid("--gamma is required with --phases".into()))?;
            let seq = PulseSequence::new(a.theta0, phases.0.clone())?.with_gamma(gamma);
            vec![(seq, n, gamma)]
        }
        (None, Some(path)) => read_records(path)?
            .into_iter()
            .map(|r| Ok((r.to_sequence()?, a.n.unwrap_or(r.n), a.gamma.unwrap_or(r.gamma))))
            .collect::<Result<_>>()?,
        _ => return Err(CliError::Invalid("give either --phases or --input".into())),
    };
    if jobs.is_empty() {
        return Err(CliError::Invalid("nothing to verify".into()));
    }
    if !(a.tol > 0.0) {
        return Err(CliError::Invalid("--tol must be positive".into()));
    }
    let mut verdicts = Vec::with_capacity(jobs.len());
    for (seq, n, gamma) in jobs {
        if n == 0 {
            return Err(CliError::Invalid("--n must be positive".into()));
        }
        let residual = residual_norm(&seq, n, gamma);
        let slope = slope_of(&seq, gamma);
        let slope_ok = slope.is_some_and(|s| (s - (n + 1) as f64).abs() <= 0.1);
        let passed = residual < a.tol && (!a.check_slope || slope_ok);
        let mut record = SequenceRecord::from_sequence(&seq, n, gamma, "verify");
        record.residual_norm = residual;
        verdicts.push(Verdict { record: round_record(&record), slope: slope.map(sig12), expected_slope: n + 1, passed });
    }
    let mut out = output::open(output_path(cli).as_deref())?;
    match cli.format {
        Format::Json => output::write_json(&mut *out, &VerifyReport { results: &verdicts })?,
        Format::Csv => {
            writeln!(out, "n,L,gamma,residual_norm,slope,expected_slope,passed")?;
            for v in &verdicts {
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    v.record.n,
                    v.record.len,
                    output::fmt12(v.record.gamma),
                    output::fmt12(v.record.residual_norm),
                    v.slope.map(output::fmt12).unwrap_or_default(),
                    v.expected_slope,
                    v.passed
                )?;
            }
            out.flush()?;
        }
    }
    let failed = verdicts.iter().filter(|v| !v.passed).count();
    if failed > 0 {
        return Err(CliError::NoSolution(format!("{failed} of {} sequences failed verification", verdicts.len())));
    }
    Ok(())
}

#[derive(Serialize)]
struct GroebnerReport {
    n: usize,
    symmetry: Symmetry,
    input: Vec<String>,
    basis: Vec<String>,
    reduced: Vec<String>,
    saturated: Vec<String>,
    is_groebner: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    gamma: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    zeros: Option<Vec<Vec<f64>>>,
}

fn lines(s: &PolySystem) -> Vec<String> {
    s.polys().iter().map(|p| p.to_string()).collect()
}

fn groebner(cli: &Cli, a: &GroebnerArgs) -> Result<()> {
    let (n, symmetry) = match (&a.system, a.n, &a.symmetry) {
        (Some(sys), None, None) => {
            let sys = sys.trim();
            let split = sys.find(|c: char| c.is_ascii_digit()).ok_or_else(|| CliError::Invalid(format!("bad system `{sys}`")))?;
            let n = sys[split..].parse().map_err(|_| CliError::Invalid(format!("bad system `{sys}`")))?;
            (n, parse_symmetry(&sys[..split])?)
        }
        (None, Some(n), Some(sym)) => (n, parse_symmetry(sym)?),
        _ => return Err(CliError::Invalid("give --system (e.g. PD2) or both --n and --symmetry".into())),
    };
    let input = weierstrass_system(&ConstraintSpec::symmetric(n, 0.0, symmetry)?)?;
    let basis = buchberger(&input)?;
    let reduced = reduce_basis(&basis);
    let saturated = saturate(&reduced, &spurious_factors(input.nvars()))?;
    let zeros = a.gamma.map(|g| {
        real_zeros(&saturated, g)
            .into_iter()
            .map(|t| t.iter().map(|x| sig12(2.0 * x.atan())).collect())
            .collect()
    });
    let report = GroebnerReport {
        n,
        symmetry,
        input: lines(&input),
        basis: lines(&basis),
        reduced: lines(&reduced),
        is_groebner: is_groebner(&saturated),
        saturated: lines(&saturated),
        gamma: a.gamma,
        zeros,
    };
    let mut out = output::open(output_path(cli).as_deref())?;
    match cli.format {
        Format::Json => output::write_json(&mut *out, &report)?,
        Format::Csv => {
            writeln!(out, "stage,polynomial")?;
            for (stage, polys) in
                [("input", &report.input), ("basis", &report.basis), ("reduced", &report.reduced), ("saturated", &report.saturated)]
            {
                for p in polys {
                    writeln!(out, "{stage},\"{}\"", p.replace('"', "\"\""))?;
                }
            }
            out.flush()?;
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct CurveSummary {
    label: String,
    file: PathBuf,
    slope: Option<f64>,
}

#[derive(Serialize)]
struct BenchReport<'a> {
    out_dir: &'a Path,
    curves: &'a [CurveSummary],
}

fn bench(cli: &Cli, a: &BenchArgs) -> Result<()> {
    if !(a.eps_min > 0.0 && a.eps_min < a.eps_max) || a.points < 2 {
        return Err(CliError::Invalid("need 0 < eps-min < eps-max and at least 2 points".into()));
    }
    if a.n_max == 0 {
        return Err(CliError::Invalid("--n-max must be positive".into()));
    }
    let eps = log_grid(a.eps_min, a.eps_max, a.points);
    let theta_t = a.gamma * 2.0 * PI;
    let mut curves: Vec<ErrorCurve> = Vec::new();
    for n in 1..=a.n_max {
        let seed = seed_top(n, 0)?;
        let path = continue_path(&seed, a.gamma, &ContinuationOptions::default())?;
        if !path.reached() {
            eprintln!("arbpulse: ToP{n} path stops before γ = {}; skipped", a.gamma);
            continue;
        }
        let seq = PulseSequence::from_half(2.0 * PI, &path.last().phases, Symmetry::Ap)?
            .with_gamma(a.gamma)
            .with_label(format!("ToP{n}"));
        curves.push(error_curve(&seq, theta_t, &eps, a.metric)?);
        if let Some(sigma) = a.noise_sigma {
            let noise = NoiseModel::isotropic(sigma, a.trials, a.seed)?;
            curves.push(noise_mc(&seq, theta_t, &eps, a.metric, &noise)?);
        }
    }
    if a.library {
        for entry in literature_library()? {
            let seq = &entry.sequence;
            curves.push(match entry.class {
                SequenceClass::A => operator_curve(seq, &compose(seq, 0.0), &eps, a.metric)?,
                SequenceClass::B => transition_curve(seq, &eps)?,
            });
        }
    }
    if curves.is_empty() {
        return Err(CliError::NoSolution(format!("no sequence reaches γ = {}", a.gamma)));
    }
    let dir = a
        .out_dir
        .clone()
        .or_else(output_base)
        .unwrap_or_else(|| PathBuf::from("."));
    std::fs::create_dir_all(&dir)?;
    let files = export_csv(&curves, &dir)?;
    let summary: Vec<CurveSummary> = curves
        .iter()
        .zip(files)
        .map(|(c, file)| CurveSummary {
            label: c.label.clone(),
            file,
            slope: c.slope(a.eps_min.max(1e-3), a.eps_max.min(1e-2)).map(sig12),
        })
        .collect();
    let mut out = output::open(output_path(cli).as_deref())?;
    match cli.format {
        Format::Json => output::write_json(&mut *out, &BenchReport { out_dir: &dir, curves: &summary })?,
        Format::Csv => {
            writeln!(out, "label,file,slope")?;
            for s in &summary {
                writeln!(
                    out,
                    "{},{},{}",
                    s.label,
                    s.file.display(),
                    s.slope.map(output::fmt12).unwrap_or_default()
                )?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

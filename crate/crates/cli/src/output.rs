//! Where results go and how numbers are printed.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use arbpulse::SequenceRecord;
use serde::Serialize;

/// Environment variable naming the directory for relative output paths and
/// benchmark CSVs.
pub const OUTPUT_DIR_ENV: &str = "ARBPULSE_OUTPUT_DIR";

/// Rounds to 12 significant digits, the precision of every emitted number.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

pub fn round_record(r: &SequenceRecord) -> SequenceRecord {
    SequenceRecord {
        theta0: sig12(r.theta0),
        gamma: sig12(r.gamma),
        phases: r.phases.iter().copied().map(sig12).collect(),
        kappa: r.kappa.map(sig12),
        residual_norm: sig12(r.residual_norm),
        ..r.clone()
    }
}

/// Resolves a user path: relative paths land under `base` when given.
pub fn resolve(path: &Path, base: Option<&Path>) -> PathBuf {
    match base {
        Some(dir) if path.is_relative() => dir.join(path),
        _ => path.to_path_buf(),
    }
}

/// Opens the output file (creating parent directories) or stdout.
pub fn open(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    match path {
        None => Ok(Box::new(BufWriter::new(io::stdout().lock()))),
        Some(p) => {
            if let Some(parent) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            Ok(Box::new(BufWriter::new(File::create(p)?)))
        }
    }
}

pub fn write_json<T: Serialize>(out: &mut dyn Write, value: &T) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// One row per record; phases are space-separated in the last column.
pub fn write_records_csv(out: &mut dyn Write, records: &[SequenceRecord]) -> io::Result<()> {
    writeln!(out, "n,L,theta0,gamma,symmetry,kappa,residual_norm,provenance,phases")?;
    for r in records {
        let phases: Vec<String> = r.phases.iter().map(|p| fmt12(*p)).collect();
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{}",
            r.n,
            r.len,
            fmt12(r.theta0),
            fmt12(r.gamma),
            r.symmetry,
            r.kappa.map(fmt12).unwrap_or_default(),
            fmt12(r.residual_norm),
            csv_field(&r.provenance),
            phases.join(" ")
        )?;
    }
    out.flush()
}

/// Shortest round-trip text of the 12-digit value (`3.09e-11`, not a long
/// decimal expansion).
pub fn fmt12(x: f64) -> String {
    serde_json::Number::from_f64(sig12(x)).map_or_else(|| x.to_string(), |n| n.to_string())
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

//! Per-trial CSV output and the human-readable summary table.

use std::fmt::Write as _;
use std::io::{self, Write};
use std::path::Path;

use crate::bench::{Algorithm, ExperimentKind, SweepResult, TrialRecord};
use crate::{Error, Result};

pub const CSV_HEADER: &str = "experiment,algorithm,L,N,T,snr_db,trial,seed,mse,support_recovered,cpu_seconds,failed";

/// Column index of `cpu_seconds`, the only nondeterministic field.
pub const CPU_SECONDS_COLUMN: usize = 10;

/// 17 significant digits, `inf`/`-inf`/`nan` for non-finite values.
pub fn format_real(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{v:.16e}")
    }
}

pub fn record_row(r: &TrialRecord) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.experiment.label(),
        r.algorithm.label(),
        r.channel_length,
        r.training_length,
        r.sparsity,
        format_real(r.snr_db),
        r.trial_index,
        r.seed,
        format_real(r.mse),
        r.support_recovered,
        format_real(r.cpu_seconds),
        r.failed
    )
}

pub fn write_records<W: Write>(mut out: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(out, "{}", record_row(r))?;
    }
    out.flush()
}

/// Writes the CSV to a sibling temporary file and renames it into place, so
/// `path` either holds a complete table or is untouched.
pub fn write_csv_atomic(path: &Path, records: &[TrialRecord]) -> Result<()> {
    let file_name = path
        .file_name()
        .ok_or_else(|| Error::invalid(format!("output path `{}` has no file name", path.display())))?;
    let mut tmp_name = file_name.to_os_string();
    tmp_name.push(format!(".tmp{}", std::process::id()));
    let tmp = path.with_file_name(tmp_name);
    let result = (|| -> io::Result<()> {
        let file = std::fs::File::create(&tmp)?;
        let mut buf = io::BufWriter::new(file);
        write_records(&mut buf, records)?;
        buf.into_inner().map_err(|e| e.into_error())?.sync_all()?;
        std::fs::rename(&tmp, path)
    })();
    if result.is_err() {
        let _ = std::fs::remove_file(&tmp);
    }
    result.map_err(Error::from)
}

fn parse_row(line: &str, line_no: usize) -> Result<TrialRecord> {
    let bad = |what: &str| Error::invalid(format!("CSV line {line_no}: bad {what}"));
    let f: Vec<&str> = line.split(',').collect();
    if f.len() != 12 {
        return Err(bad("column count"));
    }
    fn p<T: std::str::FromStr>(s: &str) -> Option<T> {
        s.parse().ok()
    }
    Ok(TrialRecord {
        experiment: f[0].parse::<ExperimentKind>().map_err(|_| bad("experiment"))?,
        algorithm: f[1].parse::<Algorithm>().map_err(|_| bad("algorithm"))?,
        channel_length: p(f[2]).ok_or_else(|| bad("L"))?,
        training_length: p(f[3]).ok_or_else(|| bad("N"))?,
        sparsity: p(f[4]).ok_or_else(|| bad("T"))?,
        snr_db: p(f[5]).ok_or_else(|| bad("snr_db"))?,
        trial_index: p(f[6]).ok_or_else(|| bad("trial"))?,
        seed: p(f[7]).ok_or_else(|| bad("seed"))?,
        mse: p(f[8]).ok_or_else(|| bad("mse"))?,
        support_recovered: p(f[9]).ok_or_else(|| bad("support_recovered"))?,
        cpu_seconds: p(f[10]).ok_or_else(|| bad("cpu_seconds"))?,
        failed: p(f[11]).ok_or_else(|| bad("failed"))?,
    })
}

/// Parses a table written by [`write_records`].
pub fn read_records(text: &str) -> Result<Vec<TrialRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == CSV_HEADER => {}
        _ => return Err(Error::invalid("missing or unexpected CSV header")),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| parse_row(l, i + 2))
        .collect()
}

/// Drops the `cpu_seconds` column from every line, for determinism checks.
pub fn mask_cpu_seconds(csv: &str) -> String {
    csv.lines()
        .map(|l| {
            l.split(',')
                .enumerate()
                .filter(|(i, _)| *i != CPU_SECONDS_COLUMN)
                .map(|(_, f)| f)
                .collect::<Vec<_>>()
                .join(",")
        })
        .collect::<Vec<_>>()
        .join("\n")
}

/// Aggregate table: one row per (algorithm, cell).
pub fn summary_table(result: &SweepResult) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:<8} {:>4} {:>7} {:>7} {:>12} {:>10} {:>12} {:>8} {:>6}",
        "algo", "T", "snr_db", "trials", "mean_mse", "std_err", "cpu_s", "success", "fail"
    );
    for a in &result.aggregates {
        let _ = writeln!(
            s,
            "{:<8} {:>4} {:>7} {:>7} {:>12.4e} {:>10.2e} {:>12.3e} {:>8.3} {:>6}",
            a.algorithm.label(),
            a.sparsity,
            if a.snr_db.is_infinite() {
                "inf".to_string()
            } else {
                format!("{}", a.snr_db)
            },
            a.trials,
            a.mean_mse,
            a.mse_std_error,
            a.mean_cpu_seconds,
            a.success_rate,
            a.failures
        );
    }
    s
}

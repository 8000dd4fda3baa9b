//! Sweep-result persistence: one CSV row per (position, sigma_e) pair.
//!
//! The column set and order are fixed; floats are written with 9
//! significant digits so a read-back reproduces the values, with LF line
//! endings for byte-stable output across platforms.

use anyhow::{bail, Context, Result};
use irsim_core::geometry::Point3;
use irsim_core::sim::SweepRecord;
use std::path::Path;

pub const CSV_HEADER: &str = "ue_x,ue_y,ue_z,sigma_e,trials,snr_upper_db,snr_proposed_db,snr_noopt_db,mean_pos_err_m,failure_rate";

/// 9-significant-digit scientific notation; parses back to within one unit
/// in the ninth digit.
fn sig9(x: f64) -> String {
    format!("{x:.8e}")
}

/// Render records as CSV text (header + one line per record, LF endings).
pub fn format_records(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(64 + records.len() * 128);
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&sig9(r.ue_position.x));
        out.push(',');
        out.push_str(&sig9(r.ue_position.y));
        out.push(',');
        out.push_str(&sig9(r.ue_position.z));
        out.push(',');
        out.push_str(&sig9(r.sigma_e));
        out.push(',');
        out.push_str(&r.trials.to_string());
        out.push(',');
        out.push_str(&sig9(r.snr_upper_db));
        out.push(',');
        out.push_str(&sig9(r.snr_proposed_db));
        out.push(',');
        out.push_str(&sig9(r.snr_noopt_db));
        out.push(',');
        out.push_str(&sig9(r.mean_position_error_m));
        out.push(',');
        out.push_str(&sig9(r.failure_rate));
        out.push('\n');
    }
    out
}

/// Write records to `path`, creating or truncating it.
pub fn write_results(records: &[SweepRecord], path: &Path) -> Result<()> {
    std::fs::write(path, format_records(records))
        .with_context(|| format!("writing results to {}", path.display()))
}

/// Parse CSV text produced by [`format_records`].
pub fn parse_records(text: &str) -> Result<Vec<SweepRecord>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header == CSV_HEADER => {}
        Some(other) => bail!("unexpected CSV header: {other}"),
        None => bail!("empty CSV input"),
    }
    let mut records = Vec::new();
    for (lineno, line) in lines.enumerate() {
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 10 {
            bail!("line {}: expected 10 fields, got {}", lineno + 2, fields.len());
        }
        let f = |i: usize| -> Result<f64> {
            fields[i]
                .parse::<f64>()
                .with_context(|| format!("line {}: field {}", lineno + 2, i + 1))
        };
        records.push(SweepRecord {
            ue_position: Point3::new(f(0)?, f(1)?, f(2)?),
            sigma_e: f(3)?,
            trials: fields[4]
                .parse::<u32>()
                .with_context(|| format!("line {}: field 5", lineno + 2))?,
            snr_upper_db: f(5)?,
            snr_proposed_db: f(6)?,
            snr_noopt_db: f(7)?,
            mean_position_error_m: f(8)?,
            failure_rate: f(9)?,
        });
    }
    Ok(records)
}

/// Read a results file back.
pub fn read_results(path: &Path) -> Result<Vec<SweepRecord>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading results from {}", path.display()))?;
    parse_records(&text)
}

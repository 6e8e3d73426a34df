//! Per-slot metric records and their CSV form.
//!
//! The CSV schema is fixed: a `#`-prefixed comment block echoing the fully
//! resolved configuration, one header row, then one data row per slot.
//! Floats are written with Rust's shortest round-trip formatting, so
//! parsing an emitted file reproduces the in-memory rows exactly and two
//! identical runs produce byte-identical files.

use crate::config::ScenarioConfig;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("CSV I/O: {0}")]
    Io(#[from] std::io::Error),
    #[error("CSV parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

pub const CSV_HEADER: &str = "t,mean_cost,hardening_overhead,mean_cdi,victim_deviation,spoof_belief,joint_trust_min,paths_open,recon_fallbacks,policy,seed";

/// One slot of instantaneous defense metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    /// Slot time, seconds; strictly increasing within a run.
    pub t: f64,
    /// Mean per-UAV defense cost (latency + energy + congestion + risk).
    pub mean_cost: f64,
    /// Reasoning / verification / patching overhead billed this slot.
    pub hardening_overhead: f64,
    /// Mean CDI, meters.
    pub mean_cdi: f64,
    /// Victim navigation error, meters.
    pub victim_deviation: f64,
    /// Posterior probability that an attack is underway.
    pub spoof_belief: f64,
    /// Minimum joint trust over admitted UAVs.
    pub joint_trust_min: f64,
    /// Verified attack paths currently open.
    pub paths_open: usize,
    /// UAVs that fell back to raw GPS for lack of anchors this slot.
    pub recon_fallbacks: usize,
    pub policy: String,
    pub seed: u64,
}

impl MetricsRow {
    fn to_csv_line(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.t,
            self.mean_cost,
            self.hardening_overhead,
            self.mean_cdi,
            self.victim_deviation,
            self.spoof_belief,
            self.joint_trust_min,
            self.paths_open,
            self.recon_fallbacks,
            self.policy,
            self.seed
        )
    }

    fn from_csv_line(line: &str, line_no: usize) -> Result<Self, MetricsError> {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 11 {
            return Err(MetricsError::Parse {
                line: line_no,
                message: format!("expected 11 fields, got {}", fields.len()),
            });
        }
        let parse_f = |idx: usize| -> Result<f64, MetricsError> {
            fields[idx].parse().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("bad float '{}'", fields[idx]),
            })
        };
        Ok(MetricsRow {
            t: parse_f(0)?,
            mean_cost: parse_f(1)?,
            hardening_overhead: parse_f(2)?,
            mean_cdi: parse_f(3)?,
            victim_deviation: parse_f(4)?,
            spoof_belief: parse_f(5)?,
            joint_trust_min: parse_f(6)?,
            paths_open: fields[7].parse().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("bad count '{}'", fields[7]),
            })?,
            recon_fallbacks: fields[8].parse().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("bad count '{}'", fields[8]),
            })?,
            policy: fields[9].to_string(),
            seed: fields[10].parse().map_err(|_| MetricsError::Parse {
                line: line_no,
                message: format!("bad seed '{}'", fields[10]),
            })?,
        })
    }
}

/// Render a full CSV document: config echo, header, rows.
pub fn to_csv(config: &ScenarioConfig, rows: &[MetricsRow]) -> String {
    let mut out = config.echo_comment();
    let _ = writeln!(out, "{CSV_HEADER}");
    for row in rows {
        let _ = writeln!(out, "{}", row.to_csv_line());
    }
    out
}

/// Parse a CSV document produced by [`to_csv`], skipping comments.
pub fn from_csv(text: &str) -> Result<Vec<MetricsRow>, MetricsError> {
    let mut rows = Vec::new();
    let mut seen_header = false;
    for (idx, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !seen_header {
            if line != CSV_HEADER {
                return Err(MetricsError::Parse {
                    line: idx + 1,
                    message: "missing or unexpected header row".into(),
                });
            }
            seen_header = true;
            continue;
        }
        rows.push(MetricsRow::from_csv_line(line, idx + 1)?);
    }
    Ok(rows)
}

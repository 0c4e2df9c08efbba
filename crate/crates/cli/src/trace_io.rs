//! Trace CSV and terminal-state JSON writers.
//!
//! Floats are written with 17 significant digits so every value reads back
//! to the same `f64`.

use std::fs;
use std::path::Path;

use serde::Serialize;
use serde_json::value::RawValue;
use sheafcoord::{Cochain0, Cochain1};

use crate::error::CliError;

pub const TRACE_HEADER: [&str; 4] = ["iter", "primal_residual", "dual_residual", "objective"];

/// `{:.16e}`: one leading digit and sixteen decimals.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn json_number(v: f64) -> Box<RawValue> {
    let text = if v.is_finite() {
        format_f64(v)
    } else {
        "null".to_string()
    };
    RawValue::from_string(text).expect("formatted float is valid JSON")
}

fn json_blocks(blocks: &[Vec<f64>]) -> Vec<Vec<Box<RawValue>>> {
    blocks
        .iter()
        .map(|b| b.iter().map(|&v| json_number(v)).collect())
        .collect()
}

/// One trace row.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceRow {
    pub iter: usize,
    pub primal_residual: f64,
    pub dual_residual: f64,
    pub objective: f64,
}

pub fn trace_csv(rows: &[TraceRow]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(TRACE_HEADER).map_err(io)?;
    for r in rows {
        w.write_record([
            r.iter.to_string(),
            format_f64(r.primal_residual),
            format_f64(r.dual_residual),
            format_f64(r.objective),
        ])
        .map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
}

#[derive(Serialize)]
pub struct TerminalReport {
    pub status: String,
    pub x: Vec<Vec<Box<RawValue>>>,
    pub delta_x: Vec<Vec<Box<RawValue>>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub is_global_section: Option<bool>,
}

impl TerminalReport {
    pub fn new(status: &str, x: &Cochain0, delta_x: &Cochain1, is_global_section: Option<bool>) -> Self {
        Self {
            status: status.to_string(),
            x: json_blocks(x.blocks()),
            delta_x: json_blocks(delta_x.blocks()),
            is_global_section,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Serialize)]
pub struct CohomologyReport {
    pub dim_h0: usize,
    pub dim_h1: usize,
    /// Orthonormal basis of global sections, each as per-vertex arrays.
    pub section_basis: Vec<Vec<Vec<Box<RawValue>>>>,
}

impl CohomologyReport {
    pub fn new(dim_h0: usize, dim_h1: usize, basis: &[Cochain0]) -> Self {
        Self {
            dim_h0,
            dim_h1,
            section_basis: basis.iter().map(|b| json_blocks(b.blocks())).collect(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Writes `trace.csv` and `terminal.json` into `dir`, creating it if needed.
pub fn write_outputs(dir: &Path, rows: &[TraceRow], terminal: &TerminalReport) -> Result<(), CliError> {
    let io = |what: &str, e: std::io::Error| CliError::Io(format!("{what}: {e}"));
    fs::create_dir_all(dir).map_err(|e| io(&dir.display().to_string(), e))?;
    let trace = dir.join("trace.csv");
    fs::write(&trace, trace_csv(rows)?).map_err(|e| io(&trace.display().to_string(), e))?;
    let term = dir.join("terminal.json");
    fs::write(&term, terminal.to_json() + "\n").map_err(|e| io(&term.display().to_string(), e))?;
    Ok(())
}

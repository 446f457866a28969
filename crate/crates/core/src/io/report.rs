//! Run report and the CSV tables written next to it.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::faber::BasisTag;
use crate::series::SeriesDecomposition;
use crate::C64;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckOutcome {
    pub id: String,
    pub anchor: String,
    pub passed: bool,
    pub measured: f64,
    pub threshold: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualRow {
    #[serde(rename = "M")]
    pub order: u32,
    pub l2_residual: f64,
    /// `None` when no point of the compact set is admissible.
    pub sup_error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientRow {
    pub tag: String,
    /// 1-based cap (or holomorphic basis) index.
    pub k: usize,
    /// Order of `α^m_k`; 0 for `β` and `γ`.
    pub m: u32,
    pub re: f64,
    pub im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionSummary {
    pub order: u32,
    pub epsilon: Vec<C64>,
    pub c: Vec<C64>,
    pub d: Vec<C64>,
    pub gram_condition: f64,
    pub regularized: bool,
    pub residuals: Vec<ResidualRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ExperimentConfig,
    pub decomposition: Option<DecompositionSummary>,
    pub checks: Vec<CheckOutcome>,
    pub timings: Vec<Timing>,
    pub error: Option<String>,
    pub passed: bool,
}

impl RunReport {
    pub fn check(&self, id: &str) -> Option<&CheckOutcome> {
        self.checks.iter().find(|c| c.id == id)
    }
}

/// Coefficient rows in basis order (`β`, `γ`, then `α` by `m` and `k`).
pub fn coefficient_rows(decomposition: &SeriesDecomposition) -> Vec<CoefficientRow> {
    decomposition
        .coefficients()
        .into_iter()
        .map(|(tag, v)| {
            let (k, m) = match tag {
                BasisTag::Beta(k) | BasisTag::Gamma(k) => (k + 1, 0),
                BasisTag::Alpha { cap, m } => (cap + 1, m),
            };
            CoefficientRow { tag: tag.name().to_string(), k, m, re: v.re, im: v.im }
        })
        .collect()
}

fn full_precision(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn write_coefficients(path: &Path, rows: &[CoefficientRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["tag", "k", "m", "re", "im"])?;
    for r in rows {
        w.write_record([r.tag.clone(), r.k.to_string(), r.m.to_string(), full_precision(r.re), full_precision(r.im)])?;
    }
    w.flush()
}

pub fn write_residuals(path: &Path, rows: &[ResidualRow]) -> std::io::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["M", "l2_residual", "sup_error"])?;
    for r in rows {
        w.write_record([r.order.to_string(), full_precision(r.l2_residual), r.sup_error.map_or_else(String::new, full_precision)])?;
    }
    w.flush()
}

pub fn write_report(path: &Path, report: &RunReport) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    serde_json::to_writer_pretty(&mut file, report)?;
    writeln!(file)
}

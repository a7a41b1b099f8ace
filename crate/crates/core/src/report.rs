//! CSV and JSON serialization of experiment output.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::data::Extended;
use crate::error::{Error, Result};
use crate::sim::{SeedFailure, StepRecord, SummaryRow};

pub const RECORDS_HEADER: [&str; 8] = [
    "seed",
    "t",
    "method",
    "covered",
    "width",
    "metric",
    "bound_relative",
    "wall_ms",
];

pub const SUMMARY_HEADER: [&str; 13] = [
    "method",
    "t",
    "n",
    "coverage_mean",
    "coverage_se",
    "width_median",
    "width_q25",
    "width_q75",
    "width_inf_fraction",
    "metric_mean",
    "metric_se",
    "bound_relative_mean",
    "bound_fallback_fraction",
];

fn csv_err(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn ext(v: Extended) -> String {
    v.to_string()
}

pub fn write_records<W: Write>(out: W, records: &[StepRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(RECORDS_HEADER).map_err(csv_err)?;
    for r in records {
        w.write_record([
            r.seed.to_string(),
            r.t.to_string(),
            r.method.clone(),
            u8::from(r.covered).to_string(),
            ext(r.width),
            r.metric.to_string(),
            opt(r.bound_relative),
            opt(r.wall_ms),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_summary<W: Write>(out: W, rows: &[SummaryRow]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SUMMARY_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.method.clone(),
            r.t.to_string(),
            r.count.to_string(),
            r.coverage_mean.to_string(),
            r.coverage_se.to_string(),
            ext(r.width_median),
            ext(r.width_q25),
            ext(r.width_q75),
            r.width_inf_fraction.to_string(),
            r.metric_mean.to_string(),
            r.metric_se.to_string(),
            opt(r.bound_relative_mean),
            r.bound_fallback_fraction.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_failures<W: Write>(out: W, failures: &[SeedFailure]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["seed", "error"]).map_err(csv_err)?;
    for f in failures {
        w.write_record([f.seed.to_string(), f.error.to_string()])
            .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

/// Provenance of one CLI run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub config_hash: String,
    pub tool_version: String,
    pub seeds: String,
    pub started: String,
    pub finished: String,
    pub outputs: Vec<String>,
    pub failed_seeds: Vec<u64>,
}

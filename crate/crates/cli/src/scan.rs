//! Residual coefficients on scalar-flat models.

use std::fs;
use std::path::{Path, PathBuf};

use geocap_core::fit::{ConjectureRow, SCALAR_FLAT_TOLERANCE};
use geocap_core::conjecture_scan;
use serde::Serialize;

use crate::config::Experiment;
use crate::error::CliError;
use crate::output::fmt12;

#[derive(Debug, Clone, Serialize)]
pub struct ScanReport {
    pub name: String,
    pub model: String,
    pub scalar_curvature: f64,
    pub radii: Vec<f64>,
    pub rows: Vec<ConjectureRow>,
}

pub fn scan(exp: &Experiment, workers: usize) -> Result<ScanReport, CliError> {
    let s = exp.model.scalar_curvature();
    if s.abs() > SCALAR_FLAT_TOLERANCE {
        return Err(CliError::Validation(format!("{} has scalar curvature {s} at the base point", exp.model)));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let mut lambdas = exp.spec.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    let rows = pool.install(|| conjecture_scan(&exp.model, &lambdas, &exp.radii, exp.resolution))?;
    Ok(ScanReport {
        name: exp.spec.name.clone(),
        model: exp.model.to_string(),
        scalar_curvature: s,
        radii: exp.radii.clone(),
        rows,
    })
}

/// Writes `<name>_conjecture.csv` (one line per sample) and `<name>_conjecture.json`.
pub fn write_scan(report: &ScanReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{}_conjecture.csv", report.name));
    let json_path = dir.join(format!("{}_conjecture.json", report.name));
    let mut w = csv::Writer::from_path(&csv_path)?;
    w.write_record(["lambda", "r", "method", "deficit", "deficit_over_r2", "deficit_over_r4", "error_estimate"])?;
    for row in &report.rows {
        for (s, quartic) in row.samples.iter().zip(&row.quartic_ratios) {
            w.write_record([
                fmt12(row.lambda),
                fmt12(s.r),
                s.method.as_str().to_string(),
                fmt12(s.deficit),
                fmt12(s.q()),
                fmt12(*quartic),
                fmt12(s.error_estimate),
            ])?;
        }
    }
    w.flush()?;
    fs::write(&json_path, serde_json::to_string_pretty(report)?)?;
    Ok(vec![csv_path, json_path])
}

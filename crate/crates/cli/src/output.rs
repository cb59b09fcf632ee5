//! CSV, JSON, plot and field files.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::config::{Experiment, FieldFormat, Method};
use crate::error::CliError;
use crate::run::{ResultRow, RunOutcome};

pub const CSV_HEADER: [&str; 14] = [
    "model",
    "n",
    "lambda",
    "r",
    "method",
    "capacity",
    "c_n",
    "deficit",
    "predicted_capacity",
    "predicted_deficit_coeff",
    "S_true",
    "S_hat",
    "error_estimate",
    "runtime_ms",
];

/// Rounds to 12 significant digits and prints the shortest string that reads back to the rounded value.
pub fn fmt12(x: f64) -> String {
    if !x.is_finite() {
        return format!("{x}");
    }
    let rounded: f64 = format!("{x:.11e}").parse().expect("formatted float parses");
    format!("{:?}", rounded + 0.0)
}

fn record(row: &ResultRow) -> [String; 14] {
    [
        row.model.clone(),
        row.n.to_string(),
        fmt12(row.lambda),
        fmt12(row.r),
        row.method.to_string(),
        fmt12(row.capacity),
        fmt12(row.c_n),
        fmt12(row.deficit),
        fmt12(row.predicted_capacity),
        fmt12(row.predicted_deficit_coeff),
        fmt12(row.s_true),
        row.s_hat.map(fmt12).unwrap_or_default(),
        fmt12(row.error_estimate),
        fmt12(row.runtime_ms),
    ]
}

pub fn write_csv(path: &Path, rows: &[ResultRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(CSV_HEADER)?;
    for row in rows {
        w.write_record(record(row))?;
    }
    w.flush()?;
    Ok(())
}

fn plot_name(exp: &Experiment, lambda: f64, method: Method) -> String {
    format!("{}_{}_lambda{}.dat", exp.spec.name, method, fmt12(lambda))
}

/// One two-column file per `(λ, method)`: `r` against `deficit / r²`.
pub fn write_plots(dir: &Path, exp: &Experiment, rows: &[ResultRow]) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    let mut keys: Vec<(f64, Method)> = rows.iter().map(|r| (r.lambda, r.method)).collect();
    keys.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keys.dedup();
    for (lambda, method) in keys {
        let group: Vec<&ResultRow> = rows.iter().filter(|r| r.lambda == lambda && r.method == method).collect();
        let path = dir.join(plot_name(exp, lambda, method));
        let mut f = fs::File::create(&path)?;
        writeln!(f, "# {} lambda={} method={}", exp.model, fmt12(lambda), method)?;
        writeln!(f, "# predicted_kappa={}", fmt12(group[0].predicted_deficit_coeff))?;
        writeln!(f, "# r deficit/r^2")?;
        for row in group {
            writeln!(f, "{} {}", fmt12(row.r), fmt12(row.deficit / (row.r * row.r)))?;
        }
        written.push(path);
    }
    Ok(written)
}

/// Writes every artifact of a finished run into `dir`.
pub fn write_outcome(exp: &Experiment, outcome: &RunOutcome, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir)?;
    let file = |p: PathBuf| dir.join(p.file_name().expect("output paths name a file"));
    let csv_path = file(exp.csv_path());
    let json_path = file(exp.json_path());
    write_csv(&csv_path, &outcome.report.rows)?;
    fs::write(&json_path, serde_json::to_string_pretty(&outcome.report)?)?;
    let mut written = vec![csv_path, json_path];
    if exp.spec.outputs.plots {
        written.extend(write_plots(dir, exp, &outcome.report.rows)?);
    }
    if let Some(format) = exp.spec.outputs.field_dumps {
        for (lambda, r, field) in &outcome.fields {
            let stem = format!("{}_field_lambda{}_r{}", exp.spec.name, fmt12(*lambda), fmt12(*r));
            let path = match format {
                FieldFormat::Csv => dir.join(format!("{stem}.csv")),
                FieldFormat::Binary => dir.join(format!("{stem}.bin")),
            };
            match format {
                FieldFormat::Csv => field.write_csv(&path)?,
                FieldFormat::Binary => field.write_binary(&path)?,
            }
            written.push(path);
        }
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(fmt12(2.0), "2.0");
        assert_eq!(fmt12(0.1), "0.1");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2.0 / 3.0), "0.666666666667");
        assert_eq!(fmt12(123456.78901234567), "123456.789012");
        assert_eq!(fmt12(1.2345678901234e-14), "1.23456789012e-14");
        assert_eq!(fmt12(0.0), "0.0");
        assert_eq!(fmt12(-6.0), "-6.0");
        assert_eq!(fmt12(-0.0), "0.0");
    }

    #[test]
    fn twelve_digits_round_trip() {
        for x in [std::f64::consts::PI, 1e-300, 6.02214076e23, -0.00123456789012345] {
            let y: f64 = fmt12(x).parse().unwrap();
            assert!(((y - x) / x).abs() <= 5e-12);
            assert_eq!(fmt12(y), fmt12(x));
        }
    }
}

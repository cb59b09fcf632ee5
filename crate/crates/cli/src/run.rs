//! Sweeps over `(λ, r, method)` for one model.

use std::path::PathBuf;
use std::time::Instant;

use geocap_core::{
    fit_deficit_coefficient, nonnegativity_detector, predicted_capacity, symmetric_capacity, szego_upper_bound,
    variational_capacity, CapacityMethod, CapacityQuery, CapacityResult, DeficitSample, FitResult, HarmonicField,
    Resolution, SignCall,
};
use geocap_core::metric::ModelDiagnostics;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{Experiment, Method, ModelSpec, VALIDATION_SAMPLES};
use crate::error::CliError;

/// Largest relative error allowed on a quadrature row.
pub const QUADRATURE_ERROR_BOUND: f64 = 1e-10;
/// Relative agreement of the level-set bound with quadrature on symmetric models.
pub const SYMMETRIC_BOUND_EQUALITY: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub level: Option<u32>,
    pub timings: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { workers: 1, out: None, level: None, timings: false }
    }
}

/// One CSV record.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResultRow {
    pub model: String,
    pub n: usize,
    pub lambda: f64,
    pub r: f64,
    pub method: Method,
    pub capacity: f64,
    pub c_n: f64,
    pub deficit: f64,
    pub predicted_capacity: f64,
    pub predicted_deficit_coeff: f64,
    #[serde(rename = "S_true")]
    pub s_true: f64,
    #[serde(rename = "S_hat")]
    pub s_hat: Option<f64>,
    pub error_estimate: f64,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub lambda: f64,
    pub method: Method,
    pub predicted_kappa: f64,
    pub fit: Option<FitResult>,
    pub sign: Option<SignCall>,
    /// Why no fit was made.
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct InvariantCheck {
    pub name: &'static str,
    pub passed: bool,
    /// Worst value seen; for orderings, the worst signed slack.
    pub measured: f64,
    pub tolerance: f64,
    pub checked: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct TaskTiming {
    pub lambda: f64,
    pub r: f64,
    pub method: Method,
    pub runtime_ms: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Timings {
    pub total_ms: f64,
    pub tasks: Vec<TaskTiming>,
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub name: String,
    pub model: String,
    pub model_spec: ModelSpec,
    pub dim: usize,
    pub scalar_curvature: f64,
    pub validity_radius: f64,
    pub diagnostics: ModelDiagnostics,
    pub resolution: Resolution,
    pub workers: usize,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
    pub fits: Vec<FitReport>,
    pub invariant_checks: Vec<InvariantCheck>,
    pub timings: Timings,
}

/// Everything a run produces, before anything touches the disk.
#[derive(Debug)]
pub struct RunOutcome {
    pub report: Report,
    pub fields: Vec<(f64, f64, HarmonicField)>,
}

struct TaskOutput {
    row: ResultRow,
    result: Option<CapacityResult>,
    bound: Option<CapacityResult>,
    field: Option<HarmonicField>,
    runtime_ms: f64,
}

fn run_task(exp: &Experiment, lambda: f64, r: f64, method: Method, keep_field: bool) -> Result<TaskOutput, CliError> {
    let start = Instant::now();
    let model = &exp.model;
    let n = model.dim();
    let s = model.scalar_curvature();
    let query = CapacityQuery::new(model, r, lambda)?;
    let prediction = predicted_capacity(n, lambda, r, s)?;
    let mut field = None;
    let result = match method {
        Method::Quadrature => Some(symmetric_capacity(&query)?),
        Method::Variational => {
            let sol = variational_capacity(&query, exp.resolution)?;
            if keep_field {
                field = Some(sol.fine.field);
            }
            Some(sol.result)
        }
        Method::Series => None,
    };
    let bound = match result {
        Some(_) => Some(szego_upper_bound(&query)?),
        None => None,
    };
    let (capacity, deficit, error_estimate) = match &result {
        Some(res) => (res.value, res.deficit, res.error_estimate),
        None => (prediction.predicted_capacity, prediction.deficit_coefficient * r * r, 0.0),
    };
    let runtime_ms = start.elapsed().as_secs_f64() * 1e3;
    let row = ResultRow {
        model: model.to_string(),
        n,
        lambda,
        r,
        method,
        capacity,
        c_n: query.euclidean_reference(),
        deficit,
        predicted_capacity: prediction.predicted_capacity,
        predicted_deficit_coeff: prediction.deficit_coefficient,
        s_true: s,
        s_hat: None,
        error_estimate,
        runtime_ms: 0.0,
    };
    Ok(TaskOutput { row, result, bound, field, runtime_ms })
}

fn sort_rows<T>(items: &mut [T], key: impl Fn(&T) -> &ResultRow) {
    items.sort_by(|a, b| {
        let (a, b) = (key(a), key(b));
        a.model
            .cmp(&b.model)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(b.r.total_cmp(&a.r))
            .then(a.method.cmp(&b.method))
    });
}

fn fit_group(exp: &Experiment, lambda: f64, method: Method, outputs: &[TaskOutput]) -> FitReport {
    let n = exp.model.dim();
    let predicted_kappa = geocap_core::deficit_coefficient(n, lambda, exp.model.scalar_curvature()).unwrap_or(f64::NAN);
    let samples: Vec<DeficitSample> = outputs
        .iter()
        .filter(|o| o.row.lambda == lambda && o.row.method == method)
        .filter_map(|o| o.result.as_ref().map(|res| DeficitSample::from_result(o.row.r, res)))
        .collect();
    match fit_deficit_coefficient(n, lambda, &samples) {
        Ok(fit) => {
            let sign = nonnegativity_detector(&fit);
            FitReport { lambda, method, predicted_kappa, fit: Some(fit), sign: Some(sign), skipped: None }
        }
        Err(e) => FitReport { lambda, method, predicted_kappa, fit: None, sign: None, skipped: Some(e.to_string()) },
    }
}

fn check(name: &'static str, tolerance: f64, values: impl Iterator<Item = f64>, pass: impl Fn(f64) -> bool, worst_is_max: bool) -> InvariantCheck {
    let values: Vec<f64> = values.collect();
    let measured = if values.is_empty() {
        0.0
    } else if worst_is_max {
        values.iter().cloned().fold(f64::MIN, f64::max)
    } else {
        values.iter().cloned().fold(f64::MAX, f64::min)
    };
    InvariantCheck { name, passed: values.iter().all(|v| pass(*v)), measured, tolerance, checked: values.len() }
}

fn invariant_checks(exp: &Experiment, outputs: &[TaskOutput]) -> Vec<InvariantCheck> {
    let computed: Vec<(&ResultRow, &CapacityResult, &CapacityResult)> = outputs
        .iter()
        .filter_map(|o| Some((&o.row, o.result.as_ref()?, o.bound.as_ref()?)))
        .collect();
    let mut checks = vec![
        check(
            "finite_fields",
            0.0,
            outputs.iter().map(|o| {
                let r = &o.row;
                let all = [r.capacity, r.c_n, r.deficit, r.predicted_capacity, r.predicted_deficit_coeff, r.error_estimate];
                if all.iter().all(|v| v.is_finite()) { 0.0 } else { 1.0 }
            }),
            |v| v == 0.0,
            true,
        ),
        check(
            "quadrature_error_bound",
            QUADRATURE_ERROR_BOUND,
            computed.iter().filter(|(row, ..)| row.method == Method::Quadrature).map(|(_, res, _)| res.error_estimate / res.value),
            |v| v <= QUADRATURE_ERROR_BOUND,
            true,
        ),
        check(
            "level_set_bound_ordering",
            0.0,
            computed.iter().map(|(_, res, bound)| (bound.value - (res.value - res.error_estimate)) / res.value),
            |v| v >= 0.0,
            false,
        ),
    ];
    if exp.model.is_rotationally_symmetric() {
        checks.push(check(
            "level_set_bound_equality",
            SYMMETRIC_BOUND_EQUALITY,
            computed
                .iter()
                .filter(|(_, res, _)| res.method == CapacityMethod::SymmetricQuadrature)
                .map(|(_, res, bound)| ((bound.value - res.value) / res.value).abs()),
            |v| v <= SYMMETRIC_BOUND_EQUALITY,
            true,
        ));
    }
    let quad: Vec<&ResultRow> = computed.iter().filter(|(row, ..)| row.method == Method::Quadrature).map(|(row, ..)| *row).collect();
    let mut lambda_slack = Vec::new();
    let mut radius_slack = Vec::new();
    for a in &quad {
        for b in &quad {
            if a.r == b.r && a.lambda < b.lambda {
                lambda_slack.push((a.capacity - b.capacity) / a.capacity);
            }
            if a.lambda == b.lambda && a.r > b.r {
                radius_slack.push((a.capacity - b.capacity) / a.capacity);
            }
        }
    }
    checks.push(check("decreasing_in_lambda", 0.0, lambda_slack.into_iter(), |v| v > 0.0, false));
    checks.push(check("increasing_in_radius", 0.0, radius_slack.into_iter(), |v| v > 0.0, false));
    checks
}

/// Runs every task of `exp` on `workers` threads. Nothing is written.
pub fn execute(exp: &Experiment, workers: usize, timings: bool) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let keep_fields = exp.spec.outputs.field_dumps.is_some();
    let mut tasks = Vec::new();
    for &lambda in &exp.spec.lambdas {
        for &r in &exp.radii {
            for &method in &exp.spec.methods {
                tasks.push((lambda, r, method));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Io(format!("cannot start worker pool: {e}")))?;
    let mut outputs: Vec<TaskOutput> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(lambda, r, method)| run_task(exp, lambda, r, method, keep_fields && method == Method::Variational))
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    sort_rows(&mut outputs, |o| &o.row);

    let mut fits = Vec::new();
    let mut lambdas = exp.spec.lambdas.clone();
    lambdas.sort_by(f64::total_cmp);
    for &lambda in &lambdas {
        for &method in exp.spec.methods.iter().filter(|m| **m != Method::Series) {
            fits.push(fit_group(exp, lambda, method, &outputs));
        }
    }
    for out in outputs.iter_mut() {
        let fit = fits.iter().find(|f| f.lambda == out.row.lambda && f.method == out.row.method);
        out.row.s_hat = fit.and_then(|f| f.fit.as_ref()).map(|f| f.s_hat);
        if timings {
            out.row.runtime_ms = out.runtime_ms;
        }
    }
    let invariant_checks = invariant_checks(exp, &outputs);
    let task_timings = outputs
        .iter()
        .map(|o| TaskTiming { lambda: o.row.lambda, r: o.row.r, method: o.row.method, runtime_ms: o.runtime_ms })
        .collect();
    let mut fields = Vec::new();
    let mut rows = Vec::with_capacity(outputs.len());
    for out in outputs {
        if let Some(field) = out.field {
            fields.push((out.row.lambda, out.row.r, field));
        }
        rows.push(out.row);
    }
    let report = Report {
        name: exp.spec.name.clone(),
        model: exp.model.to_string(),
        model_spec: exp.spec.model.clone(),
        dim: exp.model.dim(),
        scalar_curvature: exp.model.scalar_curvature(),
        validity_radius: exp.model.validity_radius(),
        diagnostics: exp.model.validate_with_seed(exp.spec.seed, VALIDATION_SAMPLES),
        resolution: exp.resolution,
        workers,
        seed: exp.spec.seed,
        rows,
        fits,
        invariant_checks,
        timings: Timings { total_ms: start.elapsed().as_secs_f64() * 1e3, tasks: task_timings },
    };
    Ok(RunOutcome { report, fields })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse;

    fn sphere(methods: &str) -> Experiment {
        parse(&format!(
            r#"
            name = "s3"
            lambdas = [2.0, 1.5]
            methods = {methods}
            [model]
            family = "space_form"
            dim = 3
            curvature = 1.0
            [radii]
            start = 0.2
            levels = 4
            "#
        ))
        .unwrap()
        .validate(None)
        .unwrap()
    }

    #[test]
    fn rows_are_sorted_and_fitted() {
        let out = execute(&sphere(r#"["series", "quadrature"]"#), 2, false).unwrap();
        let rows = &out.report.rows;
        assert_eq!(rows.len(), 16);
        assert_eq!((rows[0].lambda, rows[0].r, rows[0].method), (1.5, 0.2, Method::Quadrature));
        assert_eq!((rows[1].lambda, rows[1].r, rows[1].method), (1.5, 0.2, Method::Series));
        assert_eq!(rows[15].r, 0.025);
        for row in rows {
            assert_eq!(row.runtime_ms, 0.0);
            match row.method {
                Method::Quadrature => assert!((row.s_hat.unwrap() - 6.0).abs() < 0.05),
                _ => assert!(row.s_hat.is_none()),
            }
        }
        assert_eq!(out.report.fits.len(), 2);
        assert!(out.report.invariant_checks.iter().all(|c| c.passed), "{:?}", out.report.invariant_checks);
    }

    #[test]
    fn series_rows_carry_the_prediction() {
        let out = execute(&sphere(r#"["series"]"#), 1, true).unwrap();
        for row in &out.report.rows {
            assert_eq!(row.capacity, row.predicted_capacity);
            assert!((row.deficit - row.predicted_deficit_coeff * row.r * row.r).abs() < 1e-15);
            assert!(row.runtime_ms >= 0.0);
        }
    }
}

//! Acceptance criteria, runnable as the `fast` and `full` suites.

use std::fmt;
use std::time::Instant;

use geocap_core::capacity::{solve_level, SolverSettings};
use geocap_core::expansion::branch_for;
use geocap_core::metric::{scalar_flat_tensor, sphere_cross_line_tensor};
use geocap_core::{
    deficit_coefficient, druet_margin, euclidean_relative_capacity, fit_deficit_coefficient, harmonic_probe,
    nonnegativity_detector, symmetric_capacity, szego_upper_bound, unified_deficit, variational_capacity,
    CapacityQuery, CapacityResult, DeficitSample, FitResult, MetricModel, Resolution, SignCall, Warp,
};
use rayon::prelude::*;

use crate::error::CliError;

pub const BRANCH_UNIFIED_TOL: f64 = 1e-12;
pub const S3_KAPPA_REL_TOL: f64 = 1e-3;
pub const SCALAR_ABS_TOL: f64 = 1e-2;
pub const HIGHER_DIM_REL_TOL: f64 = 1e-2;
pub const FLAT_VARIATIONAL_REL_TOL: f64 = 1e-2;
pub const ASYMMETRIC_REL_TOL: f64 = 0.25;
pub const SCALAR_FLAT_FRACTION: f64 = 0.25;
pub const SYMMETRIC_BOUND_TOL: f64 = 1e-10;
pub const DRUET_EPSILON: f64 = 0.1;
pub const SPACE_FORM_DRUET_RADIUS: f64 = 0.3;
pub const SXR_DRUET_RADIUS: f64 = 0.2;
pub const VALUE_SLOPE: (f64, f64) = (1.8, 2.2);
pub const GRADIENT_SLOPE: (f64, f64) = (0.8, 1.2);
pub const SCALING_TOL: f64 = 1e-10;
/// Closed-form capacities on space forms are matched to this relative error.
pub const ORACLE_TOL: f64 = 1e-12;

/// Wall-clock budgets in seconds.
pub const BUDGET_FAST_CHECK: f64 = 1.0;
pub const BUDGET_HIGHER_DIM: f64 = 10.0;
pub const BUDGET_FLAT_VARIATIONAL: f64 = 300.0;
pub const BUDGET_ASYMMETRIC: f64 = 1800.0;
pub const BUDGET_DRUET: f64 = 10.0;
pub const BUDGET_PROBE: f64 = 5.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, CliError> {
        match s {
            "fast" => Ok(Suite::Fast),
            "full" => Ok(Suite::Full),
            other => Err(CliError::Validation(format!("unknown suite {other:?}, expected fast or full"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub tolerance: String,
    pub seconds: f64,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {:>2} {}: {} (tolerance {}) in {:.2} s",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.seconds
        )
    }
}

/// A computed capacity kept for the bound-ordering check.
#[derive(Debug, Clone)]
pub struct Computed {
    pub model: MetricModel,
    pub r: f64,
    pub lambda: f64,
    pub result: CapacityResult,
}

struct Timer(Instant);

impl Timer {
    fn start() -> Self {
        Timer(Instant::now())
    }

    fn seconds(&self) -> f64 {
        self.0.elapsed().as_secs_f64()
    }
}

fn outcome(id: u8, name: &'static str, passed: bool, measured: String, tolerance: String, timer: &Timer) -> Outcome {
    Outcome { id, name, passed, measured, tolerance, seconds: timer.seconds() }
}

fn failed(id: u8, name: &'static str, err: impl fmt::Display, timer: &Timer) -> Outcome {
    outcome(id, name, false, format!("error: {err}"), "n/a".into(), timer)
}

fn rel(a: f64, b: f64) -> f64 {
    if a == b {
        0.0
    } else {
        ((a - b) / b).abs()
    }
}

fn dyadic(r0: f64, count: i32) -> Vec<f64> {
    (0..count).map(|k| r0 * 0.5f64.powi(k)).collect()
}

/// Least-squares slope of `log y` against `log x`.
pub fn log_log_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / lx.len() as f64;
    let my = ly.iter().sum::<f64>() / ly.len() as f64;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    num / den
}

pub fn branch_unified_identity() -> Outcome {
    let t = Timer::start();
    let name = "branch and unified deficits agree";
    let mut worst = 0.0f64;
    for n in 3..=8 {
        for lambda in [1.1, 2.0, 10.0] {
            for r in [1e-3, 1e-1] {
                for s in [-6.0, 0.0, 7.3] {
                    let (branch, unified) = match (deficit_coefficient(n, lambda, s), unified_deficit(n, lambda, r, s)) {
                        (Ok(k), Ok(u)) => (k * r * r, u),
                        (Err(e), _) | (_, Err(e)) => return failed(1, name, e, &t),
                    };
                    worst = worst.max(rel(unified, branch));
                }
            }
        }
    }
    let budget = t.seconds() < BUDGET_FAST_CHECK;
    outcome(
        1,
        name,
        worst <= BRANCH_UNIFIED_TOL && budget,
        format!("max relative difference {worst:.3e} over n=3..8 ({:?} to {:?})", branch_for(3), branch_for(8)),
        format!("{BRANCH_UNIFIED_TOL:e}, < {BUDGET_FAST_CHECK} s"),
        &t,
    )
}

/// Quadrature samples, each checked against `closed_form`, and their fit.
fn space_form_fit(
    model: &MetricModel,
    lambda: f64,
    radii: &[f64],
    closed_form: Option<&dyn Fn(f64) -> f64>,
) -> geocap_core::Result<(FitResult, f64)> {
    let mut oracle = 0.0f64;
    let mut samples = Vec::new();
    for &r in radii {
        let res = symmetric_capacity(&CapacityQuery::new(model, r, lambda)?)?;
        if let Some(exact) = closed_form {
            oracle = oracle.max(rel(res.value, exact(r)));
        }
        samples.push(DeficitSample::from_result(r, &res));
    }
    Ok((fit_deficit_coefficient(model.dim(), lambda, &samples)?, oracle))
}

pub fn sphere_recovery() -> Outcome {
    let t = Timer::start();
    let name = "S3 coefficient and curvature recovery";
    let model = MetricModel::space_form(3, 1.0).expect("unit sphere");
    let lambda = 2.0;
    let exact = move |r: f64| r.sin() * (lambda * r).sin() / ((lambda - 1.0) * r).sin();
    let (fit, oracle) = match space_form_fit(&model, lambda, &dyadic(0.2, 6), Some(&exact)) {
        Ok(v) => v,
        Err(e) => return failed(2, name, e, &t),
    };
    let kappa_err = rel(fit.kappa_hat, lambda * 6.0 / 18.0);
    let s_err = (fit.s_hat - 6.0).abs();
    outcome(
        2,
        name,
        kappa_err <= S3_KAPPA_REL_TOL && s_err <= SCALAR_ABS_TOL && oracle <= ORACLE_TOL && t.seconds() < BUDGET_FAST_CHECK,
        format!("kappa_hat {:.8} (rel {kappa_err:.2e}), S_hat {:.6} (abs {s_err:.2e}), closed form rel {oracle:.1e}", fit.kappa_hat, fit.s_hat),
        format!("kappa {S3_KAPPA_REL_TOL:e} rel, S {SCALAR_ABS_TOL:e} abs, closed form {ORACLE_TOL:e}, < {BUDGET_FAST_CHECK} s"),
        &t,
    )
}

pub fn hyperbolic_mirror() -> Outcome {
    let t = Timer::start();
    let name = "H3 mirror";
    let model = MetricModel::space_form(3, -1.0).expect("hyperbolic space");
    let lambda = 2.0;
    let exact = move |r: f64| r.sinh() * (lambda * r).sinh() / ((lambda - 1.0) * r).sinh();
    let (fit, oracle) = match space_form_fit(&model, lambda, &dyadic(0.2, 6), Some(&exact)) {
        Ok(v) => v,
        Err(e) => return failed(3, name, e, &t),
    };
    let sign = nonnegativity_detector(&fit);
    let s_err = (fit.s_hat + 6.0).abs();
    outcome(
        3,
        name,
        s_err <= SCALAR_ABS_TOL && sign == SignCall::Negative && oracle <= ORACLE_TOL && t.seconds() < BUDGET_FAST_CHECK,
        format!("S_hat {:.6} (abs {s_err:.2e}), detector {}, closed form rel {oracle:.1e}", fit.s_hat, sign.as_str()),
        format!("S {SCALAR_ABS_TOL:e} abs, detector negative, < {BUDGET_FAST_CHECK} s"),
        &t,
    )
}

pub fn higher_dimensions() -> Outcome {
    let t = Timer::start();
    let name = "higher-dimensional branches";
    let mut worst = 0.0f64;
    for n in 4..=6 {
        let model = MetricModel::space_form(n, 1.0).expect("unit sphere");
        let s = (n * (n - 1)) as f64;
        for lambda in [1.5, 2.0] {
            let kappa = match deficit_coefficient(n, lambda, s) {
                Ok(k) => k,
                Err(e) => return failed(4, name, e, &t),
            };
            match space_form_fit(&model, lambda, &dyadic(0.2, 6), None) {
                Ok((fit, _)) => worst = worst.max(rel(fit.kappa_hat, kappa)),
                Err(e) => return failed(4, name, e, &t),
            }
        }
    }
    outcome(
        4,
        name,
        worst <= HIGHER_DIM_REL_TOL && t.seconds() < BUDGET_HIGHER_DIM,
        format!("max relative coefficient error {worst:.2e} over S4, S5, S6"),
        format!("{HIGHER_DIM_REL_TOL:e}, < {BUDGET_HIGHER_DIM} s"),
        &t,
    )
}

pub fn flat_variational() -> (Outcome, Vec<Computed>) {
    let t = Timer::start();
    let name = "Euclidean variational solve";
    let model = MetricModel::euclidean(3).expect("flat space");
    let query = CapacityQuery::new(&model, 1.0, 2.0).expect("valid query");
    let run = || -> geocap_core::Result<(Vec<f64>, CapacityResult)> {
        let default = Resolution::default();
        let sol = variational_capacity(&query, default)?;
        let mut levels = Vec::new();
        for level in 1..Resolution::DEFAULT_LEVEL - 1 {
            levels.push(solve_level(&query, Resolution::level(level), SolverSettings::default(), None)?.capacity);
        }
        levels.push(sol.coarse.capacity);
        levels.push(sol.fine.capacity);
        Ok((levels, sol.result))
    };
    let (levels, result) = match run() {
        Ok(v) => v,
        Err(e) => return (failed(5, name, e, &t), Vec::new()),
    };
    let err = rel(result.value, 2.0);
    let monotone = levels.windows(2).all(|w| w[1] < w[0]);
    let computed = vec![Computed { model, r: 1.0, lambda: 2.0, result }];
    let shown: Vec<String> = levels.iter().map(|v| format!("{v:.6}")).collect();
    (
        outcome(
            5,
            name,
            err <= FLAT_VARIATIONAL_REL_TOL && monotone && t.seconds() < BUDGET_FLAT_VARIATIONAL,
            format!("capacity {:.7} (rel {err:.2e}) at {}, refinement [{}]", result.value, Resolution::default(), shown.join(", ")),
            format!("{FLAT_VARIATIONAL_REL_TOL:e} rel, strictly decreasing, < {BUDGET_FLAT_VARIATIONAL} s"),
            &t,
        ),
        computed,
    )
}

pub const ASYMMETRIC_RADII: [f64; 4] = [0.3, 0.2, 0.15, 0.1];

fn variational_fit(model: &MetricModel, lambda: f64, resolution: Resolution) -> geocap_core::Result<(FitResult, Vec<Computed>)> {
    let computed = ASYMMETRIC_RADII
        .par_iter()
        .map(|&r| {
            let result = variational_capacity(&CapacityQuery::new(model, r, lambda)?, resolution)?.result;
            Ok(Computed { model: model.clone(), r, lambda, result })
        })
        .collect::<geocap_core::Result<Vec<_>>>()?;
    let samples: Vec<DeficitSample> = computed.iter().map(|c| DeficitSample::from_result(c.r, &c.result)).collect();
    Ok((fit_deficit_coefficient(model.dim(), lambda, &samples)?, computed))
}

pub fn asymmetric_positive(resolution: Resolution) -> (Outcome, Vec<Computed>) {
    let t = Timer::start();
    let name = "S2xR coefficient sign and size";
    let model = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).expect("S2xR tensor");
    let predicted = deficit_coefficient(3, 2.0, 2.0).expect("valid arguments");
    let (fit, computed) = match variational_fit(&model, 2.0, resolution) {
        Ok(v) => v,
        Err(e) => return (failed(6, name, e, &t), Vec::new()),
    };
    let sign = nonnegativity_detector(&fit);
    let err = rel(fit.kappa_hat, predicted);
    (
        outcome(
            6,
            name,
            fit.kappa_hat > 0.0 && sign == (SignCall::Nonnegative { zero_flag: false }) && err <= ASYMMETRIC_REL_TOL && t.seconds() < BUDGET_ASYMMETRIC,
            format!("kappa_hat {:.5} vs {predicted:.5} (rel {err:.3}), detector {}, at {resolution}", fit.kappa_hat, sign.as_str()),
            format!("positive, {ASYMMETRIC_REL_TOL} rel, < {BUDGET_ASYMMETRIC} s"),
            &t,
        ),
        computed,
    )
}

pub fn scalar_flat(resolution: Resolution) -> (Outcome, Vec<Computed>) {
    let t = Timer::start();
    let name = "scalar-flat consistency";
    let model = MetricModel::curvature_polynomial(scalar_flat_tensor(), None).expect("scalar-flat tensor");
    let scale = deficit_coefficient(3, 2.0, 2.0).expect("valid arguments");
    let (fit, computed) = match variational_fit(&model, 2.0, resolution) {
        Ok(v) => v,
        Err(e) => return (failed(7, name, e, &t), Vec::new()),
    };
    let limit = SCALAR_FLAT_FRACTION * scale;
    (
        outcome(
            7,
            name,
            fit.kappa_hat.abs() <= limit && t.seconds() < BUDGET_ASYMMETRIC,
            format!("|kappa_hat| {:.3e} at {resolution}", fit.kappa_hat.abs()),
            format!("{SCALAR_FLAT_FRACTION} x {scale:.5} = {limit:.5}, < {BUDGET_ASYMMETRIC} s"),
            &t,
        ),
        computed,
    )
}

fn symmetric_models() -> Vec<MetricModel> {
    vec![
        MetricModel::space_form(3, 1.0).expect("sphere"),
        MetricModel::space_form(3, -1.0).expect("hyperbolic"),
        MetricModel::space_form(3, 0.0).expect("flat"),
        MetricModel::space_form(4, 1.0).expect("sphere"),
        MetricModel::space_form(5, -1.0).expect("hyperbolic"),
        MetricModel::warped_product(3, Warp::Sin { curvature: 2.0 }).expect("sin warp"),
        MetricModel::warped_product(3, Warp::Quintic { coefficient: 0.1 }).expect("quintic warp"),
    ]
}

/// Level-set bound against quadrature on symmetric models and against every
/// entry of `computed`.
pub fn bound_ordering(computed: &[Computed]) -> Outcome {
    let t = Timer::start();
    let name = "level-set bound ordering";
    let run = || -> geocap_core::Result<(f64, f64, usize)> {
        let mut equality = 0.0f64;
        let mut slack = f64::INFINITY;
        let mut count = 0;
        for model in symmetric_models() {
            for lambda in [1.5, 2.0, 4.0] {
                for r in dyadic(0.1, 4) {
                    let q = CapacityQuery::new(&model, r, lambda)?;
                    let best = symmetric_capacity(&q)?;
                    let bound = szego_upper_bound(&q)?;
                    equality = equality.max(rel(bound.value, best.value));
                    slack = slack.min((bound.value - (best.value - best.error_estimate)) / best.value);
                    count += 1;
                }
            }
        }
        for c in computed {
            let bound = szego_upper_bound(&CapacityQuery::new(&c.model, c.r, c.lambda)?)?;
            slack = slack.min((bound.value - (c.result.value - c.result.error_estimate)) / c.result.value);
            count += 1;
        }
        Ok((equality, slack, count))
    };
    match run() {
        Ok((equality, slack, count)) => outcome(
            8,
            name,
            equality <= SYMMETRIC_BOUND_TOL && slack >= 0.0,
            format!("{count} configurations, min relative slack {slack:.3e}, symmetric max difference {equality:.2e}"),
            format!("slack >= 0, symmetric {SYMMETRIC_BOUND_TOL:e}"),
            &t,
        ),
        Err(e) => failed(8, name, e, &t),
    }
}

pub fn druet_check() -> Outcome {
    let t = Timer::start();
    let name = "Druet margin on small balls";
    let mut cases: Vec<(MetricModel, f64)> = Vec::new();
    for n in 3..=5 {
        for k in [1.0, -1.0, 0.0, 2.0] {
            cases.push((MetricModel::space_form(n, k).expect("space form"), SPACE_FORM_DRUET_RADIUS));
        }
    }
    cases.push((MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).expect("S2xR"), SXR_DRUET_RADIUS));
    let mut worst = f64::INFINITY;
    let mut count = 0;
    for (model, limit) in &cases {
        for k in 1..=30 {
            let r = limit * k as f64 / 30.0;
            match druet_margin(model, r, DRUET_EPSILON) {
                Ok(m) => worst = worst.min(m),
                Err(e) => return failed(9, name, e, &t),
            }
            count += 1;
        }
    }
    outcome(
        9,
        name,
        worst >= 0.0 && t.seconds() < BUDGET_DRUET,
        format!("min margin {worst:.3e} over {count} balls"),
        format!(">= 0 with epsilon {DRUET_EPSILON}, < {BUDGET_DRUET} s"),
        &t,
    )
}

pub const PROBE_RADII: [f64; 4] = [0.2, 0.1, 0.05, 0.025];

pub fn probe_slopes() -> Outcome {
    let t = Timer::start();
    let name = "harmonic probe decay rates";
    let model = MetricModel::space_form(3, 1.0).expect("unit sphere");
    let mut sup = Vec::new();
    let mut grad = Vec::new();
    for r in PROBE_RADII {
        match CapacityQuery::new(&model, r, 2.0).and_then(|q| harmonic_probe(&q, Resolution::default())) {
            Ok(p) => {
                sup.push(p.sup_deviation);
                grad.push(p.gradient_deviation);
            }
            Err(e) => return failed(10, name, e, &t),
        }
    }
    let s = log_log_slope(&PROBE_RADII, &sup);
    let g = log_log_slope(&PROBE_RADII, &grad);
    let inside = |v: f64, (lo, hi): (f64, f64)| (lo..=hi).contains(&v);
    outcome(
        10,
        name,
        inside(s, VALUE_SLOPE) && inside(g, GRADIENT_SLOPE) && t.seconds() < BUDGET_PROBE,
        format!("value slope {s:.4}, gradient slope {g:.4}"),
        format!("[{}, {}] and [{}, {}], < {BUDGET_PROBE} s", VALUE_SLOPE.0, VALUE_SLOPE.1, GRADIENT_SLOPE.0, GRADIENT_SLOPE.1),
        &t,
    )
}

pub fn monotonicity() -> Outcome {
    let t = Timer::start();
    let name = "monotonicity and Euclidean scaling";
    let lambdas = [1.5, 2.0, 4.0, 8.0];
    let run = || -> geocap_core::Result<(usize, f64)> {
        let mut violations = 0;
        for model in symmetric_models() {
            let r0 = 0.1f64.min(model.validity_radius() / 8.0);
            let radii = dyadic(r0, 5);
            let mut table = Vec::new();
            for &r in &radii {
                let row = lambdas
                    .iter()
                    .map(|&l| Ok(symmetric_capacity(&CapacityQuery::new(&model, r, l)?)?.value))
                    .collect::<geocap_core::Result<Vec<f64>>>()?;
                violations += row.windows(2).filter(|w| !(w[1] < w[0])).count();
                table.push(row);
            }
            for pair in table.windows(2) {
                violations += pair[0].iter().zip(&pair[1]).filter(|(big, small)| !(small < big)).count();
            }
        }
        let mut scaling = 0.0f64;
        for n in 3..=7 {
            let flat = MetricModel::euclidean(n)?;
            for &l in &lambdas {
                let unit = symmetric_capacity(&CapacityQuery::new(&flat, 1.0, l)?)?.value;
                for r in [1e-3, 0.1, 3.0, 10.0] {
                    let value = symmetric_capacity(&CapacityQuery::new(&flat, r, l)?)?.value;
                    scaling = scaling.max(rel(value, r.powi(n as i32 - 2) * unit));
                    scaling = scaling.max(rel(value, euclidean_relative_capacity(n, r, l * r)?));
                }
            }
        }
        Ok((violations, scaling))
    };
    match run() {
        Ok((violations, scaling)) => outcome(
            11,
            name,
            violations == 0 && scaling <= SCALING_TOL,
            format!("{violations} ordering violations, scaling max relative error {scaling:.2e}"),
            format!("0 violations, scaling {SCALING_TOL:e}"),
            &t,
        ),
        Err(e) => failed(11, name, e, &t),
    }
}

/// Runs a suite, printing each line as it completes.
pub fn run_suite(suite: Suite, mut report: impl FnMut(&Outcome)) -> Vec<Outcome> {
    let mut out = Vec::new();
    let mut push = |o: Outcome, out: &mut Vec<Outcome>| {
        report(&o);
        out.push(o);
    };
    push(branch_unified_identity(), &mut out);
    push(sphere_recovery(), &mut out);
    push(hyperbolic_mirror(), &mut out);
    push(higher_dimensions(), &mut out);
    let mut computed = Vec::new();
    if suite == Suite::Full {
        let resolution = Resolution::default();
        for (o, c) in [flat_variational(), asymmetric_positive(resolution), scalar_flat(resolution)] {
            push(o, &mut out);
            computed.extend(c);
        }
    }
    push(bound_ordering(&computed), &mut out);
    push(druet_check(), &mut out);
    push(probe_slopes(), &mut out);
    push(monotonicity(), &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names() {
        assert_eq!("fast".parse::<Suite>().unwrap(), Suite::Fast);
        assert_eq!("full".parse::<Suite>().unwrap(), Suite::Full);
        assert!(matches!("medium".parse::<Suite>(), Err(CliError::Validation(_))));
    }

    #[test]
    fn slope_of_power_law() {
        let xs = [1.0, 2.0, 4.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(1.5)).collect();
        assert!((log_log_slope(&xs, &ys) - 1.5).abs() < 1e-12);
    }

    #[test]
    fn outcome_line() {
        let o = Outcome { id: 3, name: "x", passed: false, measured: "1".into(), tolerance: "2".into(), seconds: 0.5 };
        assert_eq!(o.to_string(), "[FAIL]  3 x: 1 (tolerance 2) in 0.50 s");
    }
}

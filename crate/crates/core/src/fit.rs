//! Scalar curvature from capacity deficits.
//!
//! With `q(r) = deficit(r) / r²`, the coefficient `κ = lim q(r)` is estimated by
//! Richardson extrapolation assuming the next correction is `O(r²)`, and
//! cross-checked by least squares. Dividing by the unit-curvature coefficient
//! gives the scalar curvature estimate.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::capacity::{symmetric_capacity, variational_capacity, CapacityMethod, CapacityQuery, CapacityResult, Resolution};
use crate::error::{domain, Error, Result};
use crate::expansion::deficit_coefficient;
use crate::metric::MetricModel;

/// Variational samples whose error exceeds this fraction of the deficit mark a fit as low confidence.
pub const LOW_CONFIDENCE_FRACTION: f64 = 0.1;
/// Sign calls need `|κ̂|` above this multiple of the extrapolation gap.
pub const DEAD_ZONE_FACTOR: f64 = 3.0;
/// Absolute rounding floor on each deficit.
pub const DEFICIT_ROUNDING: f64 = 1e-14;
/// Largest `|S|` accepted as scalar-flat by [`conjecture_scan`].
pub const SCALAR_FLAT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeficitSample {
    pub r: f64,
    /// `1 − cap / c_n(r, λr)`.
    pub deficit: f64,
    pub method: CapacityMethod,
    /// Absolute error of the deficit.
    pub error_estimate: f64,
}

impl DeficitSample {
    pub fn from_result(r: f64, result: &CapacityResult) -> Self {
        DeficitSample {
            r,
            deficit: result.deficit,
            method: result.method,
            error_estimate: result.error_estimate / result.euclidean_reference,
        }
    }

    /// `deficit / r²`.
    pub fn q(&self) -> f64 {
        self.deficit / (self.r * self.r)
    }

    fn q_noise(&self) -> f64 {
        (self.error_estimate + DEFICIT_ROUNDING) / (self.r * self.r)
    }
}

/// Richardson value from one consecutive pair of radii.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RichardsonLevel {
    pub r_coarse: f64,
    pub r_fine: f64,
    pub value: f64,
    /// `|value − q(r_fine)|`.
    pub gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub n: usize,
    pub lambda: f64,
    pub kappa_hat: f64,
    /// `κ̂ / κ(n, λ, 1)`.
    pub s_hat: f64,
    pub unit_coefficient: f64,
    /// Two-norm of the residuals of `q = a₂ + a₄ r²`.
    pub residual_norm: f64,
    pub radii_used: Vec<f64>,
    /// One entry per consecutive pair, coarse to fine.
    pub richardson: Vec<RichardsonLevel>,
    /// `|κ̂ − q(r_min)|`.
    pub extrapolation_gap: f64,
    pub ls_a2: f64,
    pub ls_a4: f64,
    /// `|κ̂ − a₂|`.
    pub ls_gap: f64,
    /// Coefficient of `r³` in `deficit = a₂r² + a₃r³ + a₄r⁴`, when at least four samples exist.
    pub ls_cubic: Option<f64>,
    /// Propagated sample noise in `κ̂`.
    pub noise: f64,
    /// All `|q(r)|` lie within their noise.
    pub all_zero: bool,
    pub variational: bool,
    pub low_confidence: bool,
}

impl FitResult {
    /// Half-width of the band around zero where no sign is called.
    pub fn dead_zone(&self) -> f64 {
        DEAD_ZONE_FACTOR * (self.extrapolation_gap + self.noise)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "sign", rename_all = "snake_case")]
pub enum SignCall {
    Nonnegative { zero_flag: bool },
    Negative,
    Indeterminate,
}

impl SignCall {
    pub fn as_str(&self) -> &'static str {
        match self {
            SignCall::Nonnegative { zero_flag: true } => "nonnegative(zero)",
            SignCall::Nonnegative { zero_flag: false } => "nonnegative",
            SignCall::Negative => "negative",
            SignCall::Indeterminate => "indeterminate",
        }
    }
}

/// `r₀ 2^{−k}` for `k = 0..5` with `r₀ = min(0.2, validity / (2λ))`.
pub fn default_radii(model: &MetricModel, lambda: f64) -> Vec<f64> {
    let r0 = 0.2f64.min(model.validity_radius() / (2.0 * lambda));
    (0..6).map(|k| r0 * 0.5f64.powi(k)).collect()
}

fn check_radii(radii: &[f64]) -> Result<()> {
    if radii.is_empty() {
        return Err(domain("no radii given"));
    }
    if radii.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(domain("radii must be strictly decreasing"));
    }
    Ok(())
}

/// One sample per radius: exact quadrature on rotationally symmetric models,
/// the variational solver otherwise. Radii are processed concurrently.
pub fn collect_deficits(
    model: &MetricModel,
    lambda: f64,
    radii: &[f64],
    resolution: Resolution,
) -> Result<Vec<DeficitSample>> {
    check_radii(radii)?;
    let queries = radii.iter().map(|&r| CapacityQuery::new(model, r, lambda)).collect::<Result<Vec<_>>>()?;
    queries
        .par_iter()
        .map(|q| {
            let result = if model.is_rotationally_symmetric() {
                symmetric_capacity(q)?
            } else {
                variational_capacity(q, resolution)?.result
            };
            Ok(DeficitSample::from_result(q.inner_radius(), &result))
        })
        .collect()
}

fn least_squares(rows: &[(f64, Vec<f64>)]) -> Option<DVector<f64>> {
    let m = rows.len();
    let k = rows.first()?.1.len();
    if m < k {
        return None;
    }
    let a = DMatrix::from_fn(m, k, |i, j| rows[i].1[j]);
    let b = DVector::from_iterator(m, rows.iter().map(|r| r.0));
    a.svd(true, true).solve(&b, 1e-14).ok()
}

/// Extrapolates `q(r) = deficit / r²` to `r = 0`.
///
/// Needs at least three samples whose largest and smallest radii differ by a
/// factor of two or more.
pub fn fit_deficit_coefficient(n: usize, lambda: f64, samples: &[DeficitSample]) -> Result<FitResult> {
    let unit = deficit_coefficient(n, lambda, 1.0)?;
    if samples.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 samples, got {}", samples.len())));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(|a, b| b.r.total_cmp(&a.r));
    if sorted.iter().any(|s| !(s.r > 0.0) || s.error_estimate < 0.0 || !s.deficit.is_finite()) {
        return Err(domain("samples need positive radii, finite deficits and nonnegative errors"));
    }
    check_radii(&sorted.iter().map(|s| s.r).collect::<Vec<_>>())?;
    let span = sorted[0].r / sorted[sorted.len() - 1].r;
    if span < 2.0 {
        return Err(Error::Precondition(format!("radii span a factor {span:.3}, need at least 2")));
    }

    let richardson: Vec<RichardsonLevel> = sorted
        .windows(2)
        .map(|w| {
            let (c, f) = (&w[0], &w[1]);
            let (rc2, rf2) = (c.r * c.r, f.r * f.r);
            let value = (rc2 * f.q() - rf2 * c.q()) / (rc2 - rf2);
            RichardsonLevel { r_coarse: c.r, r_fine: f.r, value, gap: (value - f.q()).abs() }
        })
        .collect();
    let last = richardson.last().expect("at least two samples");
    let kappa_hat = last.value;
    let extrapolation_gap = last.gap;
    let (c, f) = (&sorted[sorted.len() - 2], &sorted[sorted.len() - 1]);
    let (rc2, rf2) = (c.r * c.r, f.r * f.r);
    let noise = (rc2 * f.q_noise() + rf2 * c.q_noise()) / (rc2 - rf2);

    let quad: Vec<(f64, Vec<f64>)> = sorted.iter().map(|s| (s.q(), vec![1.0, s.r * s.r])).collect();
    let coef = least_squares(&quad).ok_or_else(|| Error::Numerical {
        message: "least-squares fit failed".into(),
        iterations: 0,
        last_change: f64::NAN,
    })?;
    let (ls_a2, ls_a4) = (coef[0], coef[1]);
    let residual_norm = sorted
        .iter()
        .map(|s| (s.q() - ls_a2 - ls_a4 * s.r * s.r).powi(2))
        .sum::<f64>()
        .sqrt();
    let ls_cubic = if sorted.len() >= 4 {
        let cubic: Vec<(f64, Vec<f64>)> = sorted.iter().map(|s| (s.q(), vec![1.0, s.r, s.r * s.r])).collect();
        least_squares(&cubic).map(|c| c[1])
    } else {
        None
    };

    let variational = sorted.iter().any(|s| s.method == CapacityMethod::Variational);
    let low_confidence = sorted
        .iter()
        .any(|s| s.method == CapacityMethod::Variational && s.error_estimate > LOW_CONFIDENCE_FRACTION * s.deficit.abs());
    let all_zero = sorted.iter().all(|s| s.q().abs() <= s.q_noise());

    Ok(FitResult {
        n,
        lambda,
        kappa_hat,
        s_hat: kappa_hat / unit,
        unit_coefficient: unit,
        residual_norm,
        radii_used: sorted.iter().map(|s| s.r).collect(),
        richardson,
        extrapolation_gap,
        ls_a2,
        ls_a4,
        ls_gap: (kappa_hat - ls_a2).abs(),
        ls_cubic,
        noise,
        all_zero,
        variational,
        low_confidence,
    })
}

/// Sign of the fitted coefficient with a dead zone around zero.
///
/// Variational capacities lie above the true ones, which biases `κ̂` down. On
/// such data a positive value only has to clear the extrapolation gap, while
/// a negative one must clear twice the full dead zone.
pub fn nonnegativity_detector(fit: &FitResult) -> SignCall {
    if fit.all_zero {
        return SignCall::Nonnegative { zero_flag: true };
    }
    let zone = fit.dead_zone();
    let (positive_zone, negative_zone) = if fit.variational {
        (DEAD_ZONE_FACTOR * fit.extrapolation_gap, 2.0 * zone)
    } else {
        (zone, zone)
    };
    if fit.kappa_hat > positive_zone {
        SignCall::Nonnegative { zero_flag: false }
    } else if fit.kappa_hat < -negative_zone {
        SignCall::Negative
    } else {
        SignCall::Indeterminate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjectureRow {
    pub lambda: f64,
    pub samples: Vec<DeficitSample>,
    /// `deficit / r⁴` at each radius.
    pub quartic_ratios: Vec<f64>,
    /// `a₄` from `deficit = a₂r² + a₄r⁴`.
    pub r4_coefficient: f64,
    pub fit: FitResult,
    pub sign: SignCall,
}

/// Per-λ residual coefficients for a model with vanishing scalar curvature at
/// the base point. Exploratory output only.
pub fn conjecture_scan(
    model: &MetricModel,
    lambdas: &[f64],
    radii: &[f64],
    resolution: Resolution,
) -> Result<Vec<ConjectureRow>> {
    let s = model.scalar_curvature();
    if s.abs() > SCALAR_FLAT_TOLERANCE {
        return Err(Error::Precondition(format!("scalar curvature at the base point is {s}, expected 0")));
    }
    lambdas
        .iter()
        .map(|&lambda| {
            let samples = collect_deficits(model, lambda, radii, resolution)?;
            let fit = fit_deficit_coefficient(model.dim(), lambda, &samples)?;
            let sign = nonnegativity_detector(&fit);
            Ok(ConjectureRow {
                lambda,
                quartic_ratios: samples.iter().map(|s| s.deficit / s.r.powi(4)).collect(),
                r4_coefficient: fit.ls_a4,
                samples,
                fit,
                sign,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space_form_fit(k: f64) -> FitResult {
        let m = MetricModel::space_form(3, k).unwrap();
        let radii = default_radii(&m, 2.0);
        let samples = collect_deficits(&m, 2.0, &radii, Resolution::default()).unwrap();
        fit_deficit_coefficient(3, 2.0, &samples).unwrap()
    }

    #[test]
    fn sphere_recovers_curvature() {
        let fit = space_form_fit(1.0);
        assert!((fit.kappa_hat / (2.0 / 3.0) - 1.0).abs() < 1e-3);
        assert!((fit.s_hat - 6.0).abs() < 1e-2);
        assert!((fit.kappa_hat - fit.ls_a2).abs() <= 5.0 * fit.extrapolation_gap);
        assert_eq!(nonnegativity_detector(&fit), SignCall::Nonnegative { zero_flag: false });
    }

    #[test]
    fn hyperbolic_is_negative() {
        let fit = space_form_fit(-1.0);
        assert!((fit.s_hat + 6.0).abs() < 1e-2);
        assert_eq!(nonnegativity_detector(&fit), SignCall::Negative);
    }

    #[test]
    fn flat_is_nonnegative_with_zero_flag() {
        let fit = space_form_fit(0.0);
        assert!(fit.kappa_hat.abs() < 1e-9);
        assert_eq!(nonnegativity_detector(&fit), SignCall::Nonnegative { zero_flag: true });
    }

    #[test]
    fn gap_shrinks_with_radius() {
        let fit = space_form_fit(1.0);
        for w in fit.richardson.windows(2) {
            assert!(w[0].gap / w[1].gap >= 3.5, "{:?}", w);
        }
    }

    #[test]
    fn preconditions() {
        let s = |r: f64| DeficitSample { r, deficit: r * r, method: CapacityMethod::SymmetricQuadrature, error_estimate: 0.0 };
        assert!(fit_deficit_coefficient(3, 2.0, &[s(0.2), s(0.1)]).is_err());
        assert!(fit_deficit_coefficient(3, 2.0, &[s(0.2), s(0.18), s(0.15)]).is_err());
        assert!(fit_deficit_coefficient(3, 2.0, &[s(0.2), s(0.15), s(0.1)]).is_ok());
        let m = MetricModel::space_form(3, 1.0).unwrap();
        assert!(collect_deficits(&m, 2.0, &[0.1, 0.2], Resolution::default()).is_err());
    }

    #[test]
    fn scan_rejects_curved_base_point() {
        let m = MetricModel::space_form(3, 1.0).unwrap();
        let err = conjecture_scan(&m, &[2.0], &[0.2, 0.1, 0.05], Resolution::level(1)).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }
}

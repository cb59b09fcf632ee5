//! Relative capacity of concentric geodesic balls.
//!
//! The capacity of `B(p, r)` relative to `B(p, λr)` is the infimum of
//! `1/((n−2) ω_{n−1}) ∫ |∇φ|² dV` over Lipschitz `φ` vanishing on the inner
//! ball and equal to one outside the outer ball. Three routes are provided:
//!
//! * closed forms for Euclidean space ([`euclidean_relative_capacity`]);
//! * the level-set bound `[(n−2) ω_{n−1} ∫_r^{λr} dt / A(t)]⁻¹`, which is exact
//!   for rotationally symmetric models ([`symmetric_capacity`]) and an upper
//!   bound otherwise ([`szego_upper_bound`]);
//! * direct minimization of the discrete Dirichlet energy on a spherical shell
//!   grid ([`variational_capacity`]), for models without symmetry.

mod grid;
mod probe;
mod variational;

use serde::Serialize;

pub use grid::{Resolution, ShellGrid};
pub use probe::{field_probe, harmonic_probe, radial_probe, HarmonicProbeResult, RADIAL_PROBE_SAMPLES};
pub use variational::{
    solve_level, variational_capacity, variational_capacity_with, HarmonicField, LevelSolution, SolverSettings, VariationalSolution,
};

use crate::error::{domain, Error, Result};
use crate::geometry::{unit_sphere_area, AreaFunction, RADIAL_ABS_TOL, RADIAL_REL_TOL};
use crate::metric::MetricModel;
use crate::quadrature::integrate;

/// Euclidean relative capacity of concentric balls of radii `r1 < r2`.
///
/// For `n ≥ 3` this is `1/(r1^{2−n} − r2^{2−n})` and `r2 = ∞` gives the
/// absolute capacity `r1^{n−2}`. For `n = 2` it is `1/log(r2/r1)` and for
/// `n = 1` it is `1/(r2 − r1)`.
pub fn euclidean_relative_capacity(n: usize, r1: f64, r2: f64) -> Result<f64> {
    if n == 0 {
        return Err(domain("dimension must be positive"));
    }
    if !(r1 > 0.0 && r1 < r2) {
        return Err(domain(format!("need 0 < R1 < R2, got R1={r1}, R2={r2}")));
    }
    if r2.is_infinite() && n <= 2 {
        return Err(domain(format!("capacity relative to infinity is undefined in dimension {n}")));
    }
    Ok(match n {
        1 => 1.0 / (r2 - r1),
        2 => 1.0 / (r2 / r1).ln(),
        _ => {
            let e = 2 - n as i32;
            if r2.is_infinite() {
                1.0 / r1.powi(e)
            } else {
                1.0 / (r1.powi(e) - r2.powi(e))
            }
        }
    })
}

/// The pair of balls `B(p, r) ⊂ B(p, λr)` in a model.
#[derive(Debug, Clone, Copy)]
pub struct CapacityQuery<'a> {
    model: &'a MetricModel,
    inner_radius: f64,
    ratio: f64,
}

impl<'a> CapacityQuery<'a> {
    pub fn new(model: &'a MetricModel, inner_radius: f64, ratio: f64) -> Result<Self> {
        if !(inner_radius > 0.0 && inner_radius.is_finite()) {
            return Err(domain(format!("inner radius must be positive, got {inner_radius}")));
        }
        if !(ratio > 1.0 && ratio.is_finite()) {
            return Err(domain(format!("ratio must exceed 1, got {ratio}")));
        }
        if inner_radius * ratio > model.validity_radius() {
            return Err(domain(format!(
                "outer radius {} exceeds the validity radius {} of {model}",
                inner_radius * ratio,
                model.validity_radius()
            )));
        }
        Ok(CapacityQuery { model, inner_radius, ratio })
    }

    pub fn model(&self) -> &'a MetricModel {
        self.model
    }

    pub fn inner_radius(&self) -> f64 {
        self.inner_radius
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn outer_radius(&self) -> f64 {
        self.inner_radius * self.ratio
    }

    /// `c_n(r, λr)`.
    pub fn euclidean_reference(&self) -> f64 {
        euclidean_relative_capacity(self.model.dim(), self.inner_radius, self.outer_radius())
            .expect("query radii already validated")
    }

    pub(crate) fn normalization(&self) -> f64 {
        let n = self.model.dim();
        (n as f64 - 2.0) * unit_sphere_area(n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CapacityMethod {
    EuclideanClosedForm,
    SymmetricQuadrature,
    /// Level-set bound on a model without rotational symmetry.
    SzegoUpperBound,
    Variational,
}

impl CapacityMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            CapacityMethod::EuclideanClosedForm => "euclidean_closed_form",
            CapacityMethod::SymmetricQuadrature => "symmetric_quadrature",
            CapacityMethod::SzegoUpperBound => "szego_upper_bound",
            CapacityMethod::Variational => "variational",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CapacityResult {
    pub value: f64,
    pub method: CapacityMethod,
    pub error_estimate: f64,
    /// `c_n(r, λr)`.
    pub euclidean_reference: f64,
    /// `1 − value / c_n(r, λr)`.
    pub deficit: f64,
}

impl CapacityResult {
    pub(crate) fn new(query: &CapacityQuery<'_>, value: f64, method: CapacityMethod, error_estimate: f64) -> Self {
        let reference = query.euclidean_reference();
        CapacityResult {
            value,
            method,
            error_estimate,
            euclidean_reference: reference,
            deficit: 1.0 - value / reference,
        }
    }
}

/// `Euclidean` closed form at the query radii, ignoring the model metric.
pub fn euclidean_capacity(query: &CapacityQuery<'_>) -> CapacityResult {
    CapacityResult::new(query, query.euclidean_reference(), CapacityMethod::EuclideanClosedForm, 0.0)
}

fn level_set_capacity(query: &CapacityQuery<'_>) -> Result<(f64, f64)> {
    let area = AreaFunction::new(query.model, query.outer_radius())?;
    let integral = integrate(
        |t| 1.0 / area.eval(t),
        query.inner_radius,
        query.outer_radius(),
        RADIAL_ABS_TOL,
        RADIAL_REL_TOL,
    )?;
    let value = 1.0 / (query.normalization() * integral.value);
    let rel = integral.error / integral.value.abs() + area.angular_rel_error;
    Ok((value, value * rel))
}

/// Exact capacity of a rotationally symmetric model: the radial harmonic
/// function is the minimizer, so the level-set bound is attained.
pub fn symmetric_capacity(query: &CapacityQuery<'_>) -> Result<CapacityResult> {
    if !query.model.is_rotationally_symmetric() {
        return Err(Error::Unsupported(format!(
            "symmetric quadrature needs a rotationally symmetric model, got {}",
            query.model
        )));
    }
    let (value, err) = level_set_capacity(query)?;
    Ok(CapacityResult::new(query, value, CapacityMethod::SymmetricQuadrature, err))
}

/// `A(t)` from the metric induced on the geodesic sphere along one axis;
/// rotational symmetry makes the density the same in every direction.
fn induced_sphere_area(model: &MetricModel, t: f64) -> Result<f64> {
    let n = model.dim();
    let mut y = vec![0.0; n];
    y[0] = t;
    let g = model.metric_at(&y)?;
    let tangential = g.view((1, 1), (n - 1, n - 1)).clone_owned().determinant();
    if !(tangential > 0.0) {
        return Err(domain(format!("induced sphere metric degenerates at radius {t}")));
    }
    Ok(unit_sphere_area(n) * tangential.sqrt() * t.powi(n as i32 - 1))
}

fn induced_level_set_capacity(query: &CapacityQuery<'_>) -> Result<(f64, f64)> {
    let model = query.model;
    let failure = std::cell::Cell::new(None);
    let integral = integrate(
        |t| match induced_sphere_area(model, t) {
            Ok(a) => 1.0 / a,
            Err(e) => {
                failure.set(Some(e));
                f64::NAN
            }
        },
        query.inner_radius,
        query.outer_radius(),
        RADIAL_ABS_TOL,
        RADIAL_REL_TOL,
    );
    if let Some(e) = failure.take() {
        return Err(e);
    }
    let integral = integral?;
    let value = 1.0 / (query.normalization() * integral.value);
    Ok((value, value * integral.error / integral.value.abs()))
}

/// The level-set (distance-function) upper bound. On rotationally symmetric
/// models the sphere areas come from the induced metric instead of the warp
/// profile, so agreement with [`symmetric_capacity`] is a consistency check.
pub fn szego_upper_bound(query: &CapacityQuery<'_>) -> Result<CapacityResult> {
    let (value, err) = if query.model.is_rotationally_symmetric() {
        induced_level_set_capacity(query)?
    } else {
        level_set_capacity(query)?
    };
    Ok(CapacityResult::new(query, value, CapacityMethod::SzegoUpperBound, err))
}

//! Volumes and boundary areas of geodesic balls about the base point, their
//! small-radius series, and the local isoperimetric margin with scalar
//! curvature correction.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::metric::{MetricModel, ModelFamily};
use crate::quadrature::{integrate, integrate_sphere, SphereRule};

/// Absolute tolerance of every radial quadrature.
pub const RADIAL_ABS_TOL: f64 = 1e-12;
/// Relative tolerance of every radial quadrature.
pub const RADIAL_REL_TOL: f64 = 1e-13;
/// Target relative error of the angular quadrature on non-round spheres.
pub const ANGULAR_REL_TOL: f64 = 1e-12;

/// Volume `β_n` of the unit ball in `R^n`, via `β_n = (2π/n) β_{n−2}`.
pub fn unit_ball_volume(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * unit_ball_volume(n - 2),
    }
}

/// Area `ω_{n−1} = n β_n` of the unit sphere bounding the unit ball in `R^n`.
pub fn unit_sphere_area(n: usize) -> f64 {
    n as f64 * unit_ball_volume(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GeometryMethod {
    ClosedForm,
    Quadrature,
}

/// A measured quantity with its method and estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measured {
    pub value: f64,
    pub error: f64,
    pub method: GeometryMethod,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BallGeometry {
    pub radius: f64,
    pub volume: f64,
    pub area: f64,
    pub method: GeometryMethod,
    pub quadrature_error: f64,
}

fn check_radius(model: &MetricModel, r: f64) -> Result<()> {
    if !(r > 0.0 && r <= model.validity_radius()) {
        return Err(domain(format!(
            "radius {r} outside (0, {}] for {model}",
            model.validity_radius()
        )));
    }
    Ok(())
}

fn polynomial_dim_check(model: &MetricModel) -> Result<()> {
    if model.dim() != 3 {
        return Err(Error::Unsupported(format!(
            "curvature-polynomial areas and volumes are implemented in dimension 3 only, got {}",
            model.dim()
        )));
    }
    Ok(())
}

/// `ρ² √det g(ρ ω)`: area density of the coordinate sphere of radius `ρ` with
/// respect to the round measure `dω`. Uses `g e_ρ = e_ρ`, so the induced
/// determinant equals the full one.
fn polynomial_area_density(model: &MetricModel, rho: f64, omega: &[f64; 3]) -> f64 {
    let y = [rho * omega[0], rho * omega[1], rho * omega[2]];
    let mut g = [0.0; 9];
    model.fill_metric(&y, &mut g);
    rho * rho * det3(&g).sqrt()
}

pub(crate) fn det3(g: &[f64]) -> f64 {
    g[0] * (g[4] * g[8] - g[5] * g[7]) - g[1] * (g[3] * g[8] - g[5] * g[6]) + g[2] * (g[3] * g[7] - g[4] * g[6])
}

/// Area `A(r)` of the geodesic sphere of radius `r`.
pub fn sphere_area(model: &MetricModel, r: f64) -> Result<Measured> {
    check_radius(model, r)?;
    match model.family() {
        ModelFamily::CurvaturePolynomial { .. } => {
            polynomial_dim_check(model)?;
            let (res, _) = integrate_sphere(|w| polynomial_area_density(model, r, w), ANGULAR_REL_TOL)?;
            Ok(Measured { value: res.value, error: res.error, method: GeometryMethod::Quadrature })
        }
        _ => {
            let n = model.dim();
            let phi = model.radial_profile(r).expect("symmetric model");
            Ok(Measured {
                value: unit_sphere_area(n) * phi.powi(n as i32 - 1),
                error: 0.0,
                method: GeometryMethod::ClosedForm,
            })
        }
    }
}

/// An area evaluator reused across many radii, e.g. inside a radial
/// quadrature. For polynomial models the angular rule order is fixed from the
/// largest radius that will be queried.
pub(crate) struct AreaFunction<'a> {
    model: &'a MetricModel,
    rule: Option<SphereRule>,
    /// Relative angular error at the largest radius.
    pub(crate) angular_rel_error: f64,
}

impl<'a> AreaFunction<'a> {
    pub(crate) fn new(model: &'a MetricModel, max_radius: f64) -> Result<Self> {
        check_radius(model, max_radius)?;
        match model.family() {
            ModelFamily::CurvaturePolynomial { .. } => {
                polynomial_dim_check(model)?;
                let (res, order) =
                    integrate_sphere(|w| polynomial_area_density(model, max_radius, w), ANGULAR_REL_TOL)?;
                Ok(AreaFunction {
                    model,
                    rule: Some(SphereRule::new(order)),
                    angular_rel_error: res.error / res.value,
                })
            }
            _ => Ok(AreaFunction { model, rule: None, angular_rel_error: 0.0 }),
        }
    }

    pub(crate) fn eval(&self, rho: f64) -> f64 {
        match &self.rule {
            Some(rule) => rule.integrate(|w| polynomial_area_density(self.model, rho, w)),
            None => {
                let n = self.model.dim();
                unit_sphere_area(n) * self.model.radial_profile(rho).unwrap().powi(n as i32 - 1)
            }
        }
    }
}

/// Volume `V(r)` of the geodesic ball of radius `r`, by radial quadrature of
/// the sphere areas.
pub fn ball_volume(model: &MetricModel, r: f64) -> Result<Measured> {
    let area = AreaFunction::new(model, r)?;
    let res = integrate(|t| area.eval(t), 0.0, r, RADIAL_ABS_TOL, RADIAL_REL_TOL)?;
    Ok(Measured {
        value: res.value,
        error: res.error + area.angular_rel_error * res.value.abs(),
        method: GeometryMethod::Quadrature,
    })
}

pub fn ball_geometry(model: &MetricModel, r: f64) -> Result<BallGeometry> {
    let area = sphere_area(model, r)?;
    let volume = ball_volume(model, r)?;
    Ok(BallGeometry {
        radius: r,
        volume: volume.value,
        area: area.value,
        method: if model.is_rotationally_symmetric() {
            GeometryMethod::ClosedForm
        } else {
            GeometryMethod::Quadrature
        },
        quadrature_error: area.error.max(volume.error),
    })
}

/// `β_n rⁿ (1 − S r²/(6(n+2)))`.
pub fn v_series(n: usize, scalar: f64, r: f64) -> f64 {
    let nf = n as f64;
    unit_ball_volume(n) * r.powi(n as i32) * (1.0 - scalar * r * r / (6.0 * (nf + 2.0)))
}

/// `ω_{n−1} r^{n−1} (1 − S r²/(6n))`.
pub fn a_series(n: usize, scalar: f64, r: f64) -> f64 {
    let nf = n as f64;
    unit_sphere_area(n) * r.powi(n as i32 - 1) * (1.0 - scalar * r * r / (6.0 * nf))
}

/// `|∂Ω|² − [n² β_n^{2/n} |Ω|^{2(n−1)/n} − (n S/(n+2) + ε) |Ω|²]` for the
/// geodesic ball `Ω` of the given radius. Non-negative means the sharp local
/// isoperimetric inequality holds for that ball.
pub fn druet_margin(model: &MetricModel, region_radius: f64, epsilon: f64) -> Result<f64> {
    let geo = ball_geometry(model, region_radius)?;
    Ok(druet_margin_from(model.dim(), model.scalar_curvature(), geo.area, geo.volume, epsilon))
}

pub fn druet_margin_from(n: usize, scalar: f64, area: f64, volume: f64, epsilon: f64) -> f64 {
    let nf = n as f64;
    let beta = unit_ball_volume(n);
    let euclid = nf * nf * beta.powf(2.0 / nf) * volume.powf(2.0 * (nf - 1.0) / nf);
    area * area - (euclid - (nf * scalar / (nf + 2.0) + epsilon) * volume * volume)
}

/// Largest sampled radius `r*` such that the margin is non-negative at every
/// sampled radius up to `r*`, scanning `samples` geometrically spaced radii in
/// `[max_radius/1000, max_radius]`. `None` if even the smallest ball fails.
pub fn druet_threshold(model: &MetricModel, epsilon: f64, max_radius: f64, samples: usize) -> Result<Option<f64>> {
    let samples = samples.max(2);
    let lo = max_radius / 1000.0;
    let ratio = (max_radius / lo).powf(1.0 / (samples - 1) as f64);
    let mut threshold = None;
    for k in 0..samples {
        let r = lo * ratio.powi(k as i32);
        if druet_margin(model, r.min(max_radius), epsilon)? < 0.0 {
            break;
        }
        threshold = Some(r.min(max_radius));
    }
    Ok(threshold)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{sphere_cross_line_tensor, CurvatureTensor, Warp};
    use approx::assert_relative_eq;

    #[test]
    fn unit_ball_constants() {
        assert_relative_eq!(unit_ball_volume(2), PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(3), 4.0 * PI / 3.0, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(4), PI * PI / 2.0, max_relative = 1e-15);
        assert_relative_eq!(unit_sphere_area(3), 4.0 * PI, max_relative = 1e-15);
        assert_relative_eq!(unit_ball_volume(5), 8.0 * PI * PI / 15.0, max_relative = 1e-15);
    }

    #[test]
    fn euclidean_ball() {
        let m = MetricModel::euclidean(3).unwrap();
        assert_relative_eq!(sphere_area(&m, 1.0).unwrap().value, 4.0 * PI, max_relative = 1e-14);
        assert_relative_eq!(ball_volume(&m, 1.0).unwrap().value, 4.0 * PI / 3.0, max_relative = 1e-13);
    }

    #[test]
    fn round_sphere_area_and_volume() {
        let m = MetricModel::space_form(3, 1.0).unwrap();
        let r: f64 = 0.1;
        let a = sphere_area(&m, r).unwrap().value;
        assert_relative_eq!(a, 4.0 * PI * r.sin().powi(2), max_relative = 1e-14);
        assert!((a - 0.1252454).abs() < 1e-7);
        let v = ball_volume(&m, r).unwrap().value;
        let exact = 2.0 * PI * (r - r.sin() * r.cos());
        assert_relative_eq!(v, exact, max_relative = 1e-12);
        assert!((v - 4.180421e-3).abs() < 1e-9);
        // series agreement
        assert!(((a - a_series(3, 6.0, r)) / a).abs() < r.powi(4));
        assert!((v_series(3, 6.0, r) - 4.18041e-3).abs() < 1e-8);
        assert!((v - v_series(3, 6.0, r)).abs() < 4e-7);
    }

    #[test]
    fn series_examples() {
        let r: f64 = 0.1;
        assert_relative_eq!(v_series(3, 0.0, 0.7), 4.0 * PI / 3.0 * 0.343, max_relative = 1e-14);
        assert!((a_series(3, 6.0, r) - 0.125245).abs() < 1e-6);
        assert_relative_eq!(
            v_series(5, 20.0, r),
            unit_ball_volume(5) * 1e-5 * (1.0 - 0.2 / 42.0),
            max_relative = 1e-14
        );
    }

    #[test]
    fn polynomial_flat_reduces_to_euclidean() {
        let m = MetricModel::curvature_polynomial(CurvatureTensor::zero(3).unwrap(), None).unwrap();
        let a = sphere_area(&m, 0.7).unwrap();
        assert_relative_eq!(a.value, 4.0 * PI * 0.49, max_relative = 1e-10);
        assert_eq!(a.method, GeometryMethod::Quadrature);
        let v = ball_volume(&m, 0.7).unwrap();
        assert_relative_eq!(v.value, 4.0 * PI / 3.0 * 0.343, max_relative = 1e-10);
    }

    #[test]
    fn polynomial_constant_curvature_matches_series() {
        // truncated round metric: area = 4π r² (1 − r²/3)(1 − r²/3)… agrees with the series to O(r⁶)
        let m = MetricModel::curvature_polynomial(CurvatureTensor::constant_curvature(3, 1.0).unwrap(), None).unwrap();
        let r = 0.05;
        let a = sphere_area(&m, r).unwrap().value;
        // tangential eigenvalues are exactly 1 − r²/3
        assert_relative_eq!(a, 4.0 * PI * r * r * (1.0 - r * r / 3.0), max_relative = 1e-12);
    }

    #[test]
    fn polynomial_higher_dim_unsupported() {
        let m = MetricModel::curvature_polynomial(CurvatureTensor::constant_curvature(4, 1.0).unwrap(), None).unwrap();
        assert!(matches!(sphere_area(&m, 0.1), Err(Error::Unsupported(_))));
    }

    #[test]
    fn druet_examples() {
        let flat = MetricModel::euclidean(3).unwrap();
        for r in [0.01, 0.3, 2.0] {
            let m = druet_margin(&flat, r, 0.0).unwrap();
            let a = 4.0 * PI * r * r;
            assert!(m.abs() < 1e-11 * a * a, "r={r} margin={m}");
        }
        for k in [1.0, -1.0] {
            let m = MetricModel::space_form(3, k).unwrap();
            assert!(druet_margin(&m, 0.1, 0.1).unwrap() > 0.0);
        }
    }

    #[test]
    fn druet_threshold_reports_full_range_for_sphere() {
        let m = MetricModel::space_form(3, 1.0).unwrap();
        let t = druet_threshold(&m, 0.1, 0.3, 24).unwrap();
        assert_relative_eq!(t.unwrap(), 0.3, max_relative = 1e-12);
    }

    #[test]
    fn warped_area_uses_profile() {
        let m = MetricModel::warped_product(4, Warp::Quintic { coefficient: 0.5 }).unwrap();
        let r: f64 = 0.2;
        let phi = r + 0.5 * r.powi(5);
        assert_relative_eq!(sphere_area(&m, r).unwrap().value, unit_sphere_area(4) * phi.powi(3), max_relative = 1e-14);
        let sxr = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).unwrap();
        assert!(sphere_area(&sxr, 0.2).unwrap().value < 4.0 * PI * 0.04);
    }
}

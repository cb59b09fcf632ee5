//! Distance of the capacity potential from its Euclidean counterpart.
//!
//! In scaled coordinates `x = y / r` the Euclidean potential on `1 ≤ |x| ≤ λ`
//! is `φ₀(ρ) = (1 − ρ^{2−n}) / (1 − λ^{2−n})`. Gradient deviations are
//! reported in physical coordinates, against `(n−2) c_n(r, λr) |y|^{1−n}`.

use serde::Serialize;

use super::grid::spherical_to_cartesian;
use super::grid::Resolution;
use super::variational::{inverse3, solve_level, HarmonicField, SolverSettings};
use super::{euclidean_relative_capacity, CapacityQuery};
use crate::error::{Error, Result};
use crate::geometry::{det3, AreaFunction, RADIAL_ABS_TOL, RADIAL_REL_TOL};
use crate::quadrature::integrate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarmonicProbeResult {
    pub radius: f64,
    pub lambda: f64,
    /// Sup over the annulus of `|u_r − φ₀|`.
    pub sup_deviation: f64,
    /// Sup over the annulus of `| |∇u_r|_g − (n−2) c_n(r, λr) |y|^{1−n} |`.
    pub gradient_deviation: f64,
    pub samples: usize,
}

fn euclidean_potential(n: usize, lambda: f64, rho: f64) -> f64 {
    let e = 2.0 - n as f64;
    (1.0 - rho.powf(e)) / (1.0 - lambda.powf(e))
}

fn euclidean_gradient(n: usize, lambda: f64, rho: f64) -> f64 {
    let c = euclidean_relative_capacity(n, 1.0, lambda).expect("lambda > 1");
    (n as f64 - 2.0) * c * rho.powf(1.0 - n as f64)
}

/// Radial samples used for rotationally symmetric models.
pub const RADIAL_PROBE_SAMPLES: usize = 256;

/// Probe of the capacity potential. Rotationally symmetric models use the
/// exact radial potential; others solve at `resolution` and use [`field_probe`].
pub fn harmonic_probe(query: &CapacityQuery<'_>, resolution: Resolution) -> Result<HarmonicProbeResult> {
    if query.model().is_rotationally_symmetric() {
        radial_probe(query, RADIAL_PROBE_SAMPLES)
    } else {
        let sol = solve_level(query, resolution, SolverSettings::default(), None)?;
        field_probe(query, &sol.field)
    }
}

/// Probe of the exact radial potential `∫_r^ρ dt/A / ∫_r^{λr} dt/A` of a
/// rotationally symmetric model, sampled at `samples + 1` equally spaced radii.
pub fn radial_probe(query: &CapacityQuery<'_>, samples: usize) -> Result<HarmonicProbeResult> {
    let model = query.model();
    if !model.is_rotationally_symmetric() {
        return Err(Error::Unsupported(format!(
            "the radial potential probe needs a rotationally symmetric model, got {model}; use field_probe"
        )));
    }
    if samples < 2 {
        return Err(Error::Precondition("at least two probe samples are needed".into()));
    }
    let (r, lambda, n) = (query.inner_radius(), query.ratio(), model.dim());
    let area = AreaFunction::new(model, query.outer_radius())?;
    let inv = |t: f64| 1.0 / area.eval(t);
    let total = integrate(inv, r, lambda * r, RADIAL_ABS_TOL, RADIAL_REL_TOL)?.value;
    let (mut dv, mut dg) = (0.0f64, 0.0f64);
    let mut acc = 0.0;
    let mut prev = r;
    for s in 0..=samples {
        let rho = 1.0 + (lambda - 1.0) * s as f64 / samples as f64;
        let y = rho * r;
        acc += integrate(inv, prev, y, RADIAL_ABS_TOL, RADIAL_REL_TOL)?.value;
        prev = y;
        let u = acc / total;
        let grad = r * inv(y) / total;
        dv = dv.max((u - euclidean_potential(n, lambda, rho)).abs());
        dg = dg.max((grad - euclidean_gradient(n, lambda, rho)).abs());
    }
    Ok(HarmonicProbeResult { radius: r, lambda, sup_deviation: dv, gradient_deviation: dg / r, samples: samples + 1 })
}

/// Probe of a discrete potential: values at the nodes and gradients at
/// element centroids.
pub fn field_probe(query: &CapacityQuery<'_>, field: &HarmonicField) -> Result<HarmonicProbeResult> {
    let model = query.model();
    if model.dim() != 3 {
        return Err(Error::Unsupported("discrete potentials live in dimension 3".into()));
    }
    let grid = field.grid();
    let (lambda, scale) = (query.ratio(), field.scale());
    let u = field.values();
    let mut dv = 0.0f64;
    for (d, v) in u.iter().enumerate() {
        let rho = grid.radii[grid.node(d).0];
        dv = dv.max((v - euclidean_potential(3, lambda, rho)).abs());
    }
    let res = grid.resolution;
    let hp = 2.0 * std::f64::consts::PI / res.azimuthal as f64;
    let mut dg = 0.0f64;
    let mut g = [0.0; 9];
    let mut count = 0;
    for i in 0..res.radial {
        let hr = grid.radii[i + 1] - grid.radii[i];
        let rho = grid.radii[i] + 0.5 * hr;
        for j in 0..res.polar {
            let ht = grid.polar[j + 1] - grid.polar[j];
            let theta = grid.polar[j] + 0.5 * ht;
            for k in 0..res.azimuthal {
                let phi = grid.azimuth[k] + 0.5 * hp;
                let val = |di: usize, dj: usize, dk: usize| u[grid.dof(i + di, j + dj, k + dk)];
                let mut du = [0.0; 3];
                for a in 0..8 {
                    let (di, dj, dk) = (a >> 2, (a >> 1) & 1, a & 1);
                    let v = val(di, dj, dk) * 0.25;
                    du[0] += if di == 1 { v } else { -v };
                    du[1] += if dj == 1 { v } else { -v };
                    du[2] += if dk == 1 { v } else { -v };
                }
                let (st, ct) = theta.sin_cos();
                let (sp, cp) = phi.sin_cos();
                let (ur, ut, uf) = (du[0] / hr, du[1] / (ht * rho), du[2] / (hp * rho * st));
                let grad = [
                    ur * st * cp + ut * ct * cp - uf * sp,
                    ur * st * sp + ut * ct * sp + uf * cp,
                    ur * ct - ut * st,
                ];
                let x = spherical_to_cartesian(rho * scale, theta, phi);
                model.fill_metric(&x, &mut g);
                let inv = inverse3(&g, det3(&g));
                let mut norm2 = 0.0;
                for p in 0..3 {
                    for q in 0..3 {
                        norm2 += grad[p] * inv[p * 3 + q] * grad[q];
                    }
                }
                dg = dg.max((norm2.sqrt() - euclidean_gradient(3, lambda, rho)).abs());
                count += 1;
            }
        }
    }
    Ok(HarmonicProbeResult {
        radius: scale,
        lambda,
        sup_deviation: dv,
        gradient_deviation: dg / scale,
        samples: count,
    })
}

//! Pointed model Riemannian manifolds presented in geodesic normal coordinates.
//!
//! Every family is written so that the coordinate sphere `|y| = ρ` is exactly
//! the geodesic sphere of radius `ρ` about the base point:
//!
//! * space forms and warped products `dρ² + φ(ρ)² g_round` in normal
//!   coordinates, where `g_ij = ŷ_i ŷ_j + (φ(ρ)/ρ)² (δ_ij − ŷ_i ŷ_j)`;
//! * the curvature polynomial `g_ij(y) = δ_ij − ⅓ R_ikjl y^k y^l`, which
//!   satisfies `g_ij(y) y^j = y_i` identically because `R` is antisymmetric in
//!   its last pair.
//!
//! The polynomial metric is a truncation: its curvature at `y ≠ 0` differs from
//! the base-point tensor at order `|y|²`.

use std::fmt;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{domain, Error, Result};

/// Largest tolerated symmetry or Gauss-lemma violation for an accepted model.
pub const VALIDATION_TOLERANCE: f64 = 1e-12;

/// Minimum eigenvalue of `g` that defines the default validity radius of a
/// curvature-polynomial model.
pub const DEFAULT_MIN_EIGENVALUE: f64 = 0.5;

const DEFAULT_SEED: u64 = 0x5eed_ca9a;

/// A covariant 4-tensor `R_ikjl` at the base point, stored densely.
///
/// Sign convention: `R_ikik` is the sectional curvature of the `(e_i, e_k)`
/// plane, so the round unit sphere has `R_ikjl = δ_ij δ_kl − δ_il δ_kj`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureTensor {
    dim: usize,
    comps: Vec<f64>,
}

/// A single tensor component `(i, k, j, l, value)`, zero-based.
pub type Generator = (usize, usize, usize, usize, f64);

impl CurvatureTensor {
    pub fn zero(dim: usize) -> Result<Self> {
        if dim < 3 {
            return Err(domain(format!("dimension must be at least 3, got {dim}")));
        }
        Ok(CurvatureTensor { dim, comps: vec![0.0; dim.pow(4)] })
    }

    /// Builds the tensor spanned by `generators` and all of their images under
    /// `R_ikjl = −R_kijl = −R_iklj = R_jlik`.
    ///
    /// Fails if two generators assign incompatible values to the same slot.
    /// The first Bianchi identity is *not* imposed; [`MetricModel::validate`]
    /// reports it.
    pub fn from_generators(dim: usize, generators: &[Generator]) -> Result<Self> {
        let mut t = Self::zero(dim)?;
        let mut set = vec![false; t.comps.len()];
        for &(i, k, j, l, v) in generators {
            if [i, k, j, l].iter().any(|&x| x >= dim) {
                return Err(domain(format!("index ({i},{k},{j},{l}) out of range for dimension {dim}")));
            }
            if !v.is_finite() {
                return Err(domain("tensor components must be finite"));
            }
            if (i == k || j == l) && v != 0.0 {
                return Err(Error::InvalidModel {
                    reason: format!("component ({i},{k},{j},{l}) must vanish by antisymmetry"),
                    violation: v.abs(),
                });
            }
            let images = [
                ((i, k, j, l), v),
                ((k, i, j, l), -v),
                ((i, k, l, j), -v),
                ((k, i, l, j), v),
                ((j, l, i, k), v),
                ((l, j, i, k), -v),
                ((j, l, k, i), -v),
                ((l, j, k, i), v),
            ];
            for ((a, b, c, d), value) in images {
                let idx = t.index(a, b, c, d);
                if set[idx] && (t.comps[idx] - value).abs() > VALIDATION_TOLERANCE {
                    return Err(Error::InvalidModel {
                        reason: format!("generators disagree at component ({a},{b},{c},{d})"),
                        violation: (t.comps[idx] - value).abs(),
                    });
                }
                t.comps[idx] = value;
                set[idx] = true;
            }
        }
        Ok(t)
    }

    /// Stores exactly the given components, without symmetrization.
    pub fn from_components(dim: usize, comps: &[Generator]) -> Result<Self> {
        let mut t = Self::zero(dim)?;
        for &(i, k, j, l, v) in comps {
            if [i, k, j, l].iter().any(|&x| x >= dim) {
                return Err(domain(format!("index ({i},{k},{j},{l}) out of range for dimension {dim}")));
            }
            let idx = t.index(i, k, j, l);
            t.comps[idx] = v;
        }
        Ok(t)
    }

    /// The tensor of constant sectional curvature `k`.
    pub fn constant_curvature(dim: usize, k: f64) -> Result<Self> {
        let mut t = Self::zero(dim)?;
        for i in 0..dim {
            for kk in 0..dim {
                for j in 0..dim {
                    for l in 0..dim {
                        let d = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };
                        let idx = t.index(i, kk, j, l);
                        t.comps[idx] = k * (d(i, j) * d(kk, l) - d(i, l) * d(kk, j));
                    }
                }
            }
        }
        Ok(t)
    }

    #[inline]
    fn index(&self, i: usize, k: usize, j: usize, l: usize) -> usize {
        ((i * self.dim + k) * self.dim + j) * self.dim + l
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, i: usize, k: usize, j: usize, l: usize) -> f64 {
        self.comps[self.index(i, k, j, l)]
    }

    /// `Σ_{i,k} R_ikik`.
    pub fn scalar_trace(&self) -> f64 {
        let mut s = 0.0;
        for i in 0..self.dim {
            for k in 0..self.dim {
                s += self.get(i, k, i, k);
            }
        }
        s
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|&c| c == 0.0)
    }

    /// Writes `Q_ij = Σ_kl R_ikjl y^k y^l` into `out` (row-major `n × n`).
    pub(crate) fn quadratic_form(&self, y: &[f64], out: &mut [f64]) {
        let n = self.dim;
        for i in 0..n {
            for j in 0..n {
                let mut acc = 0.0;
                for k in 0..n {
                    if y[k] == 0.0 {
                        continue;
                    }
                    let base = self.index(i, k, j, 0);
                    let mut row = 0.0;
                    for l in 0..n {
                        row += self.comps[base + l] * y[l];
                    }
                    acc += row * y[k];
                }
                out[i * n + j] = acc;
            }
        }
    }

    /// Worst violations of the algebraic curvature identities.
    pub fn symmetry_violations(&self) -> TensorViolations {
        let n = self.dim;
        let mut v = TensorViolations::default();
        for i in 0..n {
            for k in 0..n {
                for j in 0..n {
                    for l in 0..n {
                        let r = self.get(i, k, j, l);
                        v.antisymmetry = v
                            .antisymmetry
                            .max((r + self.get(k, i, j, l)).abs())
                            .max((r + self.get(i, k, l, j)).abs());
                        v.pair_symmetry = v.pair_symmetry.max((r - self.get(j, l, i, k)).abs());
                        v.bianchi = v
                            .bianchi
                            .max((r + self.get(i, j, l, k) + self.get(i, l, k, j)).abs());
                    }
                }
            }
        }
        v
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize)]
pub struct TensorViolations {
    pub antisymmetry: f64,
    pub pair_symmetry: f64,
    pub bianchi: f64,
}

/// Closed-form warping functions `φ` with `φ(0) = 0`, `φ′(0) = 1`, `φ″(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "warp", rename_all = "snake_case")]
pub enum Warp {
    /// `sin(√c ρ)/√c` with `c > 0`.
    Sin { curvature: f64 },
    /// `sinh(√−c ρ)/√−c` with `c < 0`.
    Sinh { curvature: f64 },
    /// `ρ`.
    Linear,
    /// `ρ + a ρ⁵`: curvature vanishes at the center but not nearby.
    Quintic { coefficient: f64 },
}

impl Warp {
    fn check(&self) -> Result<()> {
        match *self {
            Warp::Sin { curvature } if !(curvature > 0.0 && curvature.is_finite()) => {
                Err(domain(format!("sin warp needs positive curvature, got {curvature}")))
            }
            Warp::Sinh { curvature } if !(curvature < 0.0 && curvature.is_finite()) => {
                Err(domain(format!("sinh warp needs negative curvature, got {curvature}")))
            }
            Warp::Quintic { coefficient } if !coefficient.is_finite() => Err(domain("quintic coefficient must be finite")),
            _ => Ok(()),
        }
    }

    pub fn value(&self, rho: f64) -> f64 {
        match *self {
            Warp::Sin { curvature } => {
                let s = curvature.sqrt();
                (s * rho).sin() / s
            }
            Warp::Sinh { curvature } => {
                let s = (-curvature).sqrt();
                (s * rho).sinh() / s
            }
            Warp::Linear => rho,
            Warp::Quintic { coefficient } => rho + coefficient * rho.powi(5),
        }
    }

    pub fn derivative(&self, rho: f64) -> f64 {
        match *self {
            Warp::Sin { curvature } => (curvature.sqrt() * rho).cos(),
            Warp::Sinh { curvature } => ((-curvature).sqrt() * rho).cosh(),
            Warp::Linear => 1.0,
            Warp::Quintic { coefficient } => 1.0 + 5.0 * coefficient * rho.powi(4),
        }
    }

    /// `φ‴(0)`.
    pub fn third_derivative_at_origin(&self) -> f64 {
        match *self {
            Warp::Sin { curvature } | Warp::Sinh { curvature } => -curvature,
            Warp::Linear | Warp::Quintic { .. } => 0.0,
        }
    }

    /// `c = −φ‴(0)`, the sectional curvature at the center.
    pub fn center_curvature(&self) -> f64 {
        -self.third_derivative_at_origin()
    }

    /// `φ(ρ)/ρ`, continuous at `ρ = 0`.
    fn ratio(&self, rho: f64) -> f64 {
        if rho == 0.0 {
            1.0
        } else {
            self.value(rho) / rho
        }
    }

    fn validity_radius(&self) -> f64 {
        match *self {
            Warp::Sin { curvature } => std::f64::consts::FRAC_PI_2 / curvature.sqrt(),
            Warp::Sinh { .. } | Warp::Linear => f64::INFINITY,
            Warp::Quintic { coefficient } if coefficient != 0.0 => (0.1 / coefficient.abs()).powf(0.25),
            Warp::Quintic { .. } => f64::INFINITY,
        }
    }
}

/// The concrete presentation of a [`MetricModel`].
#[derive(Debug, Clone, PartialEq)]
pub enum ModelFamily {
    SpaceForm { dim: usize, curvature: f64 },
    WarpedProduct { dim: usize, warp: Warp },
    CurvaturePolynomial { tensor: CurvatureTensor, valid_radius: f64 },
}

/// A validated, immutable pointed Riemannian manifold in normal coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricModel {
    family: ModelFamily,
}

/// Outcome of [`MetricModel::validate`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ModelDiagnostics {
    pub tensor: TensorViolations,
    /// `max |g(y) y − y|` over random points of the validity ball.
    pub gauss_lemma: f64,
    /// Smallest eigenvalue of `g` seen on the sample grid.
    pub min_eigenvalue: f64,
    /// Largest of the symmetry, Bianchi and Gauss-lemma violations, plus any
    /// shortfall of positive definiteness.
    pub worst_violation: f64,
}

impl ModelDiagnostics {
    pub fn accepted(&self) -> bool {
        self.worst_violation <= VALIDATION_TOLERANCE
    }
}

impl MetricModel {
    /// Constant sectional curvature `curvature` in dimension `dim`.
    pub fn space_form(dim: usize, curvature: f64) -> Result<Self> {
        if dim < 3 {
            return Err(domain(format!("dimension must be at least 3, got {dim}")));
        }
        if !curvature.is_finite() {
            return Err(domain("curvature must be finite"));
        }
        Self::accept(ModelFamily::SpaceForm { dim, curvature })
    }

    pub fn euclidean(dim: usize) -> Result<Self> {
        Self::space_form(dim, 0.0)
    }

    pub fn warped_product(dim: usize, warp: Warp) -> Result<Self> {
        if dim < 3 {
            return Err(domain(format!("dimension must be at least 3, got {dim}")));
        }
        warp.check()?;
        Self::accept(ModelFamily::WarpedProduct { dim, warp })
    }

    /// Truncated normal-coordinate metric for `tensor`. When `valid_radius` is
    /// `None` the radius is the largest one on which the smallest eigenvalue of
    /// `g` stays above [`DEFAULT_MIN_EIGENVALUE`].
    pub fn curvature_polynomial(tensor: CurvatureTensor, valid_radius: Option<f64>) -> Result<Self> {
        let peak = max_directional_curvature(&tensor);
        let limit = if peak > 0.0 {
            (3.0 / peak).sqrt()
        } else {
            f64::INFINITY
        };
        let radius = match valid_radius {
            None => limit * (1.0 - DEFAULT_MIN_EIGENVALUE).sqrt(),
            Some(r) if r > 0.0 && r < limit => r,
            Some(r) => {
                return Err(Error::InvalidModel {
                    reason: format!("metric is not positive definite out to radius {r} (limit {limit})"),
                    violation: if r.is_finite() { 1.0 - r * r * peak / 3.0 } else { f64::INFINITY }.abs(),
                })
            }
        };
        Self::accept(ModelFamily::CurvaturePolynomial { tensor, valid_radius: radius })
    }

    fn accept(family: ModelFamily) -> Result<Self> {
        let model = MetricModel { family };
        let diag = model.validate();
        if !diag.accepted() {
            return Err(Error::InvalidModel {
                reason: "model violates its structural invariants".into(),
                violation: diag.worst_violation,
            });
        }
        Ok(model)
    }

    pub fn family(&self) -> &ModelFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            ModelFamily::SpaceForm { dim, .. } | ModelFamily::WarpedProduct { dim, .. } => *dim,
            ModelFamily::CurvaturePolynomial { tensor, .. } => tensor.dim(),
        }
    }

    /// Radius of the coordinate ball on which the model is defined and its
    /// coordinate spheres are smooth geodesic spheres.
    pub fn validity_radius(&self) -> f64 {
        match &self.family {
            ModelFamily::SpaceForm { curvature, .. } if *curvature > 0.0 => {
                std::f64::consts::FRAC_PI_2 / curvature.sqrt()
            }
            ModelFamily::SpaceForm { .. } => f64::INFINITY,
            ModelFamily::WarpedProduct { warp, .. } => warp.validity_radius(),
            ModelFamily::CurvaturePolynomial { valid_radius, .. } => *valid_radius,
        }
    }

    /// Scalar curvature at the base point, from the model data.
    pub fn scalar_curvature(&self) -> f64 {
        let n = self.dim() as f64;
        match &self.family {
            ModelFamily::SpaceForm { curvature, .. } => n * (n - 1.0) * curvature,
            ModelFamily::WarpedProduct { warp, .. } => n * (n - 1.0) * warp.center_curvature(),
            ModelFamily::CurvaturePolynomial { tensor, .. } => tensor.scalar_trace(),
        }
    }

    pub fn is_rotationally_symmetric(&self) -> bool {
        !matches!(self.family, ModelFamily::CurvaturePolynomial { .. })
    }

    /// True when the metric is Euclidean on its whole domain.
    pub fn is_flat(&self) -> bool {
        match &self.family {
            ModelFamily::SpaceForm { curvature, .. } => *curvature == 0.0,
            ModelFamily::WarpedProduct { warp, .. } => matches!(warp, Warp::Linear | Warp::Quintic { coefficient: 0.0 }),
            ModelFamily::CurvaturePolynomial { tensor, .. } => tensor.is_zero(),
        }
    }

    /// `φ(ρ)` for rotationally symmetric models, so that the geodesic sphere of
    /// radius `ρ` has area `ω_{n−1} φ(ρ)^{n−1}`.
    pub fn radial_profile(&self, rho: f64) -> Option<f64> {
        match &self.family {
            ModelFamily::SpaceForm { curvature, .. } => Some(space_form_profile(*curvature, rho)),
            ModelFamily::WarpedProduct { warp, .. } => Some(warp.value(rho)),
            ModelFamily::CurvaturePolynomial { .. } => None,
        }
    }

    /// `g_ij(y)` in normal coordinates.
    pub fn metric_at(&self, y: &[f64]) -> Result<DMatrix<f64>> {
        let n = self.dim();
        if y.len() != n {
            return Err(domain(format!("point has {} coordinates, model dimension is {n}", y.len())));
        }
        let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !(rho <= self.validity_radius()) {
            return Err(domain(format!(
                "point at radius {rho} lies outside the validity radius {}",
                self.validity_radius()
            )));
        }
        let mut out = vec![0.0; n * n];
        self.fill_metric(y, &mut out);
        Ok(DMatrix::from_row_slice(n, n, &out))
    }

    /// Unchecked row-major metric evaluation used by the solvers.
    pub(crate) fn fill_metric(&self, y: &[f64], out: &mut [f64]) {
        let n = self.dim();
        match &self.family {
            ModelFamily::CurvaturePolynomial { tensor, .. } => {
                tensor.quadratic_form(y, out);
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        out[i * n + j] = delta - out[i * n + j] / 3.0;
                    }
                }
            }
            _ => {
                let rho = y.iter().map(|v| v * v).sum::<f64>().sqrt();
                let f = match &self.family {
                    ModelFamily::SpaceForm { curvature, .. } => {
                        if rho == 0.0 {
                            1.0
                        } else {
                            space_form_profile(*curvature, rho) / rho
                        }
                    }
                    ModelFamily::WarpedProduct { warp, .. } => warp.ratio(rho),
                    ModelFamily::CurvaturePolynomial { .. } => unreachable!(),
                };
                let f2 = f * f;
                for i in 0..n {
                    for j in 0..n {
                        let delta = if i == j { 1.0 } else { 0.0 };
                        let radial = if rho == 0.0 { 0.0 } else { y[i] * y[j] / (rho * rho) };
                        out[i * n + j] = f2 * delta + (1.0 - f2) * radial;
                    }
                }
            }
        }
    }

    pub fn validate(&self) -> ModelDiagnostics {
        self.validate_with_seed(DEFAULT_SEED, 2000)
    }

    /// Checks the tensor identities, the Gauss lemma at `samples` random points
    /// of the validity ball, and positive definiteness on a direction grid.
    pub fn validate_with_seed(&self, seed: u64, samples: usize) -> ModelDiagnostics {
        let n = self.dim();
        let tensor = match &self.family {
            ModelFamily::CurvaturePolynomial { tensor, .. } => tensor.symmetry_violations(),
            _ => TensorViolations::default(),
        };
        // Finite radius used for sampling; the geometry is scale-free beyond a
        // few units for the unbounded families.
        let radius = self.validity_radius().min(4.0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut gauss_lemma: f64 = 0.0;
        let mut g = vec![0.0; n * n];
        let mut y = vec![0.0; n];
        for _ in 0..samples {
            loop {
                for v in y.iter_mut() {
                    *v = rng.random_range(-1.0..1.0);
                }
                if y.iter().map(|v| v * v).sum::<f64>() <= 1.0 {
                    break;
                }
            }
            y.iter_mut().for_each(|v| *v *= radius);
            self.fill_metric(&y, &mut g);
            for i in 0..n {
                let gy: f64 = (0..n).map(|j| g[i * n + j] * y[j]).sum();
                // scale-relative so large sampling radii do not inflate roundoff
                let scale = 1.0f64.max(radius * radius * radius);
                gauss_lemma = gauss_lemma.max((gy - y[i]).abs() / scale);
            }
        }

        let min_eigenvalue = self.min_eigenvalue_on_grid(radius);
        let mut worst = tensor.antisymmetry.max(tensor.pair_symmetry).max(tensor.bianchi).max(gauss_lemma);
        if !(min_eigenvalue > 0.0) {
            worst = worst.max(1.0 - min_eigenvalue);
        }
        ModelDiagnostics { tensor, gauss_lemma, min_eigenvalue, worst_violation: worst }
    }

    fn min_eigenvalue_on_grid(&self, radius: f64) -> f64 {
        match &self.family {
            ModelFamily::CurvaturePolynomial { tensor, .. } => {
                // g(ρû) = I − (ρ²/3) Q(û), so the extreme sits on the boundary sphere.
                1.0 - radius * radius * max_directional_curvature(tensor) / 3.0
            }
            ModelFamily::SpaceForm { .. } | ModelFamily::WarpedProduct { .. } => {
                // eigenvalues are 1 (radial) and (φ/ρ)², sampled along a radius
                let mut min: f64 = 1.0;
                for s in 1..=200 {
                    let rho = radius * s as f64 / 200.0;
                    let f = self.radial_profile(rho).unwrap() / rho;
                    min = min.min(f * f);
                }
                min
            }
        }
    }
}

/// `sn_K(ρ)`: `sin(√K ρ)/√K`, `ρ`, or `sinh(√−K ρ)/√−K`.
pub fn space_form_profile(curvature: f64, rho: f64) -> f64 {
    if curvature > 0.0 {
        let s = curvature.sqrt();
        (s * rho).sin() / s
    } else if curvature < 0.0 {
        let s = (-curvature).sqrt();
        (s * rho).sinh() / s
    } else {
        rho
    }
}

/// Largest eigenvalue of `Q(û)_ij = R_ikjl û^k û^l` over unit directions taken
/// from a cube-surface grid (20 points per axis up to dimension 4, coarser above).
fn max_directional_curvature(tensor: &CurvatureTensor) -> f64 {
    let n = tensor.dim();
    if tensor.is_zero() {
        return 0.0;
    }
    // odd counts so the coordinate axes are on the grid
    let per_axis: usize = match n {
        3 | 4 => 21,
        5 | 6 => 11,
        _ => 7,
    };
    let largest = |u: &[f64]| {
        let norm = u.iter().map(|v| v * v).sum::<f64>().sqrt();
        let unit: Vec<f64> = u.iter().map(|v| v / norm).collect();
        let mut q = vec![0.0; n * n];
        tensor.quadratic_form(&unit, &mut q);
        SymmetricEigen::new(DMatrix::from_row_slice(n, n, &q)).eigenvalues.max()
    };
    let total = per_axis.pow(n as u32);
    let mut u = vec![0.0; n];
    let mut best = f64::NEG_INFINITY;
    let mut best_u = u.clone();
    for flat in 0..total {
        let mut rem = flat;
        let mut on_surface = false;
        for slot in u.iter_mut() {
            let idx = rem % per_axis;
            rem /= per_axis;
            on_surface |= idx == 0 || idx == per_axis - 1;
            *slot = -1.0 + 2.0 * idx as f64 / (per_axis - 1) as f64;
        }
        if !on_surface {
            continue;
        }
        let value = largest(&u);
        if value > best {
            best = value;
            best_u.copy_from_slice(&u);
        }
    }
    // pattern search from the best grid direction
    let mut step = 2.0 / (per_axis - 1) as f64;
    while step > 1e-10 {
        let mut improved = false;
        for i in 0..n {
            for sign in [-1.0, 1.0] {
                let mut trial = best_u.clone();
                trial[i] += sign * step;
                let value = largest(&trial);
                if value > best {
                    best = value;
                    best_u = trial;
                    improved = true;
                }
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

impl fmt::Display for MetricModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            ModelFamily::SpaceForm { dim, curvature } => write!(f, "space_form(n={dim},K={curvature})"),
            ModelFamily::WarpedProduct { dim, warp } => match warp {
                Warp::Sin { curvature } => write!(f, "warped_sin(n={dim},c={curvature})"),
                Warp::Sinh { curvature } => write!(f, "warped_sinh(n={dim},c={curvature})"),
                Warp::Linear => write!(f, "warped_linear(n={dim})"),
                Warp::Quintic { coefficient } => write!(f, "warped_quintic(n={dim},a={coefficient})"),
            },
            ModelFamily::CurvaturePolynomial { tensor, valid_radius } => {
                write!(f, "curvature_polynomial(n={},S={},rho_max={valid_radius:.6})", tensor.dim(), tensor.scalar_trace())
            }
        }
    }
}

/// `S² × ℝ` (unit sphere factor) in dimension 3: `R_0101 = 1`, scalar curvature 2.
pub fn sphere_cross_line_tensor() -> CurvatureTensor {
    CurvatureTensor::from_generators(3, &[(0, 1, 0, 1, 1.0)]).expect("valid generators")
}

/// A scalar-flat but non-flat tensor in dimension 3: sectional curvatures
/// `+1` on the `(0,1)` plane and `−1` on the `(0,2)` plane.
pub fn scalar_flat_tensor() -> CurvatureTensor {
    CurvatureTensor::from_generators(3, &[(0, 1, 0, 1, 1.0), (0, 2, 0, 2, -1.0)]).expect("valid generators")
}

//! Trilinear finite elements on a spherical shell grid and a
//! Jacobi-preconditioned conjugate gradient minimization of the Dirichlet
//! energy.
//!
//! The problem is posed on the scaled annulus `1 ≤ |x| ≤ λ` with metric
//! `g(r x)`; in three dimensions the physical energy is `r` times the scaled
//! one.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rayon::prelude::*;
use serde::Serialize;

use super::grid::{spherical_to_cartesian, Resolution, ShellGrid};
use super::{CapacityMethod, CapacityQuery, CapacityResult};
use crate::error::{Error, Result};
use crate::metric::MetricModel;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SolverSettings {
    /// Stop once the energy dropped by less than this fraction over `window` iterations.
    pub tolerance: f64,
    pub window: usize,
    pub max_iterations: usize,
}

impl Default for SolverSettings {
    fn default() -> Self {
        SolverSettings { tolerance: 1e-10, window: 10, max_iterations: 100_000 }
    }
}

/// Nodal values of a discrete minimizer.
#[derive(Debug, Clone)]
pub struct HarmonicField {
    grid: ShellGrid,
    values: Vec<f64>,
    scale: f64,
}

impl HarmonicField {
    pub fn grid(&self) -> &ShellGrid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// The inner radius `r` mapping scaled to physical coordinates.
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Physical normal coordinates and value of every node.
    pub fn nodes(&self) -> impl Iterator<Item = ([f64; 3], f64)> + '_ {
        self.values.iter().enumerate().map(move |(d, v)| {
            let x = self.grid.position(d);
            ([x[0] * self.scale, x[1] * self.scale, x[2] * self.scale], *v)
        })
    }

    /// `x,y,z,value` rows with a header line.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "x,y,z,value")?;
        for (p, v) in self.nodes() {
            writeln!(w, "{:e},{:e},{:e},{:e}", p[0], p[1], p[2], v)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Little-endian `f64` records `x, y, z, value`.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        for (p, v) in self.nodes() {
            for c in [p[0], p[1], p[2], v] {
                w.write_all(&c.to_le_bytes())?;
            }
        }
        w.flush()?;
        Ok(())
    }

    /// Trilinear interpolation in index space onto a grid with every count doubled.
    fn prolong(&self, fine: &ShellGrid) -> Vec<f64> {
        let np = self.grid.resolution.azimuthal;
        (0..fine.len())
            .map(|d| {
                let (i, j, k) = fine.node(d);
                let is = [i / 2, i.div_ceil(2)];
                let js = [j / 2, j.div_ceil(2)];
                let ks = [k / 2, k.div_ceil(2) % np];
                let mut sum = 0.0;
                for ci in is {
                    for cj in js {
                        for ck in ks {
                            sum += self.values[self.grid.dof(ci, cj, ck)];
                        }
                    }
                }
                sum / 8.0
            })
            .collect()
    }
}

/// One discrete solve.
#[derive(Debug, Clone)]
pub struct LevelSolution {
    pub resolution: Resolution,
    pub capacity: f64,
    pub iterations: usize,
    /// Relative energy drop over the final window.
    pub last_change: f64,
    pub field: HarmonicField,
}

/// Fine solve, its nested coarse companion, and the combined result whose
/// error estimate is the difference between them.
#[derive(Debug, Clone)]
pub struct VariationalSolution {
    pub result: CapacityResult,
    pub fine: LevelSolution,
    pub coarse: LevelSolution,
}

struct Csr {
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    vals: Vec<f64>,
}

impl Csr {
    fn pattern(grid: &ShellGrid) -> Self {
        let mut row_ptr = Vec::with_capacity(grid.len() + 1);
        let mut cols = Vec::with_capacity(grid.len() * 27);
        let mut nb = Vec::new();
        row_ptr.push(0);
        for d in 0..grid.len() {
            grid.neighbours(d, &mut nb);
            cols.extend(nb.iter().map(|&c| c as u32));
            row_ptr.push(cols.len());
        }
        let vals = vec![0.0; cols.len()];
        Csr { row_ptr, cols, vals }
    }

    fn slot(&self, row: usize, col: usize) -> usize {
        let lo = self.row_ptr[row];
        let hi = self.row_ptr[row + 1];
        lo + self.cols[lo..hi].binary_search(&(col as u32)).expect("column in sparsity pattern")
    }

    fn row_dot(&self, row: usize, x: &[f64]) -> f64 {
        let (lo, hi) = (self.row_ptr[row], self.row_ptr[row + 1]);
        self.cols[lo..hi].iter().zip(&self.vals[lo..hi]).map(|(&c, v)| v * x[c as usize]).sum()
    }

    fn diagonal(&self, row: usize) -> f64 {
        self.vals[self.slot(row, row)]
    }
}

const GAUSS_T: [f64; 3] = [0.112_701_665_379_258_31, 0.5, 0.887_298_334_620_741_7];
const GAUSS_W: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

struct ElementMatrix {
    dofs: [usize; 8],
    count: usize,
    k: [[f64; 8]; 8],
}

fn shape(t: f64, node: usize) -> (f64, f64) {
    if node == 0 {
        (1.0 - t, -1.0)
    } else {
        (t, 1.0)
    }
}

fn element_matrix(model: &MetricModel, grid: &ShellGrid, scale: f64, i: usize, j: usize, k: usize) -> Result<ElementMatrix> {
    let mut dofs = [0usize; 8];
    let mut count = 0;
    let mut slot_of = [0usize; 8];
    for a in 0..8 {
        let d = grid.dof(i + (a >> 2), j + ((a >> 1) & 1), k + (a & 1));
        match dofs[..count].iter().position(|&x| x == d) {
            Some(s) => slot_of[a] = s,
            None => {
                dofs[count] = d;
                slot_of[a] = count;
                count += 1;
            }
        }
    }
    let r0 = grid.radii[i];
    let hr = grid.radii[i + 1] - r0;
    let t0 = grid.polar[j];
    let ht = grid.polar[j + 1] - t0;
    let p0 = grid.azimuth[k];
    let hp = 2.0 * std::f64::consts::PI / grid.resolution.azimuthal as f64;
    let mut kmat = [[0.0; 8]; 8];
    let mut g = [0.0; 9];
    for (&ta, &wa) in GAUSS_T.iter().zip(&GAUSS_W) {
        let rho = r0 + hr * ta;
        for (&tb, &wb) in GAUSS_T.iter().zip(&GAUSS_W) {
            let theta = t0 + ht * tb;
            let (st, ct) = theta.sin_cos();
            for (&tc, &wc) in GAUSS_T.iter().zip(&GAUSS_W) {
                let phi = p0 + hp * tc;
                let (sp, cp) = phi.sin_cos();
                let x = spherical_to_cartesian(rho * scale, theta, phi);
                model.fill_metric(&x, &mut g);
                let det = crate::geometry::det3(&g);
                if !(det > 0.0 && det.is_finite()) {
                    return Err(Error::Numerical {
                        message: format!("metric is not positive definite at radius {}", rho * scale),
                        iterations: 0,
                        last_change: det,
                    });
                }
                let inv = inverse3(&g, det);
                let e = [[st * cp, st * sp, ct], [ct * cp, ct * sp, -st], [-sp, cp, 0.0]];
                let mut b = [[0.0; 3]; 3];
                for (a, ea) in e.iter().enumerate() {
                    for (c, ec) in e.iter().enumerate() {
                        let mut s = 0.0;
                        for p in 0..3 {
                            for q in 0..3 {
                                s += ea[p] * inv[p * 3 + q] * ec[q];
                            }
                        }
                        b[a][c] = s;
                    }
                }
                let sd = det.sqrt();
                let m = [
                    [b[0][0] * rho * rho * st, b[0][1] * rho * st, b[0][2] * rho],
                    [b[1][0] * rho * st, b[1][1] * st, b[1][2]],
                    [b[2][0] * rho, b[2][1], b[2][2] / st],
                ];
                let w = wa * wb * wc * hr * ht * hp * sd;
                let mut grads = [[0.0; 3]; 8];
                for a in 0..8 {
                    let (lr, dr) = shape(ta, a >> 2);
                    let (lt, dt) = shape(tb, (a >> 1) & 1);
                    let (lp, dp) = shape(tc, a & 1);
                    let s = slot_of[a];
                    grads[s][0] += dr * lt * lp / hr;
                    grads[s][1] += lr * dt * lp / ht;
                    grads[s][2] += lr * lt * dp / hp;
                }
                for s in 0..count {
                    let mg = [
                        m[0][0] * grads[s][0] + m[0][1] * grads[s][1] + m[0][2] * grads[s][2],
                        m[1][0] * grads[s][0] + m[1][1] * grads[s][1] + m[1][2] * grads[s][2],
                        m[2][0] * grads[s][0] + m[2][1] * grads[s][1] + m[2][2] * grads[s][2],
                    ];
                    for t in s..count {
                        kmat[s][t] += w * (grads[t][0] * mg[0] + grads[t][1] * mg[1] + grads[t][2] * mg[2]);
                    }
                }
            }
        }
    }
    for s in 0..count {
        for t in 0..s {
            kmat[s][t] = kmat[t][s];
        }
    }
    Ok(ElementMatrix { dofs, count, k: kmat })
}

pub(crate) fn inverse3(g: &[f64], det: f64) -> [f64; 9] {
    [
        (g[4] * g[8] - g[5] * g[7]) / det,
        (g[2] * g[7] - g[1] * g[8]) / det,
        (g[1] * g[5] - g[2] * g[4]) / det,
        (g[5] * g[6] - g[3] * g[8]) / det,
        (g[0] * g[8] - g[2] * g[6]) / det,
        (g[2] * g[3] - g[0] * g[5]) / det,
        (g[3] * g[7] - g[4] * g[6]) / det,
        (g[1] * g[6] - g[0] * g[7]) / det,
        (g[0] * g[4] - g[1] * g[3]) / det,
    ]
}

fn assemble(model: &MetricModel, grid: &ShellGrid, scale: f64) -> Result<Csr> {
    let mut csr = Csr::pattern(grid);
    let nt = grid.resolution.polar;
    let np = grid.resolution.azimuthal;
    for i in 0..grid.resolution.radial {
        let layer: Vec<ElementMatrix> = (0..nt * np)
            .into_par_iter()
            .map(|e| element_matrix(model, grid, scale, i, e / np, e % np))
            .collect::<Result<_>>()?;
        for el in &layer {
            for s in 0..el.count {
                for t in 0..el.count {
                    let slot = csr.slot(el.dofs[s], el.dofs[t]);
                    csr.vals[slot] += el.k[s][t];
                }
            }
        }
    }
    Ok(csr)
}

fn euclidean_profile(grid: &ShellGrid, ratio: f64) -> Vec<f64> {
    (0..grid.len())
        .map(|d| {
            let rho = grid.radii[grid.node(d).0];
            (1.0 - 1.0 / rho) / (1.0 - 1.0 / ratio)
        })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_query(query: &CapacityQuery<'_>) -> Result<()> {
    if query.model().dim() != 3 {
        return Err(Error::Unsupported(format!(
            "the variational solver is implemented in dimension 3 only, got {}",
            query.model().dim()
        )));
    }
    Ok(())
}

/// Minimizes the discrete energy at one resolution, starting from `initial`
/// (same grid, or the grid with every count halved) or from the Euclidean
/// radial profile.
pub fn solve_level(
    query: &CapacityQuery<'_>,
    resolution: Resolution,
    settings: SolverSettings,
    initial: Option<&HarmonicField>,
) -> Result<LevelSolution> {
    check_query(query)?;
    let grid = ShellGrid::new(query.ratio(), resolution)?;
    let scale = query.inner_radius();
    let a = assemble(query.model(), &grid, scale)?;
    let mut x = match initial {
        Some(f) if f.grid.resolution == resolution => f.values.clone(),
        Some(f) if Some(f.grid.resolution) == resolution.coarsened() => f.prolong(&grid),
        _ => euclidean_profile(&grid, query.ratio()),
    };
    let ss = grid.shell_size();
    let n = grid.len();
    for v in &mut x[..ss] {
        *v = 0.0;
    }
    for v in &mut x[n - ss..] {
        *v = 1.0;
    }
    let interior = grid.interior();
    let inv_diag: Vec<f64> = interior.clone().map(|d| 1.0 / a.diagonal(d)).collect();

    let matvec = |src: &[f64], dst: &mut [f64]| {
        dst[interior.clone()]
            .par_iter_mut()
            .with_min_len(1024)
            .enumerate()
            .for_each(|(o, q)| *q = a.row_dot(interior.start + o, src));
    };

    let mut ax = vec![0.0; n];
    (0..n).for_each(|d| ax[d] = a.row_dot(d, &x));
    let mut energy = dot(&x, &ax);
    let mut r = vec![0.0; n];
    for d in interior.clone() {
        r[d] = -ax[d];
    }
    let mut z = vec![0.0; n];
    for (o, d) in interior.clone().enumerate() {
        z[d] = r[d] * inv_diag[o];
    }
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![0.0; n];
    let mut history = vec![energy];
    let mut iterations = 0;
    let mut last_change = f64::INFINITY;
    while rz > 0.0 {
        if iterations >= settings.max_iterations {
            return Err(Error::Numerical {
                message: format!("conjugate gradient did not converge at resolution {resolution}"),
                iterations,
                last_change,
            });
        }
        matvec(&p, &mut q);
        let pq = dot(&p, &q);
        if !(pq > 0.0 && pq.is_finite()) {
            return Err(Error::Numerical {
                message: "stiffness matrix lost positive definiteness".into(),
                iterations,
                last_change,
            });
        }
        let alpha = rz / pq;
        for d in interior.clone() {
            x[d] += alpha * p[d];
            r[d] -= alpha * q[d];
        }
        energy -= alpha * rz;
        iterations += 1;
        history.push(energy);
        for (o, d) in interior.clone().enumerate() {
            z[d] = r[d] * inv_diag[o];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for d in interior.clone() {
            p[d] = z[d] + beta * p[d];
        }
        if iterations >= settings.window {
            let earlier = history[iterations - settings.window];
            last_change = (earlier - energy) / energy.abs();
            if last_change < settings.tolerance {
                break;
            }
        }
    }
    (0..n).for_each(|d| ax[d] = a.row_dot(d, &x));
    let energy = dot(&x, &ax);
    if !energy.is_finite() {
        return Err(Error::Numerical { message: "non-finite energy".into(), iterations, last_change });
    }
    let capacity = scale * energy / query.normalization();
    Ok(LevelSolution {
        resolution,
        capacity,
        iterations,
        last_change: if last_change.is_finite() { last_change } else { 0.0 },
        field: HarmonicField { grid, values: x, scale },
    })
}

/// Variational capacity at `resolution`, with an error estimate from a second
/// solve on the grid with every count halved.
pub fn variational_capacity(query: &CapacityQuery<'_>, resolution: Resolution) -> Result<VariationalSolution> {
    variational_capacity_with(query, resolution, SolverSettings::default())
}

pub fn variational_capacity_with(
    query: &CapacityQuery<'_>,
    resolution: Resolution,
    settings: SolverSettings,
) -> Result<VariationalSolution> {
    check_query(query)?;
    resolution.check()?;
    let coarse_res = resolution.coarsened().ok_or_else(|| {
        Error::Precondition(format!("resolution {resolution} must halve to a valid grid for the error estimate"))
    })?;
    let coarse = solve_level(query, coarse_res, settings, None)?;
    let fine = solve_level(query, resolution, settings, Some(&coarse.field))?;
    let error = (fine.capacity - coarse.capacity).abs();
    let result = CapacityResult::new(query, fine.capacity, CapacityMethod::Variational, error);
    Ok(VariationalSolution { result, fine, coarse })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::capacity::szego_upper_bound;
    use crate::metric::{sphere_cross_line_tensor, CurvatureTensor};

    #[test]
    fn flat_annulus_matches_closed_form() {
        let m = MetricModel::euclidean(3).unwrap();
        let q = CapacityQuery::new(&m, 1.0, 2.0).unwrap();
        let sol = variational_capacity(&q, Resolution::level(1)).unwrap();
        assert!((sol.result.value - 2.0).abs() < 5e-3, "{}", sol.result.value);
        assert!(sol.result.error_estimate > (sol.result.value - 2.0).abs());
        assert!(sol.result.value >= 2.0 - 1e-12);
    }

    #[test]
    fn polynomial_flat_tensor_agrees() {
        let m = MetricModel::curvature_polynomial(CurvatureTensor::zero(3).unwrap(), None).unwrap();
        let q = CapacityQuery::new(&m, 0.3, 2.0).unwrap();
        let sol = variational_capacity(&q, Resolution::level(1)).unwrap();
        assert!((sol.result.deficit).abs() < 5e-3);
    }

    #[test]
    fn below_level_set_bound() {
        let m = MetricModel::curvature_polynomial(sphere_cross_line_tensor(), None).unwrap();
        let q = CapacityQuery::new(&m, 0.2, 2.0).unwrap();
        let sol = variational_capacity(&q, Resolution::level(2)).unwrap();
        let bound = szego_upper_bound(&q).unwrap();
        assert!(sol.result.value - sol.result.error_estimate <= bound.value);
        assert!(sol.result.deficit > 0.0);
    }

    #[test]
    fn rejects_other_dimensions() {
        let m = MetricModel::space_form(4, 1.0).unwrap();
        let q = CapacityQuery::new(&m, 0.1, 2.0).unwrap();
        assert!(matches!(variational_capacity(&q, Resolution::level(1)), Err(Error::Unsupported(_))));
    }

    #[test]
    fn csv_dump_has_one_row_per_node() {
        let m = MetricModel::euclidean(3).unwrap();
        let q = CapacityQuery::new(&m, 0.5, 2.0).unwrap();
        let sol = solve_level(&q, Resolution::level(0), SolverSettings::default(), None).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("field.csv");
        sol.field.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), sol.field.values().len() + 1);
    }
}

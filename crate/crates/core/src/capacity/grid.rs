//! Spherical shell grid on the scaled annulus `1 ≤ |x| ≤ λ` in three
//! dimensions.
//!
//! Nodes are laid out in `(ρ, θ, φ)` with Chebyshev–Gauss–Lobatto radii,
//! uniform colatitudes `θ_j = jπ/N_θ` and periodic uniform azimuths. Each
//! radial shell has one node per pole. Degrees of freedom are numbered shell
//! by shell: north pole, the `(N_θ − 1) N_φ` ring nodes, south pole.

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Resolution {
    /// Radial intervals.
    pub radial: usize,
    /// Colatitude intervals.
    pub polar: usize,
    /// Azimuthal intervals.
    pub azimuthal: usize,
}

impl Resolution {
    pub const DEFAULT_LEVEL: u32 = 4;

    /// `6·2^L × 3·2^L × 6·2^L` intervals.
    pub fn level(level: u32) -> Self {
        Resolution { radial: 6 << level, polar: 3 << level, azimuthal: 6 << level }
    }

    pub fn new(radial: usize, polar: usize, azimuthal: usize) -> Result<Self> {
        let res = Resolution { radial, polar, azimuthal };
        res.check()?;
        Ok(res)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.radial < 1 || self.polar < 2 || self.azimuthal < 3 {
            return Err(Error::Precondition(format!(
                "resolution {self} is too coarse (need radial ≥ 1, polar ≥ 2, azimuthal ≥ 3)"
            )));
        }
        Ok(())
    }

    /// Every count halved, if the result is still a valid grid nested in this one.
    pub fn coarsened(&self) -> Option<Self> {
        if self.radial % 2 != 0 || self.polar % 2 != 0 || self.azimuthal % 2 != 0 {
            return None;
        }
        let c = Resolution { radial: self.radial / 2, polar: self.polar / 2, azimuthal: self.azimuthal / 2 };
        c.check().ok().map(|_| c)
    }

    pub fn unknowns(&self) -> usize {
        (self.radial + 1) * (2 + (self.polar - 1) * self.azimuthal)
    }
}

impl Default for Resolution {
    fn default() -> Self {
        Resolution::level(Self::DEFAULT_LEVEL)
    }
}

impl std::fmt::Display for Resolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}x{}x{}", self.radial, self.polar, self.azimuthal)
    }
}

#[derive(Debug, Clone)]
pub struct ShellGrid {
    pub resolution: Resolution,
    /// `N_r + 1` increasing radii from 1 to λ.
    pub radii: Vec<f64>,
    /// `N_θ + 1` colatitudes from 0 to π.
    pub polar: Vec<f64>,
    /// `N_φ` azimuths in `[0, 2π)`.
    pub azimuth: Vec<f64>,
    shell_size: usize,
}

impl ShellGrid {
    pub fn new(ratio: f64, resolution: Resolution) -> Result<Self> {
        resolution.check()?;
        let nr = resolution.radial;
        let radii = (0..=nr)
            .map(|i| {
                if i == 0 {
                    1.0
                } else if i == nr {
                    ratio
                } else {
                    let t = 0.5 * (1.0 - (PI * i as f64 / nr as f64).cos());
                    1.0 + (ratio - 1.0) * t
                }
            })
            .collect();
        let polar = (0..=resolution.polar).map(|j| PI * j as f64 / resolution.polar as f64).collect();
        let azimuth = (0..resolution.azimuthal)
            .map(|k| 2.0 * PI * k as f64 / resolution.azimuthal as f64)
            .collect();
        Ok(ShellGrid { resolution, radii, polar, azimuth, shell_size: 2 + (resolution.polar - 1) * resolution.azimuthal })
    }

    pub fn len(&self) -> usize {
        self.shell_size * (self.resolution.radial + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn shell_size(&self) -> usize {
        self.shell_size
    }

    /// Global index of node `(i, j, k)`; `k` is taken modulo `N_φ` and ignored at the poles.
    pub fn dof(&self, i: usize, j: usize, k: usize) -> usize {
        let base = i * self.shell_size;
        if j == 0 {
            base
        } else if j == self.resolution.polar {
            base + self.shell_size - 1
        } else {
            base + 1 + (j - 1) * self.resolution.azimuthal + k % self.resolution.azimuthal
        }
    }

    /// `(i, j, k)` of a global index, with `k = 0` at the poles.
    pub fn node(&self, dof: usize) -> (usize, usize, usize) {
        let i = dof / self.shell_size;
        let local = dof % self.shell_size;
        if local == 0 {
            (i, 0, 0)
        } else if local == self.shell_size - 1 {
            (i, self.resolution.polar, 0)
        } else {
            let m = local - 1;
            (i, 1 + m / self.resolution.azimuthal, m % self.resolution.azimuthal)
        }
    }

    /// Scaled Cartesian position of a node.
    pub fn position(&self, dof: usize) -> [f64; 3] {
        let (i, j, k) = self.node(dof);
        spherical_to_cartesian(self.radii[i], self.polar[j], self.azimuth[k])
    }

    /// Free unknowns: everything strictly between the two boundary shells.
    pub fn interior(&self) -> std::ops::Range<usize> {
        self.shell_size..self.resolution.radial * self.shell_size
    }

    /// Sorted column indices of the nodes sharing an element with `dof`.
    pub(crate) fn neighbours(&self, dof: usize, out: &mut Vec<usize>) {
        out.clear();
        let (i, j, k) = self.node(dof);
        let nr = self.resolution.radial;
        let nt = self.resolution.polar;
        let np = self.resolution.azimuthal;
        let shells = i.saturating_sub(1)..=(i + 1).min(nr);
        if j == 0 || j == nt {
            let ring = if j == 0 { 1 } else { nt - 1 };
            for ii in shells {
                out.push(self.dof(ii, j, 0));
                for kk in 0..np {
                    out.push(self.dof(ii, ring, kk));
                }
            }
        } else {
            for ii in shells {
                for jj in j - 1..=j + 1 {
                    for dk in 0..3 {
                        out.push(self.dof(ii, jj, k + np + dk - 1));
                    }
                }
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

pub(crate) fn spherical_to_cartesian(rho: f64, theta: f64, phi: f64) -> [f64; 3] {
    let (st, ct) = theta.sin_cos();
    let (sp, cp) = phi.sin_cos();
    [rho * st * cp, rho * st * sp, rho * ct]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn levels_and_coarsening() {
        assert_eq!(Resolution::level(3), Resolution { radial: 48, polar: 24, azimuthal: 48 });
        assert_eq!(Resolution::level(4).coarsened(), Some(Resolution::level(3)));
        assert_eq!(Resolution::level(0).coarsened(), None);
        assert!(Resolution::new(4, 1, 8).is_err());
    }

    #[test]
    fn dof_round_trip() {
        let g = ShellGrid::new(2.0, Resolution::level(1)).unwrap();
        assert_eq!(g.len(), g.resolution.unknowns());
        for d in 0..g.len() {
            let (i, j, k) = g.node(d);
            assert_eq!(g.dof(i, j, k), d);
        }
    }

    #[test]
    fn radii_are_nested_under_doubling() {
        let coarse = ShellGrid::new(3.0, Resolution::level(1)).unwrap();
        let fine = ShellGrid::new(3.0, Resolution::level(2)).unwrap();
        for (i, r) in coarse.radii.iter().enumerate() {
            assert!((fine.radii[2 * i] - r).abs() < 1e-14);
        }
        assert_eq!(fine.radii[0], 1.0);
        assert_eq!(*fine.radii.last().unwrap(), 3.0);
    }

    #[test]
    fn neighbour_lists_are_symmetric() {
        let g = ShellGrid::new(2.0, Resolution::new(3, 4, 5).unwrap()).unwrap();
        let mut a = Vec::new();
        let mut b = Vec::new();
        for d in 0..g.len() {
            g.neighbours(d, &mut a);
            assert!(a.contains(&d));
            for &c in &a {
                g.neighbours(c, &mut b);
                assert!(b.contains(&d), "{d} -> {c}");
            }
        }
    }
}

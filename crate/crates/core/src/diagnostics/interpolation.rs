//! Moment interpolation `||l_k||_{L^q} <= C ||g||_inf^{1-theta} ||l_m||_{L^1}^theta`
//! with `l_j(x) = integral |v|^j g(x, v) dv`, `theta = (k + d) / (m + d)`, `q = 1 / theta`.
//!
//! Derivation of `C`. Split the velocity integral at radius `R`:
//!
//! ```text
//! l_k(x) <= G w_d R^(k+d) / (k+d) + R^(k-m) l_m(x) = a R^alpha + b R^(-beta)
//! ```
//!
//! with `G = ||g||_inf`, `w_d` the measure of the unit sphere (2 for d = 1,
//! 2 pi for d = 2), `alpha = k + d`, `beta = m - k`. The minimum over `R` is
//! attained at `R^(alpha+beta) = beta b / (alpha a)` and equals
//!
//! ```text
//! theta^(-theta) (1 - theta)^(-(1-theta)) a^(1-theta) b^theta,   theta = alpha / (alpha + beta).
//! ```
//!
//! Raising to the power `1/theta` and integrating in `x` gives the inequality with
//! `C = (w_d / (k+d))^(1-theta) theta^(-theta) (1-theta)^(-(1-theta))`.
//! Since the split holds for the exact velocity integrals of any bounded `g`,
//! it holds exactly for the piecewise-constant functions below.

use alloc::vec::Vec;
use core::f64::consts::PI;

use crate::domain::TorusGrid;
use crate::error::{Error, Result};
use crate::particles::ParticleEnsemble;

fn sphere_measure(d: usize) -> f64 {
    if d == 1 {
        2.0
    } else {
        2.0 * PI
    }
}

pub fn interpolation_constant(d: usize, m: f64, k: f64) -> Result<f64> {
    if !(0.0 <= k && k < m) {
        return Err(Error::DomainError(alloc::format!("need 0 <= k < m, got k={k}, m={m}")));
    }
    let df = d as f64;
    let theta = (k + df) / (m + df);
    Ok(libm::pow(sphere_measure(d) / (k + df), 1.0 - theta)
        * libm::pow(theta, -theta)
        * libm::pow(1.0 - theta, -(1.0 - theta)))
}

/// Nonnegative function on `T^d x B(0, R)`, constant on products of a grid
/// cell and a polar velocity cell (shell by angular sector; two signs in d = 1).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSpaceGrid {
    grid: TorusGrid,
    radii: Vec<f64>,
    sectors: usize,
    /// Indexed `[x][shell][sector]`.
    values: Vec<f64>,
}

impl PhaseSpaceGrid {
    pub fn new(grid: TorusGrid, radii: Vec<f64>, sectors: usize, values: Vec<f64>) -> Result<Self> {
        if radii.len() < 2 || radii[0] != 0.0 || radii.windows(2).any(|w| w[1].is_nan() || w[1] <= w[0]) {
            return Err(Error::DomainError("radii must increase strictly from 0".into()));
        }
        if (grid.dim() == 1 && sectors != 2) || sectors == 0 {
            return Err(Error::DomainError("d = 1 uses exactly two sectors".into()));
        }
        let expected = grid.len() * (radii.len() - 1) * sectors;
        if values.len() != expected {
            return Err(Error::LengthMismatch { expected, got: values.len() });
        }
        if values.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
            return Err(Error::DomainError("g must be finite and nonnegative".into()));
        }
        Ok(Self { grid, radii, sectors, values })
    }

    /// Histogram density of an ensemble: nearest-node cells in `x`, `shells`
    /// equal-width shells up to just beyond the largest speed.
    pub fn bin_ensemble(ens: &ParticleEnsemble, grid: TorusGrid, shells: usize, sectors: usize) -> Result<Self> {
        if ens.dim() != grid.dim() {
            return Err(Error::UnsupportedDimension(ens.dim()));
        }
        let sectors = if grid.dim() == 1 { 2 } else { sectors.max(1) };
        let shells = shells.max(1);
        let top = ens.max_speed() * (1.0 + 1e-9) + 1e-12;
        let radii: Vec<f64> = (0..=shells).map(|i| top * i as f64 / shells as f64).collect();
        let mut values = alloc::vec![0.0; grid.len() * shells * sectors];
        let n = grid.cells_per_dim();
        for p in 0..ens.len() {
            let x = ens.position(p);
            let v = ens.velocity(p);
            let mut idx = [0usize; 2];
            for a in 0..grid.dim() {
                let s = libm::floor((x[a] + 0.5) / grid.spacing() + 0.5) as i64;
                idx[a] = s.rem_euclid(n as i64) as usize;
            }
            let speed = libm::sqrt(v.iter().map(|c| c * c).sum());
            let shell = ((speed / top * shells as f64) as usize).min(shells - 1);
            let sector = if grid.dim() == 1 {
                usize::from(v[0] < 0.0)
            } else {
                let angle = libm::atan2(v[1], v[0]) + PI;
                ((angle / (2.0 * PI) * sectors as f64) as usize).min(sectors - 1)
            };
            values[(grid.flat_index(idx) * shells + shell) * sectors + sector] += ens.weight(p);
        }
        let mut out = Self { grid, radii, sectors, values };
        for x in 0..grid.len() {
            for shell in 0..shells {
                let vol = grid.cell_volume() * out.velocity_cell_volume(shell);
                for s in 0..sectors {
                    out.values[(x * shells + shell) * sectors + s] /= vol;
                }
            }
        }
        Ok(out)
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn radii(&self) -> &[f64] {
        &self.radii
    }

    pub fn sectors(&self) -> usize {
        self.sectors
    }

    pub fn shells(&self) -> usize {
        self.radii.len() - 1
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().copied().fold(0.0, f64::max)
    }

    fn sector_measure(&self) -> f64 {
        if self.grid.dim() == 1 {
            1.0
        } else {
            2.0 * PI / self.sectors as f64
        }
    }

    /// Lebesgue measure of one (shell, sector) cell.
    pub fn velocity_cell_volume(&self, shell: usize) -> f64 {
        self.shell_moment(shell, 0.0)
    }

    /// `integral |v|^j` over one (shell, sector) cell.
    fn shell_moment(&self, shell: usize, j: f64) -> f64 {
        let e = j + self.grid.dim() as f64;
        let (r1, r2) = (self.radii[shell], self.radii[shell + 1]);
        self.sector_measure() * (libm::pow(r2, e) - libm::pow(r1, e)) / e
    }

    /// Values of `l_j` on the spatial grid.
    pub fn velocity_moment(&self, j: f64) -> Vec<f64> {
        let shells = self.shells();
        let weights: Vec<f64> = (0..shells).map(|s| self.shell_moment(s, j)).collect();
        (0..self.grid.len())
            .map(|x| {
                (0..shells)
                    .map(|s| {
                        let row = &self.values[(x * shells + s) * self.sectors..][..self.sectors];
                        weights[s] * row.iter().sum::<f64>()
                    })
                    .sum()
            })
            .collect()
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        let mut out = self.clone();
        out.values.iter_mut().for_each(|v| *v *= lambda);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterpolationReport {
    pub lhs: f64,
    pub rhs: f64,
    pub constant: f64,
    pub pass: bool,
}

pub fn interpolation_check(g: &PhaseSpaceGrid, m: f64, k: f64) -> Result<InterpolationReport> {
    let d = g.grid().dim();
    let constant = interpolation_constant(d, m, k)?;
    let theta = (k + d as f64) / (m + d as f64);
    let vol = g.grid().cell_volume();
    let lk = g.velocity_moment(k);
    let lm = g.velocity_moment(m);
    let lhs = libm::pow(lk.iter().map(|v| libm::pow(*v, 1.0 / theta)).sum::<f64>() * vol, theta);
    let lm_l1 = lm.iter().sum::<f64>() * vol;
    let rhs = constant * libm::pow(g.sup_norm(), 1.0 - theta) * libm::pow(lm_l1, theta);
    Ok(InterpolationReport { lhs, rhs, constant, pass: lhs <= rhs * (1.0 + 1e-9) })
}

//! Scaled mollifier `chi_r(x) = r^{-d} chi(x / r)` and periodic convolution.
//!
//! The base profile is the standard bump `exp(-1 / (1 - |x|^2))` on the unit
//! ball. Grid samples are renormalised to unit discrete mass.

use alloc::vec::Vec;

use crate::domain::{coulomb_kernel, ScalarField, Spectral, TorusGrid, VectorField};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct Mollifier {
    r: f64,
    samples: ScalarField,
    multiplier: Vec<f64>,
    spectral: Spectral,
}

fn bump(s2: f64) -> f64 {
    if s2 < 1.0 {
        libm::exp(-1.0 / (1.0 - s2))
    } else {
        0.0
    }
}

pub fn make_mollifier(grid: TorusGrid, r: f64) -> Result<Mollifier> {
    if !(r > 0.0 && r <= 0.25) {
        return Err(Error::InvalidWidth { r });
    }
    if r < 2.0 * grid.spacing() {
        return Err(Error::UnresolvableWidth { r, spacing: grid.spacing() });
    }
    let mut samples = ScalarField::from_fn(grid, |x| {
        let s2: f64 = x.iter().map(|v| (v / r) * (v / r)).sum();
        bump(s2)
    });
    let mass = samples.values().iter().sum::<f64>() * grid.cell_volume();
    samples.values_mut().iter_mut().for_each(|v| *v /= mass);

    // Reorder so that index 0 holds the zero displacement.
    let n = grid.cells_per_dim();
    let half = n / 2;
    let mut displaced = alloc::vec![0.0; grid.len()];
    for (i, &v) in samples.values().iter().enumerate() {
        let idx = grid.multi_index(i);
        let j = grid.flat_index([(idx[0] + n - half) % n, (idx[1] + n - half) % n]);
        displaced[j] = v;
    }
    let spectral = Spectral::new(grid);
    let mut multiplier: Vec<f64> = spectral.forward(&displaced).into_iter().map(|c| c.re).collect();
    multiplier[0] = 1.0;
    Ok(Mollifier { r, samples, multiplier, spectral })
}

impl Mollifier {
    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn grid(&self) -> TorusGrid {
        self.samples.grid()
    }

    /// Samples of `chi_r` centred on the origin node.
    pub fn samples(&self) -> &ScalarField {
        &self.samples
    }

    /// Fourier multiplier of convolution with `chi_r`.
    pub fn multiplier(&self) -> &[f64] {
        &self.multiplier
    }

    /// `h^d sum chi_r`.
    pub fn mass(&self) -> f64 {
        self.samples.values().iter().sum::<f64>() * self.grid().cell_volume()
    }

    pub fn convolve(&self, f: &ScalarField) -> Result<ScalarField> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(self.spectral.apply_multiplier(f, &self.multiplier))
    }

    pub fn convolve_vector(&self, v: &VectorField) -> Result<VectorField> {
        if v.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(self.spectral.apply_multiplier_vector(v, &self.multiplier))
    }
}

pub fn convolve(m: &Mollifier, f: &ScalarField) -> Result<ScalarField> {
    m.convolve(f)
}

/// Uniform-in-`r` bound of the mollified Coulomb kernel at one width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelBound {
    pub r: f64,
    /// `sup_{x != 0} |chi_r * K (x)| / (1 + |x|^{-(d-1)})`.
    pub bound: f64,
}

pub fn regularised_kernel_bound(grid: TorusGrid, r_list: &[f64]) -> Result<Vec<KernelBound>> {
    let kernel = coulomb_kernel(grid);
    let exponent = kernel.singular_exponent() as f64;
    r_list
        .iter()
        .map(|&r| {
            let m = make_mollifier(grid, r)?;
            let smoothed = m.convolve_vector(kernel.field())?;
            let bound = (0..grid.len())
                .filter(|&i| i != kernel.singular_index())
                .map(|i| {
                    let v = smoothed.at(i);
                    let mag = libm::sqrt(v[..grid.dim()].iter().map(|c| c * c).sum());
                    mag / (1.0 + libm::pow(grid.node_radius(i), -exponent))
                })
                .fold(0.0, f64::max);
            Ok(KernelBound { r, bound })
        })
        .collect()
}

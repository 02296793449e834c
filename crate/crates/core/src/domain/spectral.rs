//! Fourier-space differential operators on the torus.
//!
//! Forward transforms carry the `1/N` factor, so coefficient `0` is the grid
//! mean. Wavenumbers are `2 pi j` with `j` in `[-n/2, n/2)`. First
//! derivatives drop the Nyquist mode (it has no real odd partner); the
//! Laplacian keeps it, which makes the inverse Laplacian well defined on
//! every nonzero mode.

use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;
use num_complex::Complex64;

use super::field::{ScalarField, VectorField};
use super::grid::TorusGrid;
use crate::fft::Fft;

/// Cached transform plan and wavenumber tables for one grid.
#[derive(Debug, Clone)]
pub struct Spectral {
    grid: TorusGrid,
    fft: Fft,
    wavenumber: Vec<f64>,
    derivative: Vec<f64>,
}

impl Spectral {
    pub fn new(grid: TorusGrid) -> Self {
        let n = grid.cells_per_dim();
        let wavenumber: Vec<f64> = (0..n)
            .map(|j| {
                let signed = if j < n / 2 { j as f64 } else { j as f64 - n as f64 };
                2.0 * PI * signed
            })
            .collect();
        let derivative = wavenumber
            .iter()
            .enumerate()
            .map(|(j, &k)| if j == n / 2 { 0.0 } else { k })
            .collect();
        Self { grid, fft: Fft::new(n), wavenumber, derivative }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    /// Normalised forward transform of real samples.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        let scale = 1.0 / buf.len() as f64;
        buf.iter_mut().for_each(|c| *c *= scale);
        buf
    }

    /// Inverse transform, keeping the real part.
    pub fn backward_real(&self, mut coeffs: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut coeffs, true);
        coeffs.into_iter().map(|c| c.re).collect()
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.grid.cells_per_dim();
        let run = |fft: &Fft, b: &mut [Complex64]| {
            if inverse {
                fft.backward(b)
            } else {
                fft.forward(b)
            }
        };
        match self.grid.dim() {
            1 => run(&self.fft, buf),
            _ => {
                for row in buf.chunks_mut(n) {
                    run(&self.fft, row);
                }
                let mut col = vec![Complex64::new(0.0, 0.0); n];
                for j in 0..n {
                    for i in 0..n {
                        col[i] = buf[i * n + j];
                    }
                    run(&self.fft, &mut col);
                    for i in 0..n {
                        buf[i * n + j] = col[i];
                    }
                }
            }
        }
    }

    /// `|k|^2` of the mode stored at flat index `flat`.
    pub fn k_squared(&self, flat: usize) -> f64 {
        let idx = self.grid.multi_index(flat);
        (0..self.grid.dim()).map(|a| self.wavenumber[idx[a]] * self.wavenumber[idx[a]]).sum()
    }

    /// Derivative symbol along `axis` (Nyquist removed).
    fn derivative_symbol(&self, flat: usize, axis: usize) -> f64 {
        self.derivative[self.grid.multi_index(flat)[axis]]
    }

    /// Multiplies every Fourier coefficient by a real symbol.
    pub fn apply_real_symbol(&self, f: &ScalarField, symbol: impl Fn(usize) -> f64) -> ScalarField {
        let mut c = self.forward(f.values());
        for (i, ci) in c.iter_mut().enumerate() {
            *ci *= symbol(i);
        }
        ScalarField::from_raw(self.grid, self.backward_real(c))
    }

    /// Multiplies the transform by a precomputed multiplier table.
    pub fn apply_multiplier(&self, f: &ScalarField, multiplier: &[f64]) -> ScalarField {
        self.apply_real_symbol(f, |i| multiplier[i])
    }

    pub fn laplacian(&self, f: &ScalarField) -> ScalarField {
        self.apply_real_symbol(f, |i| -self.k_squared(i))
    }

    /// Zero-mean `u` with `laplacian(u) = f - mean(f)`.
    pub fn inverse_laplacian(&self, f: &ScalarField) -> ScalarField {
        self.apply_real_symbol(f, |i| if i == 0 { 0.0 } else { -1.0 / self.k_squared(i) })
    }

    /// Zero-mean `u` with `(-laplacian + shift) u = f` on nonzero modes and
    /// `shift * u_0 = f_0` on the mean mode.
    pub fn solve_shifted(&self, f: &ScalarField, shift: f64) -> ScalarField {
        self.apply_real_symbol(f, |i| 1.0 / (self.k_squared(i) + shift))
    }

    pub fn gradient(&self, f: &ScalarField) -> VectorField {
        let c = self.forward(f.values());
        let components = (0..self.grid.dim())
            .map(|axis| {
                let d: Vec<Complex64> = c
                    .iter()
                    .enumerate()
                    .map(|(i, &ci)| ci * Complex64::new(0.0, self.derivative_symbol(i, axis)))
                    .collect();
                self.backward_real(d)
            })
            .collect();
        VectorField::from_raw(self.grid, components)
    }

    pub fn divergence(&self, v: &VectorField) -> ScalarField {
        let mut acc = vec![Complex64::new(0.0, 0.0); self.grid.len()];
        for axis in 0..self.grid.dim() {
            let c = self.forward(v.component(axis));
            for (i, (a, ci)) in acc.iter_mut().zip(c).enumerate() {
                *a += ci * Complex64::new(0.0, self.derivative_symbol(i, axis));
            }
        }
        ScalarField::from_raw(self.grid, self.backward_real(acc))
    }

    /// `integral |grad f|^2`, computed with the same symbol as [`Spectral::gradient`].
    pub fn dirichlet_energy(&self, f: &ScalarField) -> f64 {
        let c = self.forward(f.values());
        c.iter()
            .enumerate()
            .map(|(i, ci)| {
                let k2: f64 = (0..self.grid.dim()).map(|a| self.derivative_symbol(i, a)).map(|k| k * k).sum();
                k2 * ci.norm_sqr()
            })
            .sum()
    }

    /// Applies a real symbol to each component of a vector field.
    pub fn apply_multiplier_vector(&self, v: &VectorField, multiplier: &[f64]) -> VectorField {
        let components = v
            .components()
            .iter()
            .map(|c| {
                let f = ScalarField::from_raw(self.grid, c.clone());
                self.apply_multiplier(&f, multiplier).into_values()
            })
            .collect();
        VectorField::from_raw(self.grid, components)
    }
}

/// Spectral Laplacian.
pub fn laplacian(f: &ScalarField) -> ScalarField {
    Spectral::new(f.grid()).laplacian(f)
}

/// Spectral gradient.
pub fn gradient(f: &ScalarField) -> VectorField {
    Spectral::new(f.grid()).gradient(f)
}

/// Spectral divergence.
pub fn divergence(v: &VectorField) -> ScalarField {
    Spectral::new(v.grid()).divergence(v)
}

use alloc::vec;
use alloc::vec::Vec;

use super::grid::{TorusGrid, MAX_DIM};
use crate::error::{Error, Result};

/// Real function sampled at the nodes of a [`TorusGrid`].
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarField {
    grid: TorusGrid,
    values: Vec<f64>,
}

impl ScalarField {
    pub fn new(grid: TorusGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { grid, values })
    }

    /// Skips the finiteness scan; callers guarantee the invariant.
    pub(crate) fn from_raw(grid: TorusGrid, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, values }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    pub fn constant(grid: TorusGrid, c: f64) -> Self {
        Self { grid, values: vec![c; grid.len()] }
    }

    /// Samples `f` at every node.
    pub fn from_fn(grid: TorusGrid, mut f: impl FnMut(&[f64]) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|i| {
                let x = grid.node(i);
                f(&x[..grid.dim()])
            })
            .collect();
        Self { grid, values }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Grid average, which equals the integral over the unit torus.
    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    pub fn sup_norm(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// Grid `L^p` norm, `(h^d sum |f|^p)^(1/p)`.
    pub fn lp_norm(&self, p: f64) -> f64 {
        let s: f64 = self.values.iter().map(|v| libm::pow(v.abs(), p)).sum();
        libm::pow(s * self.grid.cell_volume(), 1.0 / p)
    }

    /// `h^d sum f g`.
    pub fn inner(&self, other: &Self) -> f64 {
        debug_assert_eq!(self.grid, other.grid);
        self.values.iter().zip(&other.values).map(|(a, b)| a * b).sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn map(&self, mut f: impl FnMut(f64) -> f64) -> Self {
        Self { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let values = self.values.iter().zip(&other.values).map(|(&a, &b)| f(a, b)).collect();
        Ok(Self { grid: self.grid, values })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|v| v * c)
    }

    /// Subtracts the grid mean in place.
    pub fn remove_mean(&mut self) {
        let m = self.mean();
        self.values.iter_mut().for_each(|v| *v -= m);
    }
}

/// Vector field with one sampled component per spatial axis.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    grid: TorusGrid,
    components: Vec<Vec<f64>>,
}

impl VectorField {
    pub fn new(grid: TorusGrid, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::LengthMismatch { expected: grid.dim(), got: components.len() });
        }
        for c in &components {
            if c.len() != grid.len() {
                return Err(Error::LengthMismatch { expected: grid.len(), got: c.len() });
            }
            if let Some(i) = c.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite(i));
            }
        }
        Ok(Self { grid, components })
    }

    pub(crate) fn from_raw(grid: TorusGrid, components: Vec<Vec<f64>>) -> Self {
        Self { grid, components }
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self { grid, components: vec![vec![0.0; grid.len()]; grid.dim()] }
    }

    pub fn grid(&self) -> TorusGrid {
        self.grid
    }

    pub fn component(&self, axis: usize) -> &[f64] {
        &self.components[axis]
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.components
    }

    pub fn at(&self, flat: usize) -> [f64; MAX_DIM] {
        let mut out = [0.0; MAX_DIM];
        for (a, c) in self.components.iter().enumerate() {
            out[a] = c[flat];
        }
        out
    }

    /// Largest pointwise Euclidean magnitude.
    pub fn sup_norm(&self) -> f64 {
        (0..self.grid.len())
            .map(|i| libm::sqrt(self.components.iter().map(|c| c[i] * c[i]).sum()))
            .fold(0.0, f64::max)
    }

    /// `integral |F|^2 dx`.
    pub fn l2_norm_sq(&self) -> f64 {
        self.components.iter().flat_map(|c| c.iter()).map(|v| v * v).sum::<f64>()
            * self.grid.cell_volume()
    }

    pub fn zip_map(&self, other: &Self, mut f: impl FnMut(f64, f64) -> f64) -> Result<Self> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch);
        }
        let components = self
            .components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(&x, &y)| f(x, y)).collect())
            .collect();
        Ok(Self { grid: self.grid, components })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scale(&self, c: f64) -> Self {
        let components = self.components.iter().map(|v| v.iter().map(|x| x * c).collect()).collect();
        Self { grid: self.grid, components }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = TorusGrid::new(1, 8).unwrap();
        assert!(matches!(ScalarField::new(g, vec![0.0; 7]), Err(Error::LengthMismatch { .. })));
        let mut v = vec![0.0; 8];
        v[3] = f64::NAN;
        assert_eq!(ScalarField::new(g, v), Err(Error::NonFinite(3)));
    }

    #[test]
    fn two_cell_lp_norm() {
        // values {2, 0} on a uniform grid: (1/2 * 2^2)^(1/2) = sqrt 2
        let g = TorusGrid::new(1, 8).unwrap();
        let f = ScalarField::new(g, vec![2.0, 0.0, 2.0, 0.0, 2.0, 0.0, 2.0, 0.0]).unwrap();
        assert!((f.lp_norm(2.0) - libm::sqrt(2.0)).abs() < 1e-15);
        assert_eq!(f.mean(), 1.0);
    }
}

//! Green's function of the negative Laplacian and the Coulomb kernel.

use alloc::vec;

use super::field::{ScalarField, VectorField};
use super::grid::{TorusGrid, MAX_DIM};
use super::spectral::Spectral;

/// Zero-mean `G` solving `-laplacian G = delta_0 - 1`, with the delta
/// represented as the unit-mass impulse `1 / h^d` at the origin node.
pub fn green_function(grid: TorusGrid) -> ScalarField {
    let mut impulse = vec![0.0; grid.len()];
    impulse[grid.origin()] = 1.0 / grid.cell_volume();
    let delta = ScalarField::from_raw(grid, impulse);
    Spectral::new(grid).inverse_laplacian(&delta).scale(-1.0)
}

/// Grid samples of the Coulomb kernel `K = -grad G`.
///
/// The origin node is singular for the continuum kernel; its sample is kept
/// but excluded from everything that inspects the kernel's size.
#[derive(Debug, Clone)]
pub struct CoulombKernelView {
    values: VectorField,
    singular_index: usize,
}

impl CoulombKernelView {
    pub fn grid(&self) -> TorusGrid {
        self.values.grid()
    }

    pub fn field(&self) -> &VectorField {
        &self.values
    }

    pub fn singular_index(&self) -> usize {
        self.singular_index
    }

    /// The kernel blows up like `|x|^{-(d-1)}`.
    pub fn singular_exponent(&self) -> usize {
        self.grid().dim() - 1
    }

    /// Kernel value at a node, `None` at the singular origin node.
    pub fn value(&self, flat: usize) -> Option<[f64; MAX_DIM]> {
        (flat != self.singular_index).then(|| self.values.at(flat))
    }

    /// `max |K(x) + K(-x)|` over nodes.
    pub fn antisymmetry_defect(&self) -> f64 {
        let g = self.grid();
        (0..g.len())
            .map(|i| {
                let a = self.values.at(i);
                let b = self.values.at(g.mirror(i));
                libm::sqrt((0..g.dim()).map(|k| (a[k] + b[k]) * (a[k] + b[k])).sum())
            })
            .fold(0.0, f64::max)
    }

    /// `sup |K(x)| |x|^{d-1}` over nodes with `0 < |x| <= radius`.
    pub fn scaled_singularity(&self, radius: f64) -> f64 {
        let g = self.grid();
        (0..g.len())
            .filter(|&i| i != self.singular_index)
            .filter_map(|i| {
                let r = g.node_radius(i);
                (r <= radius).then(|| {
                    let k = self.values.at(i);
                    let mag = libm::sqrt((0..g.dim()).map(|a| k[a] * k[a]).sum());
                    mag * libm::pow(r, self.singular_exponent() as f64)
                })
            })
            .fold(0.0, f64::max)
    }
}

pub fn coulomb_kernel(grid: TorusGrid) -> CoulombKernelView {
    let g = green_function(grid);
    let values = Spectral::new(grid).gradient(&g).scale(-1.0);
    CoulombKernelView { values, singular_index: grid.origin() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    /// Exact torus Green's function in one dimension.
    fn green_1d_exact(x: f64) -> f64 {
        x * x / 2.0 - x.abs() / 2.0 + 1.0 / 12.0
    }

    /// Fourier series of the exact Green's function truncated to the modes a
    /// grid of `n` nodes resolves, summed directly. The Nyquist cosine enters
    /// with its single discrete coefficient.
    fn green_1d_truncated(x: f64, n: usize) -> f64 {
        let mut s = 0.0;
        for k in 1..n / 2 {
            s += 2.0 * libm::cos(2.0 * PI * k as f64 * x) / (4.0 * PI * PI * (k * k) as f64);
        }
        let kn = (n / 2) as f64;
        s + libm::cos(2.0 * PI * kn * x) / (4.0 * PI * PI * kn * kn)
    }

    #[test]
    fn green_1d_matches_truncated_series() {
        for n in [16usize, 64, 128] {
            let g = TorusGrid::new(1, n).unwrap();
            let gf = green_function(g);
            assert!(gf.mean().abs() < 1e-13);
            for i in 0..n {
                let x = g.node(i)[0];
                assert!((gf.values()[i] - green_1d_truncated(x, n)).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn green_1d_converges_to_closed_form() {
        // The neglected tail is bounded by 2 sum_{k >= n/2} 1/(4 pi^2 k^2)
        // <= 1 / (2 pi^2 (n/2 - 1)).
        let mut previous = f64::INFINITY;
        for n in [32usize, 64, 128, 256] {
            let g = TorusGrid::new(1, n).unwrap();
            let gf = green_function(g);
            let err = (0..n)
                .map(|i| (gf.values()[i] - green_1d_exact(g.node(i)[0])).abs())
                .fold(0.0, f64::max);
            let bound = 1.0 / (2.0 * PI * PI * (n as f64 / 2.0 - 1.0));
            assert!(err <= bound, "n = {n}: {err} > {bound}");
            assert!(err < previous);
            previous = err;
        }
    }

    #[test]
    fn kernel_is_odd_and_integrates_to_zero() {
        for (d, n) in [(1, 64), (2, 32)] {
            let k = coulomb_kernel(TorusGrid::new(d, n).unwrap());
            assert!(k.antisymmetry_defect() < 1e-10);
            for c in k.field().components() {
                let s: f64 = c.iter().sum::<f64>() / c.len() as f64;
                assert!(s.abs() < 1e-10);
            }
            assert!(k.value(k.singular_index()).is_none());
        }
    }

    #[test]
    fn planar_singularity_is_inverse_distance() {
        // |K(x)| |x| stays bounded on 0 < |x| <= 1/4 as the grid refines;
        // the whole-plane kernel gives exactly 1/(2 pi).
        let scaled: alloc::vec::Vec<f64> = [32usize, 64, 128]
            .iter()
            .map(|&n| coulomb_kernel(TorusGrid::new(2, n).unwrap()).scaled_singularity(0.25))
            .collect();
        for s in &scaled {
            assert!(*s < 1.0 / (2.0 * PI) * 1.5, "{scaled:?}");
        }
        assert!((scaled[2] - scaled[1]).abs() < 0.1 * scaled[1]);
    }
}

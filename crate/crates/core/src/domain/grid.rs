use crate::error::{Error, Result};

/// Largest supported spatial dimension.
pub const MAX_DIM: usize = 2;

/// Uniform periodic grid over `[-1/2, 1/2)^d`.
///
/// Node `i` along an axis sits at `-1/2 + i * h`, so the node with index
/// `n / 2` is the origin. Flat indices are row-major with axis 0 slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct TorusGrid {
    dim: usize,
    n: usize,
}

impl TorusGrid {
    pub const MIN_CELLS: usize = 8;

    pub fn new(dim: usize, cells_per_dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if cells_per_dim < Self::MIN_CELLS || !cells_per_dim.is_power_of_two() {
            return Err(Error::InvalidResolution(cells_per_dim));
        }
        Ok(Self { dim, n: cells_per_dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn cells_per_dim(&self) -> usize {
        self.n
    }

    pub fn spacing(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Total number of nodes, `n^d`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        libm::pow(self.spacing(), self.dim as f64)
    }

    pub fn multi_index(&self, flat: usize) -> [usize; MAX_DIM] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.n, flat % self.n],
        }
    }

    pub fn flat_index(&self, idx: [usize; MAX_DIM]) -> usize {
        match self.dim {
            1 => idx[0] % self.n,
            _ => (idx[0] % self.n) * self.n + idx[1] % self.n,
        }
    }

    /// Coordinates of a node; this is also its displacement from the origin.
    pub fn node(&self, flat: usize) -> [f64; MAX_DIM] {
        let idx = self.multi_index(flat);
        let h = self.spacing();
        let half = (self.n / 2) as f64;
        let mut x = [0.0; MAX_DIM];
        for (a, xa) in x.iter_mut().enumerate().take(self.dim) {
            *xa = (idx[a] as f64 - half) * h;
        }
        x
    }

    /// Flat index of the node at `x = 0`.
    pub fn origin(&self) -> usize {
        self.flat_index([self.n / 2, self.n / 2])
    }

    /// Flat index of the node at `-x`.
    pub fn mirror(&self, flat: usize) -> usize {
        let idx = self.multi_index(flat);
        let m = |i: usize| (self.n - i) % self.n;
        self.flat_index([m(idx[0]), m(idx[1])])
    }

    /// Euclidean length of a node's displacement from the origin.
    pub fn node_radius(&self, flat: usize) -> f64 {
        let x = self.node(flat);
        libm::sqrt(x[..self.dim].iter().map(|v| v * v).sum())
    }
}

/// Reduces a coordinate to `[-1/2, 1/2)`.
pub fn wrap_coordinate(x: f64) -> f64 {
    if (-0.5..0.5).contains(&x) {
        return x;
    }
    let mut r = x - libm::floor(x + 0.5);
    if r >= 0.5 {
        r -= 1.0;
    }
    if r < -0.5 {
        r += 1.0;
    }
    r
}

/// Distance on the unit torus: the infimum over integer shifts of the
/// Euclidean distance.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    let sq: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let d = a - b;
            let d = d - libm::round(d);
            d * d
        })
        .sum();
    libm::sqrt(sq)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn rejects_bad_grids() {
        assert_eq!(TorusGrid::new(3, 16), Err(Error::UnsupportedDimension(3)));
        assert_eq!(TorusGrid::new(1, 4), Err(Error::InvalidResolution(4)));
        assert_eq!(TorusGrid::new(2, 24), Err(Error::InvalidResolution(24)));
        assert!(TorusGrid::new(2, 8).is_ok());
    }

    #[test]
    fn unit_volume() {
        for (d, n) in [(1, 8), (1, 128), (2, 16), (2, 64)] {
            let g = TorusGrid::new(d, n).unwrap();
            assert_eq!(g.cell_volume() * g.len() as f64, 1.0);
        }
    }

    #[test]
    fn origin_and_mirror() {
        let g = TorusGrid::new(2, 16).unwrap();
        assert_eq!(g.node(g.origin()), [0.0, 0.0]);
        assert_eq!(g.mirror(g.origin()), g.origin());
        for i in 0..g.len() {
            let x = g.node(i);
            let y = g.node(g.mirror(i));
            assert_eq!(wrap_coordinate(-x[0]), y[0]);
            assert_eq!(wrap_coordinate(-x[1]), y[1]);
        }
    }

    #[test]
    fn distance_examples() {
        assert!((torus_distance(&[0.4], &[-0.4]) - 0.2).abs() < 1e-15);
        assert_eq!(torus_distance(&[0.1, -0.3], &[0.1, -0.3]), 0.0);
        let d = torus_distance(&[0.5, 0.5], &[0.0, 0.0]);
        assert!((d - libm::sqrt(2.0) / 2.0).abs() < 1e-15);
        // unreduced inputs are reduced
        assert!((torus_distance(&[1.4], &[-0.4]) - 0.2).abs() < 1e-14);
    }

    #[test]
    fn wrap_lands_in_half_open_cell() {
        for x in [-0.5, 0.5, 1.5, -1.5, -0.5 - 1e-17, 0.49999999999999994, 3.25] {
            let w = wrap_coordinate(x);
            assert!((-0.5..0.5).contains(&w), "{x} -> {w}");
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn triangle_inequality(a in prop::array::uniform2(-2.0f64..2.0),
                               b in prop::array::uniform2(-2.0f64..2.0),
                               c in prop::array::uniform2(-2.0f64..2.0)) {
            let ab = torus_distance(&a, &b);
            let bc = torus_distance(&b, &c);
            let ac = torus_distance(&a, &c);
            prop_assert!(ac <= ab + bc + 1e-15);
            prop_assert!(ab <= libm::sqrt(2.0) / 2.0 + 1e-15);
        }
    }
}

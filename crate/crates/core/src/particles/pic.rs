//! Particle-grid transfer stencils. Deposition and interpolation share one
//! shape function, so the two operations are adjoint.

use crate::domain::{ScalarField, TorusGrid, VectorField, MAX_DIM};
use crate::error::{Error, Result};

use super::ParticleEnsemble;

/// Particle shape function.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Deposition {
    /// Cloud-in-cell: piecewise-linear weights on `2^d` nodes.
    #[default]
    Linear,
    /// Cubic B-spline on `4^d` nodes; twice continuously differentiable.
    CubicSpline,
}

impl Deposition {
    pub fn name(self) -> &'static str {
        match self {
            Self::Linear => "linear",
            Self::CubicSpline => "cubic_spline",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "linear" => Some(Self::Linear),
            "cubic_spline" => Some(Self::CubicSpline),
            _ => None,
        }
    }
}

const MAX_NODES: usize = 16;

/// Nodes touched by a point, with shape weights and their gradients in `x`.
#[derive(Debug, Clone, Copy)]
pub struct Stencil {
    pub nodes: [usize; MAX_NODES],
    pub weights: [f64; MAX_NODES],
    pub gradients: [[f64; MAX_DIM]; MAX_NODES],
    pub len: usize,
}

struct Axis {
    nodes: [usize; 4],
    w: [f64; 4],
    dw: [f64; 4],
    len: usize,
}

fn axis(kind: Deposition, c: f64, n: usize) -> Axis {
    let s = (c + 0.5) * n as f64;
    // Positions are wrapped, so `s` lies in [0, n) up to rounding.
    let f = if s >= 0.0 { s as i64 } else { libm::floor(s) as i64 };
    let t = s - f as f64;
    let inv_h = n as f64;
    let wrap = |k: i64| if (0..n as i64).contains(&k) { k as usize } else { k.rem_euclid(n as i64) as usize };
    match kind {
        Deposition::Linear => Axis {
            nodes: [wrap(f), wrap(f + 1), 0, 0],
            w: [1.0 - t, t, 0.0, 0.0],
            dw: [-inv_h, inv_h, 0.0, 0.0],
            len: 2,
        },
        Deposition::CubicSpline => {
            let u = 1.0 - t;
            let t2 = t * t;
            let t3 = t2 * t;
            Axis {
                nodes: [wrap(f - 1), wrap(f), wrap(f + 1), wrap(f + 2)],
                w: [u * u * u / 6.0, (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0, (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0, t3 / 6.0],
                dw: [
                    -0.5 * u * u * inv_h,
                    (1.5 * t2 - 2.0 * t) * inv_h,
                    (-1.5 * t2 + t + 0.5) * inv_h,
                    0.5 * t2 * inv_h,
                ],
                len: 4,
            }
        }
    }
}

/// Calls `f(node, weight, gradient)` for every node in the stencil of `x`.
#[inline(always)]
fn visit(kind: Deposition, grid: TorusGrid, x: &[f64], mut f: impl FnMut(usize, f64, [f64; MAX_DIM])) {
    let n = grid.cells_per_dim();
    let ax = axis(kind, x[0], n);
    if grid.dim() == 1 {
        for a in 0..ax.len {
            f(ax.nodes[a], ax.w[a], [ax.dw[a], 0.0]);
        }
        return;
    }
    let ay = axis(kind, x[1], n);
    for b in 0..ay.len {
        for a in 0..ax.len {
            f(ax.nodes[a] * n + ay.nodes[b], ax.w[a] * ay.w[b], [ax.dw[a] * ay.w[b], ax.w[a] * ay.dw[b]]);
        }
    }
}

pub fn stencil_with(kind: Deposition, grid: TorusGrid, x: &[f64]) -> Stencil {
    let mut out =
        Stencil { nodes: [0; MAX_NODES], weights: [0.0; MAX_NODES], gradients: [[0.0; MAX_DIM]; MAX_NODES], len: 0 };
    visit(kind, grid, x, |node, w, g| {
        out.nodes[out.len] = node;
        out.weights[out.len] = w;
        out.gradients[out.len] = g;
        out.len += 1;
    });
    out
}

/// Cloud-in-cell stencil.
pub fn stencil(grid: TorusGrid, x: &[f64]) -> Stencil {
    stencil_with(Deposition::Linear, grid, x)
}

pub fn deposit_with(kind: Deposition, ens: &ParticleEnsemble, grid: TorusGrid) -> Result<ScalarField> {
    if ens.dim() != grid.dim() {
        return Err(Error::UnsupportedDimension(ens.dim()));
    }
    let mut rho = alloc::vec![0.0; grid.len()];
    for p in 0..ens.len() {
        let w = ens.weight(p);
        visit(kind, grid, ens.position(p), |node, s, _| rho[node] += w * s);
    }
    let inv = 1.0 / grid.cell_volume();
    rho.iter_mut().for_each(|r| *r *= inv);
    ScalarField::new(grid, rho)
}

/// Linear charge deposition; the result has unit grid mean.
pub fn deposit(ens: &ParticleEnsemble, grid: TorusGrid) -> Result<ScalarField> {
    deposit_with(Deposition::Linear, ens, grid)
}

pub fn interpolate_field_with(kind: Deposition, e: &VectorField, x: &[f64]) -> [f64; MAX_DIM] {
    let comps = e.components();
    let mut out = [0.0; MAX_DIM];
    visit(kind, e.grid(), x, |node, s, _| {
        for (o, comp) in out.iter_mut().zip(comps) {
            *o += s * comp[node];
        }
    });
    out
}

/// Evaluates a grid field at `x` with the cloud-in-cell stencil.
pub fn interpolate_field(e: &VectorField, x: &[f64]) -> [f64; MAX_DIM] {
    interpolate_field_with(Deposition::Linear, e, x)
}

pub fn interpolate_scalar(f: &ScalarField, x: &[f64]) -> f64 {
    let mut out = 0.0;
    visit(Deposition::Linear, f.grid(), x, |node, s, _| out += s * f.values()[node]);
    out
}

/// `-grad` of the shape-function interpolant of `phi` at `x`.
///
/// This is the force whose work exactly balances the change of potential
/// energy under deposition with the same shape.
pub fn potential_gradient(kind: Deposition, phi: &ScalarField, x: &[f64]) -> [f64; MAX_DIM] {
    let f = phi.values();
    let mut out = [0.0; MAX_DIM];
    visit(kind, phi.grid(), x, |node, _, g| {
        out[0] -= f[node] * g[0];
        out[1] -= f[node] * g[1];
    });
    out
}

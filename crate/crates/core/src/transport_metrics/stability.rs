//! Quantitative stability inequalities for the split potentials.

use crate::domain::{ScalarField, Spectral};
use crate::error::{Error, Result};
use crate::field_solver::FieldSolver;

use super::w2_densities_1d;

/// Relative slack allowed on the right-hand sides.
pub const RELATIVE_SLACK: f64 = 1e-9;

/// `integral |grad f|^2` as `-<f, laplacian f>`, consistent with the discrete Poisson operator.
fn gradient_energy(spectral: &Spectral, f: &ScalarField) -> f64 {
    -f.inner(&spectral.laplacian(f))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InequalityReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs - lhs`.
    pub margin: f64,
    pub pass: bool,
}

impl InequalityReport {
    fn new(lhs: f64, rhs: f64) -> Self {
        let margin = rhs - lhs;
        Self { lhs, rhs, margin, pass: margin >= -RELATIVE_SLACK * rhs.abs() }
    }
}

/// `||grad Ubar_1 - grad Ubar_2||^2 <= max_i ||h_i||_inf W_2(h_1, h_2)^2` on the circle.
pub fn loeper_inequality_check(h1: &ScalarField, h2: &ScalarField) -> Result<InequalityReport> {
    if h1.grid().dim() != 1 {
        return Err(Error::UnsupportedDimension(h1.grid().dim()));
    }
    let solver = FieldSolver::new(h1.grid());
    let u1 = solver.solve_linear(h1)?;
    let u2 = solver.solve_linear(h2)?;
    let lhs = gradient_energy(solver.spectral(), &u1.sub(&u2)?);
    let w2 = w2_densities_1d(h1, h2)?;
    Ok(InequalityReport::new(lhs, h1.sup_norm().max(h2.sup_norm()) * w2 * w2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct UhatStabilityReport {
    pub inequality: InequalityReport,
    /// `A = exp(max_i ||Ubar_i||_inf + max_i ||Uhat_i||_inf)`.
    pub a: f64,
    /// `||Ubar_1 - Ubar_2||_{L^2}^2`.
    pub ubar_gap: f64,
}

/// `||grad Uhat_1 - grad Uhat_2||^2 <= (A^3 / 4) ||Ubar_1 - Ubar_2||^2`.
pub fn uhat_stability_check(h1: &ScalarField, h2: &ScalarField) -> Result<UhatStabilityReport> {
    if h1.grid() != h2.grid() {
        return Err(Error::GridMismatch);
    }
    let solver = FieldSolver::new(h1.grid());
    let s1 = solver.solve_fields(h1, None)?;
    let s2 = solver.solve_fields(h2, None)?;
    let a = libm::exp(
        s1.u_bar.sup_norm().max(s2.u_bar.sup_norm()) + s1.u_hat.sup_norm().max(s2.u_hat.sup_norm()),
    );
    let dbar = s1.u_bar.sub(&s2.u_bar)?;
    let ubar_gap = dbar.inner(&dbar);
    let lhs = gradient_energy(solver.spectral(), &s1.u_hat.sub(&s2.u_hat)?);
    Ok(UhatStabilityReport { inequality: InequalityReport::new(lhs, 0.25 * a * a * a * ubar_gap), a, ubar_gap })
}

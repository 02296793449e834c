//! Split electrostatic solve: `laplacian(Ubar) = 1 - rho` (linear, zero
//! mean) and `laplacian(Uhat) = exp(Ubar + Uhat) - 1` (convex, nonlinear),
//! with `E = -grad(Ubar) - grad(Uhat)`.
//!
//! The nonlinear equation is the Euler-Lagrange equation of the strictly
//! convex functional
//!
//! ```text
//! J[h] = integral 1/2 |grad h|^2 + exp(Ubar + h) - h
//! ```
//!
//! and is solved by damped Newton. The Jacobian `laplacian - diag(exp(U))`
//! is symmetric negative definite, so every Newton direction descends `J`;
//! an Armijo backtracking search on `J` globalises the iteration. The inner
//! linear systems are solved by conjugate gradients preconditioned with the
//! spectral inverse of `-laplacian + mean(exp(U))`.

use alloc::vec::Vec;

use crate::domain::{ScalarField, Spectral, TorusGrid, VectorField};
use crate::error::{Error, Result};

/// Allowed deviation of a density's grid mean from one.
pub const UNIT_MASS_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// Sup-norm tolerance on `laplacian(Uhat) - exp(Ubar + Uhat) + 1`.
    pub tol: f64,
    pub max_iters: usize,
    /// Relative residual at which the inner conjugate-gradient solve stops.
    pub linear_rtol: f64,
    pub max_linear_iters: usize,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self { tol: 1e-10, max_iters: 50, linear_rtol: 1e-12, max_linear_iters: 1000 }
    }
}

/// Iteration record of one nonlinear solve.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonReport {
    pub iterations: usize,
    pub residual: f64,
    pub linear_iterations: usize,
    /// Value of the convex functional at every iterate, starting guess first.
    pub objective_history: Vec<f64>,
}

/// Output of one split field solve.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldSolution {
    pub u_bar: ScalarField,
    pub u_hat: ScalarField,
    pub e_bar: VectorField,
    pub e_hat: VectorField,
    pub newton_iters: usize,
    pub final_residual: f64,
}

impl FieldSolution {
    pub fn grid(&self) -> TorusGrid {
        self.u_bar.grid()
    }

    /// `U = Ubar + Uhat`.
    pub fn potential(&self) -> ScalarField {
        self.u_bar.zip_map(&self.u_hat, |a, b| a + b).expect("same grid")
    }

    /// `E = Ebar + Ehat`.
    pub fn field(&self) -> VectorField {
        self.e_bar.add(&self.e_hat).expect("same grid")
    }

    /// `integral exp(U)`, which equals one for an exact solve.
    pub fn electron_mass(&self) -> f64 {
        self.potential().map(libm::exp).mean()
    }
}

/// Solver with cached spectral tables for one grid.
#[derive(Debug, Clone)]
pub struct FieldSolver {
    spectral: Spectral,
    settings: NewtonSettings,
}

impl FieldSolver {
    pub fn new(grid: TorusGrid) -> Self {
        Self::with_settings(grid, NewtonSettings::default())
    }

    pub fn with_settings(grid: TorusGrid, settings: NewtonSettings) -> Self {
        Self { spectral: Spectral::new(grid), settings }
    }

    pub fn grid(&self) -> TorusGrid {
        self.spectral.grid()
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn settings(&self) -> NewtonSettings {
        self.settings
    }

    fn check_grid(&self, f: &ScalarField) -> Result<()> {
        if f.grid() != self.grid() {
            return Err(Error::GridMismatch);
        }
        Ok(())
    }

    /// Zero-mean `Ubar` with `laplacian(Ubar) = 1 - rho`.
    pub fn solve_linear(&self, rho: &ScalarField) -> Result<ScalarField> {
        self.check_grid(rho)?;
        let mean = rho.mean();
        if (mean - 1.0).abs() > UNIT_MASS_TOL {
            return Err(Error::NonUnitMass { mean });
        }
        Ok(self.spectral.inverse_laplacian(&rho.map(|r| 1.0 - r)))
    }

    /// Value of the convex functional whose minimiser is `Uhat`.
    pub fn objective(&self, u_bar: &ScalarField, h: &ScalarField) -> f64 {
        let coeffs = self.spectral.forward(h.values());
        let dirichlet: f64 =
            coeffs.iter().enumerate().map(|(i, c)| self.spectral.k_squared(i) * c.norm_sqr()).sum();
        let local = u_bar
            .values()
            .iter()
            .zip(h.values())
            .map(|(&u, &v)| libm::exp(u + v) - v)
            .sum::<f64>()
            / h.values().len() as f64;
        0.5 * dirichlet + local
    }

    /// `laplacian(h) - exp(Ubar + h) + 1`.
    pub fn nonlinear_residual(&self, u_bar: &ScalarField, h: &ScalarField) -> ScalarField {
        let lap = self.spectral.laplacian(h);
        let vals = lap
            .values()
            .iter()
            .zip(u_bar.values().iter().zip(h.values()))
            .map(|(&l, (&u, &v))| l - libm::exp(u + v) + 1.0)
            .collect();
        ScalarField::from_raw(self.grid(), vals)
    }

    /// Solves `(-laplacian + diag(w)) x = b` by preconditioned CG.
    fn solve_jacobian(&self, w: &[f64], b: &ScalarField) -> (ScalarField, usize) {
        let grid = self.grid();
        let n = grid.len();
        let shift = w.iter().sum::<f64>() / n as f64;
        let apply = |p: &ScalarField| -> ScalarField {
            let lap = self.spectral.laplacian(p);
            let v = lap.values().iter().zip(p.values()).zip(w).map(|((l, x), wi)| -l + wi * x).collect();
            ScalarField::from_raw(grid, v)
        };
        let dot = |a: &ScalarField, b: &ScalarField| -> f64 {
            a.values().iter().zip(b.values()).map(|(x, y)| x * y).sum()
        };
        let b_norm = libm::sqrt(dot(b, b));
        let mut x = ScalarField::zeros(grid);
        if b_norm == 0.0 {
            return (x, 0);
        }
        let mut r = b.clone();
        let mut z = self.spectral.solve_shifted(&r, shift);
        let mut p = z.clone();
        let mut rz = dot(&r, &z);
        let mut iters = 0;
        while iters < self.settings.max_linear_iters {
            iters += 1;
            let ap = apply(&p);
            let alpha = rz / dot(&p, &ap);
            for ((xi, ri), (pi, api)) in x
                .values_mut()
                .iter_mut()
                .zip(r.values_mut().iter_mut())
                .zip(p.values().iter().zip(ap.values()))
            {
                *xi += alpha * pi;
                *ri -= alpha * api;
            }
            if libm::sqrt(dot(&r, &r)) <= self.settings.linear_rtol * b_norm {
                break;
            }
            z = self.spectral.solve_shifted(&r, shift);
            let rz_next = dot(&r, &z);
            let beta = rz_next / rz;
            rz = rz_next;
            for (pi, zi) in p.values_mut().iter_mut().zip(z.values()) {
                *pi = zi + beta * *pi;
            }
        }
        (x, iters)
    }

    /// Unique solution of `laplacian(Uhat) = exp(Ubar + Uhat) - 1`.
    pub fn solve_nonlinear(
        &self,
        u_bar: &ScalarField,
        warm_start: Option<&ScalarField>,
    ) -> Result<(ScalarField, NewtonReport)> {
        self.check_grid(u_bar)?;
        let grid = self.grid();
        let mut h = match warm_start {
            Some(w) => {
                self.check_grid(w)?;
                w.clone()
            }
            None => ScalarField::zeros(grid),
        };
        let mut objective = self.objective(u_bar, &h);
        let mut report = NewtonReport {
            iterations: 0,
            residual: f64::INFINITY,
            linear_iterations: 0,
            objective_history: alloc::vec![objective],
        };
        loop {
            let residual = self.nonlinear_residual(u_bar, &h);
            report.residual = residual.sup_norm();
            if report.residual < self.settings.tol {
                return Ok((h, report));
            }
            if report.iterations >= self.settings.max_iters || !report.residual.is_finite() {
                return Err(Error::NoConvergence { iters: report.iterations, residual: report.residual });
            }
            let w: Vec<f64> =
                u_bar.values().iter().zip(h.values()).map(|(&u, &v)| libm::exp(u + v)).collect();
            let (step, lin_iters) = self.solve_jacobian(&w, &residual);
            report.linear_iterations += lin_iters;

            // d/dt J[h + t step] at t = 0 is -mean(F * step) < 0.
            let slope = -residual.inner(&step);
            let slack = 1e-13 * (1.0 + objective.abs());
            let mut t = 1.0;
            let mut accepted = None;
            for _ in 0..60 {
                let trial = h.zip_map(&step, |a, b| a + t * b)?;
                let value = self.objective(u_bar, &trial);
                if value.is_finite() && value <= objective + 1e-4 * t * slope + slack {
                    accepted = Some((trial, value));
                    break;
                }
                t *= 0.5;
            }
            let Some((next, value)) = accepted else {
                return Err(Error::NoConvergence { iters: report.iterations, residual: report.residual });
            };
            h = next;
            objective = value;
            report.objective_history.push(objective);
            report.iterations += 1;
        }
    }

    /// Composes both solves and the field gradients for a unit-mass density.
    pub fn solve_fields(&self, rho: &ScalarField, warm_start: Option<&ScalarField>) -> Result<FieldSolution> {
        let u_bar = self.solve_linear(rho)?;
        let (u_hat, report) = self.solve_nonlinear(&u_bar, warm_start)?;
        let e_bar = self.spectral.gradient(&u_bar).scale(-1.0);
        let e_hat = self.spectral.gradient(&u_hat).scale(-1.0);
        Ok(FieldSolution {
            u_bar,
            u_hat,
            e_bar,
            e_hat,
            newton_iters: report.iterations,
            final_residual: report.residual,
        })
    }
}

pub fn solve_linear_poisson(rho: &ScalarField) -> Result<ScalarField> {
    FieldSolver::new(rho.grid()).solve_linear(rho)
}

pub fn solve_nonlinear_poisson(u_bar: &ScalarField, warm_start: Option<&ScalarField>) -> Result<ScalarField> {
    FieldSolver::new(u_bar.grid()).solve_nonlinear(u_bar, warm_start).map(|(u, _)| u)
}

pub fn solve_fields(rho: &ScalarField) -> Result<FieldSolution> {
    FieldSolver::new(rho.grid()).solve_fields(rho, None)
}

/// Grid norms entering the regularity estimates for `Ubar` and `Uhat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegularityReport {
    pub ubar_sup: f64,
    pub ubar_grad_sup: f64,
    /// `sup |Uhat| + sup |grad Uhat|`.
    pub uhat_c1_bound: f64,
    pub uhat_sup: f64,
    /// `L^{(d+2)/d}` norm of the density.
    pub density_lp_norm: f64,
    pub density_sup: f64,
}

impl RegularityReport {
    /// Whether `sup |Uhat| <= exp(c (1 + ||rho||_{(d+2)/d}))`.
    pub fn uhat_bound_holds(&self, c: f64) -> bool {
        self.uhat_sup <= libm::exp(c * (1.0 + self.density_lp_norm))
    }
}

pub fn regularity_report(rho: &ScalarField, sol: &FieldSolution) -> RegularityReport {
    let d = rho.grid().dim() as f64;
    let uhat_sup = sol.u_hat.sup_norm();
    RegularityReport {
        ubar_sup: sol.u_bar.sup_norm(),
        ubar_grad_sup: sol.e_bar.sup_norm(),
        uhat_c1_bound: uhat_sup + sol.e_hat.sup_norm(),
        uhat_sup,
        density_lp_norm: rho.lp_norm((d + 2.0) / d),
        density_sup: rho.sup_norm(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn grid1(n: usize) -> TorusGrid {
        TorusGrid::new(1, n).unwrap()
    }

    fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    /// Positive unit-mean density built from a few random Fourier modes.
    fn random_density(grid: TorusGrid, rng: &mut ChaCha8Rng) -> ScalarField {
        let modes: Vec<(f64, f64, f64, f64)> = (0..4)
            .map(|_| {
                (
                    rng.random_range(-4..=4) as f64,
                    if grid.dim() == 2 { rng.random_range(-4..=4) as f64 } else { 0.0 },
                    rng.random_range(0.0..0.2),
                    rng.random_range(0.0..2.0 * PI),
                )
            })
            .collect();
        let mut rho = ScalarField::from_fn(grid, |x| {
            let y = if x.len() == 2 { x[1] } else { 0.0 };
            1.0 + modes
                .iter()
                .map(|&(kx, ky, a, ph)| a * libm::cos(2.0 * PI * (kx * x[0] + ky * y) + ph))
                .sum::<f64>()
        });
        let m = rho.mean();
        rho.values_mut().iter_mut().for_each(|v| *v /= m);
        rho
    }

    #[test]
    fn neutral_density_gives_zero_fields() {
        let g = TorusGrid::new(2, 16).unwrap();
        let sol = solve_fields(&ScalarField::constant(g, 1.0)).unwrap();
        assert_eq!(sol.u_bar.sup_norm(), 0.0);
        assert_eq!(sol.u_hat.sup_norm(), 0.0);
        assert_eq!(sol.e_bar.sup_norm(), 0.0);
        assert_eq!(sol.e_hat.sup_norm(), 0.0);
        assert_eq!(sol.newton_iters, 0);
    }

    #[test]
    fn rejects_non_unit_mass() {
        let g = grid1(16);
        let err = solve_linear_poisson(&ScalarField::constant(g, 1.1)).unwrap_err();
        assert!(matches!(err, Error::NonUnitMass { .. }));
    }

    #[test]
    fn linear_poisson_cosine() {
        let g = grid1(64);
        let rho = ScalarField::from_fn(g, |x| 1.0 + libm::cos(2.0 * PI * x[0]));
        let u = solve_linear_poisson(&rho).unwrap();
        let expect = ScalarField::from_fn(g, |x| libm::cos(2.0 * PI * x[0]) / (4.0 * PI * PI));
        assert!(max_diff(&u, &expect) < 1e-12);
    }

    #[test]
    fn linear_poisson_residual_on_random_density() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for d in [1, 2] {
            let g = TorusGrid::new(d, 32).unwrap();
            let rho = random_density(g, &mut rng);
            let u = solve_linear_poisson(&rho).unwrap();
            let res = crate::domain::laplacian(&u).zip_map(&rho, |l, r| l - (1.0 - r)).unwrap();
            assert!(res.sup_norm() < 1e-9);
            assert!(u.mean().abs() < 1e-12);
        }
    }

    #[test]
    fn linear_map_is_linear() {
        let g = grid1(64);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut gfun = random_density(g, &mut rng);
        gfun.values_mut().iter_mut().for_each(|v| *v -= 1.0);
        gfun.remove_mean();
        let a = 0.37;
        let base = solve_linear_poisson(&gfun.map(|v| 1.0 + v)).unwrap();
        let scaled = solve_linear_poisson(&gfun.map(|v| 1.0 + a * v)).unwrap();
        assert!(max_diff(&scaled, &base.scale(a)) < 1e-12);
    }

    #[test]
    fn nonlinear_fixed_points() {
        let g = grid1(32);
        let u = solve_nonlinear_poisson(&ScalarField::zeros(g), None).unwrap();
        assert_eq!(u.sup_norm(), 0.0);
        let c = 0.7;
        let u = solve_nonlinear_poisson(&ScalarField::constant(g, c), None).unwrap();
        assert!(max_diff(&u, &ScalarField::constant(g, -c)) < 1e-10);
    }

    #[test]
    fn manufactured_nonlinear_solution() {
        // Uhat* = 0.01 cos(2 pi x) and Ubar = log(1 + laplacian Uhat*) - Uhat*.
        let g = grid1(128);
        let exact = ScalarField::from_fn(g, |x| 0.01 * libm::cos(2.0 * PI * x[0]));
        let u_bar = ScalarField::from_fn(g, |x| {
            let c = libm::cos(2.0 * PI * x[0]);
            libm::log(1.0 - 0.01 * 4.0 * PI * PI * c) - 0.01 * c
        });
        let solver = FieldSolver::new(g);
        let (u, report) = solver.solve_nonlinear(&u_bar, None).unwrap();
        assert!(max_diff(&u, &exact) < 1e-8);
        assert!(report.iterations <= 10);
    }

    #[test]
    fn objective_never_increases() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for d in [1, 2] {
            let g = TorusGrid::new(d, 32).unwrap();
            let solver = FieldSolver::new(g);
            // strongly varying density, clipped positive and renormalised
            let mut rho = random_density(g, &mut rng).map(|v| (1.0 + 4.0 * (v - 1.0)).max(0.05));
            let m = rho.mean();
            rho.values_mut().iter_mut().for_each(|v| *v /= m);
            let u_bar = solver.solve_linear(&rho).unwrap();
            let (_, report) = solver.solve_nonlinear(&u_bar, Some(&ScalarField::constant(g, 3.0))).unwrap();
            for w in report.objective_history.windows(2) {
                assert!(w[1] <= w[0] + 1e-12 * (1.0 + w[0].abs()), "{:?}", report.objective_history);
            }
        }
    }

    #[test]
    fn warm_starts_agree() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let g = TorusGrid::new(2, 32).unwrap();
        let solver = FieldSolver::new(g);
        let u_bar = solver.solve_linear(&random_density(g, &mut rng)).unwrap();
        let (a, _) = solver.solve_nonlinear(&u_bar, None).unwrap();
        let (b, _) = solver.solve_nonlinear(&u_bar, Some(&ScalarField::constant(g, -2.0))).unwrap();
        assert!(max_diff(&a, &b) < 1e-8);
    }

    #[test]
    fn translation_covariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let g = grid1(64);
        let solver = FieldSolver::new(g);
        let u_bar = solver.solve_linear(&random_density(g, &mut rng)).unwrap();
        let c = 0.4;
        let (a, _) = solver.solve_nonlinear(&u_bar, None).unwrap();
        let (b, _) = solver.solve_nonlinear(&u_bar.map(|v| v + c), None).unwrap();
        assert!(max_diff(&b, &a.map(|v| v - c)) < 1e-9);
    }

    #[test]
    fn mass_identity_and_manufactured_full_problem() {
        // U* smooth, rho = exp(U*) - laplacian(U*). The recovered U matches U*.
        let g = grid1(128);
        let ustar = ScalarField::from_fn(g, |x| {
            0.05 * libm::cos(2.0 * PI * x[0]) + 0.02 * libm::sin(4.0 * PI * x[0]) - 0.01
        });
        // exp(U*) must carry unit mass, so shift U* accordingly
        let shift = libm::log(ustar.map(libm::exp).mean());
        let ustar = ustar.map(|v| v - shift);
        let lap = crate::domain::laplacian(&ustar);
        let rho = ustar.map(libm::exp).sub(&lap).unwrap();
        assert!((rho.mean() - 1.0).abs() < 1e-12);
        let sol = solve_fields(&rho).unwrap();
        assert!((sol.electron_mass() - 1.0).abs() < 1e-8);
        assert!(max_diff(&sol.potential(), &ustar) < 1e-7);
    }

    #[test]
    fn regularity_report_examples() {
        let g = grid1(64);
        let rho = ScalarField::constant(g, 1.0);
        let rep = regularity_report(&rho, &solve_fields(&rho).unwrap());
        assert_eq!(rep.ubar_sup, 0.0);
        assert_eq!(rep.uhat_c1_bound, 0.0);
        assert!((rep.density_lp_norm - 1.0).abs() < 1e-14);

        let a = 0.3;
        let rho = ScalarField::from_fn(g, |x| 1.0 + a * libm::cos(2.0 * PI * x[0]));
        let rep = regularity_report(&rho, &solve_fields(&rho).unwrap());
        assert!((rep.ubar_sup - a / (4.0 * PI * PI)).abs() < 1e-6);
        assert!(rep.uhat_bound_holds(1.0));

        // concentrating a unit-mass bump never lowers the L^3 norm
        let mut previous = 0.0;
        for width in [0.4, 0.2, 0.1, 0.05] {
            let mut bump = ScalarField::from_fn(g, |x| libm::exp(-x[0] * x[0] / (2.0 * width * width)));
            let m = bump.mean();
            bump.values_mut().iter_mut().for_each(|v| *v /= m);
            let norm = bump.lp_norm(3.0);
            assert!(norm >= previous);
            previous = norm;
        }
    }
}

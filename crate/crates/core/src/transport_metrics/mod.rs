//! Wasserstein distances, the coupled-trajectory functional `D(t)` and the
//! stability inequalities for the potentials.

mod assignment;
mod circle;
mod coupled;
mod stability;

pub use assignment::solve_assignment;
pub use circle::{identity_cut_cost, w2_densities_1d, MASS_TOL};
pub use coupled::{coupled_run, coupling_cost, gronwall_fit, CoupledRun, CoupledSample, GronwallFit, Perturbation};
pub use stability::{
    loeper_inequality_check, uhat_stability_check, InequalityReport, UhatStabilityReport, RELATIVE_SLACK,
};

use alloc::vec::Vec;

use crate::domain::torus_distance;
use crate::error::{Error, Result};
use crate::particles::ParticleEnsemble;

/// Largest ensemble handled by the exact solver.
pub const EXACT_LIMIT: usize = 4096;

/// Pairing between two equally weighted ensembles and its total cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    /// Particle `i` of the first ensemble goes to particle `pairing[i]` of the second.
    pub pairing: Vec<usize>,
    /// `sum_i w_i c(i, pairing[i])`.
    pub cost: f64,
}

impl Coupling {
    /// Largest deviation of a row or column mass of the plan from `1/n`.
    pub fn marginal_defect(&self) -> f64 {
        let n = self.pairing.len();
        let mut cols = alloc::vec![0.0; n];
        for &j in &self.pairing {
            cols[j] += 1.0 / n as f64;
        }
        cols.iter().map(|c| (c - 1.0 / n as f64).abs()).fold(0.0, f64::max)
    }
}

/// `|x - y|_T^2 + |v - w|^2`.
pub fn phase_space_distance_sq(x: &[f64], v: &[f64], y: &[f64], w: &[f64]) -> f64 {
    let dx = torus_distance(x, y);
    dx * dx + v.iter().zip(w).map(|(a, b)| (a - b) * (a - b)).sum::<f64>()
}

fn check_ensembles(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::EnsembleMismatch("different dimensions".into()));
    }
    if a.len() != b.len() {
        return Err(Error::EnsembleMismatch(alloc::format!("{} vs {} particles", a.len(), b.len())));
    }
    let w = 1.0 / a.len() as f64;
    if a.weights().iter().chain(b.weights()).any(|x| (x - w).abs() > 1e-9 * w) {
        return Err(Error::EnsembleMismatch("exact assignment needs equal weights".into()));
    }
    if a.len() > EXACT_LIMIT {
        return Err(Error::TooLarge { n: a.len(), max: EXACT_LIMIT });
    }
    Ok(())
}

/// Optimal pairing for the cost `c(i, j)` raised to `power / 2` of the squared metric.
fn optimal(a: &ParticleEnsemble, b: &ParticleEnsemble, power: f64) -> Result<Coupling> {
    check_ensembles(a, b)?;
    let cost = |i: usize, j: usize| {
        let c = phase_space_distance_sq(a.position(i), a.velocity(i), b.position(j), b.velocity(j));
        if power == 2.0 { c } else { libm::pow(c, 0.5 * power) }
    };
    let pairing = solve_assignment(a.len(), cost);
    // Summed in row order so the value is reproducible for a given pairing.
    // order-independent total
    let mut costs: Vec<f64> = pairing.iter().enumerate().map(|(i, &j)| cost(i, j)).collect();
    costs.sort_by(f64::total_cmp);
    let total = costs.iter().sum::<f64>() / a.len() as f64;
    Ok(Coupling { pairing, cost: total })
}

/// Optimal coupling for the squared phase-space metric.
pub fn optimal_coupling(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<Coupling> {
    optimal(a, b, 2.0)
}

/// Exact `W_2` between equally weighted ensembles of at most [`EXACT_LIMIT`] particles.
pub fn w2_ensembles_exact(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<f64> {
    Ok(libm::sqrt(optimal(a, b, 2.0)?.cost))
}

/// Exact `W_1` for the same metric.
pub fn w1_ensembles_exact(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Result<f64> {
    Ok(optimal(a, b, 1.0)?.cost)
}

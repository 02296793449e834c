//! Energy, velocity moments, density norms and the regularity probes.

mod interpolation;

pub use interpolation::{
    interpolation_check, interpolation_constant, InterpolationReport, PhaseSpaceGrid,
};

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{torus_distance, ScalarField, Spectral, VectorField};
use crate::error::{Error, Result};
use crate::field_solver::FieldSolution;
use crate::particles::ParticleEnsemble;

/// Snapshot of the conserved and monitored quantities at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub time: f64,
    /// `1/2 integral |v|^2 f`.
    pub kinetic: f64,
    /// `1/2 integral |grad U|^2`.
    pub field_energy: f64,
    /// `integral U exp(U)`.
    pub ue_term: f64,
    pub total: f64,
    /// Pairs `(m, M_m)`.
    pub moments: Vec<(f64, f64)>,
    pub rho_sup: f64,
    /// `L^{(d+2)/d}` norm of the density.
    pub rho_lp: f64,
}

impl DiagnosticsRecord {
    pub fn moment(&self, m: f64) -> Option<f64> {
        self.moments.iter().find(|(k, _)| *k == m).map(|(_, v)| *v)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyBreakdown {
    pub kinetic: f64,
    pub field_energy: f64,
    pub ue_term: f64,
    pub total: f64,
}

pub fn energy(ens: &ParticleEnsemble, sol: &FieldSolution) -> EnergyBreakdown {
    let kinetic = 0.5 * moment(ens, 2.0);
    let u = sol.potential();
    let spectral = Spectral::new(u.grid());
    let field_energy = -0.5 * u.inner(&spectral.laplacian(&u));
    let ue_term = u.map(|u| u * libm::exp(u)).mean();
    EnergyBreakdown { kinetic, field_energy, ue_term, total: kinetic + field_energy + ue_term }
}

/// `M_m = sum_p w_p |v_p|^m`.
pub fn moment(ens: &ParticleEnsemble, m: f64) -> f64 {
    (0..ens.len())
        .map(|p| {
            let s2: f64 = ens.velocity(p).iter().map(|c| c * c).sum();
            let speed_m = match m {
                0.0 => 1.0,
                2.0 => s2,
                4.0 => s2 * s2,
                _ => libm::pow(libm::sqrt(s2), m),
            };
            ens.weight(p) * speed_m
        })
        .sum()
}

pub fn density_lp(rho: &ScalarField, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::DomainError(alloc::format!("L^p norm needs p >= 1, got {p}")));
    }
    Ok(rho.lp_norm(p))
}

/// Builds the record for `time` from a solved configuration.
pub fn record(
    time: f64,
    ens: &ParticleEnsemble,
    sol: &FieldSolution,
    rho: &ScalarField,
    m0: f64,
) -> DiagnosticsRecord {
    let e = energy(ens, sol);
    let d = rho.grid().dim() as f64;
    let mut moments = alloc::vec![(2.0, 2.0 * e.kinetic), (4.0, moment(ens, 4.0))];
    if m0 != 2.0 && m0 != 4.0 {
        moments.push((m0, moment(ens, m0)));
    }
    DiagnosticsRecord {
        time,
        kinetic: e.kinetic,
        field_energy: e.field_energy,
        ue_term: e.ue_term,
        total: e.total,
        moments,
        rho_sup: rho.sup_norm(),
        rho_lp: rho.lp_norm((d + 2.0) / d),
    }
}

/// Largest sampled ratio `|E(x) - E(y)| / (||rho||_inf r (1 + log(sqrt(d) / 2r)))`,
/// `r = |x - y|`, over random node pairs at least two spacings apart.
pub fn log_lipschitz_probe(e_bar: &VectorField, rho_sup: f64, n_pairs: usize, seed: u64) -> f64 {
    let grid = e_bar.grid();
    let d = grid.dim();
    let min_sep = 2.0 * grid.spacing();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut found = 0;
    let mut attempts = 0;
    while found < n_pairs && attempts < 100 * n_pairs.max(1) {
        attempts += 1;
        let i = rng.random_range(0..grid.len());
        let j = rng.random_range(0..grid.len());
        let (xi, xj) = (grid.node(i), grid.node(j));
        let r = torus_distance(&xi[..d], &xj[..d]);
        if r < min_sep {
            continue;
        }
        found += 1;
        let (a, b) = (e_bar.at(i), e_bar.at(j));
        let diff = libm::sqrt((0..d).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum());
        if diff == 0.0 {
            continue;
        }
        let modulus = r * (1.0 + libm::log(libm::sqrt(d as f64) / (2.0 * r)));
        worst = worst.max(diff / (rho_sup * modulus));
    }
    worst
}

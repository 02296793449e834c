//! Two trajectories sharing the identity coupling at `t = 0`.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::domain::{torus_distance, VectorField, MAX_DIM};
use crate::error::Result;
use crate::particles::{interpolate_field_with, sample_initial, InitialData, ParticleEnsemble, SimConfig, Simulation};

use super::w2_ensembles_exact;

/// Per-particle displacement `x += dx U[-1, 1]^d`, `v += dv U[-1, 1]^d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Perturbation {
    pub dx: f64,
    pub dv: f64,
    pub seed: u64,
}

impl Perturbation {
    pub fn apply(&self, ens: &ParticleEnsemble) -> Result<ParticleEnsemble> {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        let mut x = ens.positions().to_vec();
        let mut v = ens.velocities().to_vec();
        for (xi, vi) in x.iter_mut().zip(v.iter_mut()) {
            let (a, b): (f64, f64) = (rng.random_range(-1.0..=1.0), rng.random_range(-1.0..=1.0));
            *xi += self.dx * a;
            *vi += self.dv * b;
        }
        ParticleEnsemble::new(ens.dim(), x, v, ens.weights().to_vec(), ens.rng_seed())
    }
}

/// `D = sum_p w_p (|X1_p - X2_p|_T^2 + |V1_p - V2_p|^2)` for the identity pairing.
pub fn coupling_cost(a: &ParticleEnsemble, b: &ParticleEnsemble) -> f64 {
    pair_costs(a, b).iter().zip(a.weights()).map(|(c, w)| c * w).sum()
}

fn pair_costs(a: &ParticleEnsemble, b: &ParticleEnsemble) -> Vec<f64> {
    (0..a.len())
        .map(|p| {
            let dx = torus_distance(a.position(p), b.position(p));
            let dv: f64 = a.velocity(p).iter().zip(b.velocity(p)).map(|(s, t)| (s - t) * (s - t)).sum();
            dx * dx + dv
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoupledSample {
    pub t: f64,
    pub d: f64,
    /// Exact `W_2^2` between the leading subsamples of both ensembles.
    pub w2_sq_est: f64,
    /// Three standard errors of the subsample estimate of `D`.
    pub band: f64,
    /// `I_1 .. I_4`: field differences integrated along the coupling.
    pub i: [f64; 4],
}

impl CoupledSample {
    /// `D >= W_2^2 - band`.
    pub fn dominates_w2(&self) -> bool {
        self.d >= self.w2_sq_est - self.band
    }
}

/// Regression of `log log(d e / (4 D))` on `t` over samples with `0 < D < d / 4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GronwallFit {
    pub slope: f64,
    /// `max(0, -slope)`.
    pub c: f64,
    /// Smallest `C` for which every sample obeys the double-exponential envelope.
    pub c_envelope: f64,
    pub points: usize,
}

#[derive(Debug, Clone)]
pub struct CoupledRun {
    pub samples: Vec<CoupledSample>,
    pub fit: GronwallFit,
    pub first: ParticleEnsemble,
    pub second: ParticleEnsemble,
}

fn field_gap(e1: &VectorField, x1: &[f64], e2: &VectorField, x2: &[f64], kind: crate::particles::Deposition) -> f64 {
    let a = interpolate_field_with(kind, e1, x1);
    let b = interpolate_field_with(kind, e2, x2);
    (0..MAX_DIM).map(|k| (a[k] - b[k]) * (a[k] - b[k])).sum()
}

fn sample(first: &Simulation, second: &Simulation, subsample: usize) -> Result<CoupledSample> {
    let (a, b) = (first.ensemble(), second.ensemble());
    let kind = first.config().deposition;
    let split = |sim: &Simulation| -> Result<(VectorField, VectorField)> {
        let sol = &sim.stage().solution;
        match sim.mollifier() {
            Some(m) => Ok((m.convolve_vector(&sol.e_bar)?, m.convolve_vector(&sol.e_hat)?)),
            None => Ok((sol.e_bar.clone(), sol.e_hat.clone())),
        }
    };
    let (bar1, hat1) = split(first)?;
    let (bar2, hat2) = split(second)?;
    let mut i = [0.0; 4];
    for p in 0..a.len() {
        let (x1, x2, w) = (a.position(p), b.position(p), a.weight(p));
        i[0] += w * field_gap(&bar1, x1, &bar1, x2, kind);
        i[1] += w * field_gap(&bar1, x2, &bar2, x2, kind);
        i[2] += w * field_gap(&hat1, x1, &hat1, x2, kind);
        i[3] += w * field_gap(&hat1, x2, &hat2, x2, kind);
    }
    let d = coupling_cost(a, b);
    let m = subsample.min(a.len()).max(1);
    let (sa, sb) = (a.head(m)?, b.head(m)?);
    let w2 = w2_ensembles_exact(&sa, &sb)?;
    let costs = pair_costs(&sa, &sb);
    let mean = costs.iter().sum::<f64>() / m as f64;
    let var = if m > 1 { costs.iter().map(|c| (c - mean) * (c - mean)).sum::<f64>() / (m - 1) as f64 } else { 0.0 };
    Ok(CoupledSample { t: first.time(), d, w2_sq_est: w2 * w2, band: 3.0 * libm::sqrt(var / m as f64), i })
}

pub fn gronwall_fit(samples: &[CoupledSample], dim: usize) -> GronwallFit {
    let de4 = dim as f64 * core::f64::consts::E / 4.0;
    let pts: Vec<(f64, f64)> = samples
        .iter()
        .filter(|s| s.d > 0.0 && s.d < dim as f64 / 4.0)
        .map(|s| (s.t, libm::log(libm::log(de4 / s.d))))
        .collect();
    let n = pts.len() as f64;
    let slope = if pts.len() < 2 {
        0.0
    } else {
        let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
        let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
        let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|p| (p.0 - mt) * (p.0 - mt)).sum();
        if sxx > 0.0 { sxy / sxx } else { 0.0 }
    };
    let c_envelope = match pts.first() {
        Some(&(t0, y0)) => pts
            .iter()
            .filter(|p| p.0 > t0)
            .map(|p| (y0 - p.1) / (p.0 - t0))
            .fold(0.0, f64::max),
        None => 0.0,
    };
    GronwallFit { slope, c: (-slope).max(0.0), c_envelope, points: pts.len() }
}

/// Evolves `data` and its perturbation under their own self-consistent fields,
/// sampling the coupling every `cfg.output_every` steps.
pub fn coupled_run(
    cfg: &SimConfig,
    data: &InitialData,
    perturbation: Perturbation,
    subsample: usize,
) -> Result<CoupledRun> {
    let base = sample_initial(cfg, data)?;
    let moved = perturbation.apply(&base)?;
    let mut first = Simulation::new(cfg.clone(), base)?;
    let mut second = Simulation::new(cfg.clone(), moved)?;
    let mut samples = alloc::vec![sample(&first, &second, subsample)?];
    for k in 1..=cfg.n_steps() {
        first.step()?;
        second.step()?;
        if k % cfg.output_every == 0 {
            samples.push(sample(&first, &second, subsample)?);
        }
    }
    let fit = gronwall_fit(&samples, cfg.grid.dim());
    Ok(CoupledRun { samples, fit, first: first.into_ensemble(), second: second.into_ensemble() })
}

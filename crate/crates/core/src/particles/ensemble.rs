use alloc::format;
use alloc::vec::Vec;

use crate::domain::{wrap_coordinate, MAX_DIM};
use crate::error::{Error, Result};

/// Tolerance on `|sum w - 1|`.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: &[f64]) -> f64 {
    let (mut sum, mut comp) = (0.0f64, 0.0f64);
    for &v in values {
        let t = sum + v;
        comp += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + comp
}

/// Weighted empirical measure on `T^d x R^d`.
///
/// Positions and velocities are stored flat with stride `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleEnsemble {
    dim: usize,
    positions: Vec<f64>,
    velocities: Vec<f64>,
    weights: Vec<f64>,
    rng_seed: u64,
}

impl ParticleEnsemble {
    /// Builds an ensemble and reduces positions into `[-1/2, 1/2)^d`.
    pub fn new(
        dim: usize,
        mut positions: Vec<f64>,
        velocities: Vec<f64>,
        weights: Vec<f64>,
        rng_seed: u64,
    ) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        let n = weights.len();
        if positions.len() != n * dim || velocities.len() != n * dim {
            return Err(Error::EnsembleMismatch(format!(
                "{} weights, {} position and {} velocity coordinates in d={dim}",
                n,
                positions.len(),
                velocities.len()
            )));
        }
        if let Some(i) = positions.iter().chain(&velocities).position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        if weights.iter().any(|w| !(*w > 0.0 && w.is_finite())) {
            return Err(Error::EnsembleMismatch("weights must be positive".into()));
        }
        let total = compensated_sum(&weights);
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::EnsembleMismatch(format!("weights sum to {total}")));
        }
        positions.iter_mut().for_each(|x| *x = wrap_coordinate(*x));
        Ok(Self { dim, positions, velocities, weights, rng_seed })
    }

    /// `n` particles of weight `1/n`.
    pub fn equal_weights(dim: usize, positions: Vec<f64>, velocities: Vec<f64>, rng_seed: u64) -> Result<Self> {
        let n = positions.len() / dim.max(1);
        if n == 0 {
            return Err(Error::EnsembleMismatch("empty ensemble".into()));
        }
        Self::new(dim, positions, velocities, alloc::vec![1.0 / n as f64; n], rng_seed)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn rng_seed(&self) -> u64 {
        self.rng_seed
    }

    pub fn position(&self, i: usize) -> &[f64] {
        &self.positions[i * self.dim..(i + 1) * self.dim]
    }

    pub fn velocity(&self, i: usize) -> &[f64] {
        &self.velocities[i * self.dim..(i + 1) * self.dim]
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn positions(&self) -> &[f64] {
        &self.positions
    }

    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn total_weight(&self) -> f64 {
        compensated_sum(&self.weights)
    }

    /// Largest particle speed.
    pub fn max_speed(&self) -> f64 {
        self.velocities
            .chunks_exact(self.dim)
            .map(|v| libm::sqrt(v.iter().map(|c| c * c).sum()))
            .fold(0.0, f64::max)
    }

    pub(crate) fn phase_space_mut(&mut self) -> (&mut [f64], &[f64]) {
        (&mut self.positions, &self.velocities)
    }

    pub(crate) fn velocities_mut(&mut self) -> &mut [f64] {
        &mut self.velocities
    }

    pub fn wrap_positions(&mut self) {
        self.positions.iter_mut().for_each(|x| *x = wrap_coordinate(*x));
    }

    /// Same particles with every velocity negated.
    pub fn reversed(&self) -> Self {
        let mut out = self.clone();
        out.velocities.iter_mut().for_each(|v| *v = -*v);
        out
    }

    /// The first `m` particles, reweighted to unit mass.
    pub fn head(&self, m: usize) -> Result<Self> {
        let m = m.min(self.len());
        if m == 0 {
            return Err(Error::EnsembleMismatch("empty ensemble".into()));
        }
        let total: f64 = self.weights[..m].iter().sum();
        let weights: Vec<f64> = self.weights[..m].iter().map(|w| w / total).collect();
        Ok(Self {
            dim: self.dim,
            positions: self.positions[..m * self.dim].to_vec(),
            velocities: self.velocities[..m * self.dim].to_vec(),
            weights,
            rng_seed: self.rng_seed,
        })
    }

    /// Keeps the particles for which `keep(position, velocity)` holds, reweighted to unit mass.
    pub fn filter(&self, mut keep: impl FnMut(&[f64], &[f64]) -> bool) -> Result<Self> {
        let mut positions = Vec::new();
        let mut velocities = Vec::new();
        let mut weights = Vec::new();
        for i in 0..self.len() {
            if keep(self.position(i), self.velocity(i)) {
                positions.extend_from_slice(self.position(i));
                velocities.extend_from_slice(self.velocity(i));
                weights.push(self.weights[i]);
            }
        }
        let total: f64 = weights.iter().sum();
        if weights.is_empty() {
            return Err(Error::EnsembleMismatch("empty ensemble".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);
        Ok(Self { dim: self.dim, positions, velocities, weights, rng_seed: self.rng_seed })
    }
}

use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::f64::consts::PI;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::{ParticleEnsemble, SimConfig};
use crate::error::{Error, Result};

/// User-supplied initial distribution, drawn one particle at a time.
pub trait InitialSampler: fmt::Debug + Send + Sync {
    fn name(&self) -> &str;

    /// Writes one position (any real coordinates; wrapped later) and one velocity.
    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], v: &mut [f64]);

    /// `integral |v|^2 f`, when known in closed form.
    fn second_moment(&self, _dim: usize) -> Option<f64> {
        None
    }
}

#[derive(Debug, Clone)]
pub enum InitialKind {
    /// `f = M_T(v)` on the whole torus.
    UniformMaxwellian { temperature: f64 },
    /// Density `1 + amplitude cos(2 pi mode x_1)` with Maxwellian velocities.
    PerturbedMaxwellian { amplitude: f64, mode: u32, temperature: f64 },
    /// Two Maxwellian beams drifting at `+-drift` along the first axis.
    TwoStream { drift: f64, temperature: f64 },
    Custom(Arc<dyn InitialSampler>),
}

/// Parameters shared by the named kinds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KindParams {
    pub temperature: f64,
    pub amplitude: f64,
    pub mode: u32,
    pub drift: f64,
}

impl Default for KindParams {
    fn default() -> Self {
        Self { temperature: 0.01, amplitude: 0.1, mode: 1, drift: 0.5 }
    }
}

impl InitialKind {
    pub fn from_name(name: &str, p: KindParams) -> Result<Self> {
        let kind = match name {
            "uniform_maxwellian" => Self::UniformMaxwellian { temperature: p.temperature },
            "perturbed_maxwellian" => Self::PerturbedMaxwellian {
                amplitude: p.amplitude,
                mode: p.mode,
                temperature: p.temperature,
            },
            "two_stream" => Self::TwoStream { drift: p.drift, temperature: p.temperature },
            other => return Err(Error::UnknownKind(other.to_string())),
        };
        kind.validate()?;
        Ok(kind)
    }

    pub fn name(&self) -> String {
        match self {
            Self::UniformMaxwellian { .. } => "uniform_maxwellian".into(),
            Self::PerturbedMaxwellian { .. } => "perturbed_maxwellian".into(),
            Self::TwoStream { .. } => "two_stream".into(),
            Self::Custom(s) => s.name().into(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let temperature = match *self {
            Self::UniformMaxwellian { temperature } | Self::TwoStream { temperature, .. } => temperature,
            Self::PerturbedMaxwellian { amplitude, mode, temperature } => {
                if amplitude.is_nan() || amplitude.abs() >= 1.0 {
                    return Err(Error::InvalidConfig("amplitude must satisfy |a| < 1".into()));
                }
                if mode == 0 {
                    return Err(Error::InvalidConfig("mode must be a positive integer".into()));
                }
                temperature
            }
            Self::Custom(_) => return Ok(()),
        };
        if !(temperature >= 0.0 && temperature.is_finite()) {
            return Err(Error::InvalidConfig("temperature must be finite and nonnegative".into()));
        }
        Ok(())
    }

    /// `integral |v|^2 f` of the analytic distribution.
    pub fn second_moment(&self, dim: usize) -> Option<f64> {
        let d = dim as f64;
        match self {
            Self::UniformMaxwellian { temperature } | Self::PerturbedMaxwellian { temperature, .. } => {
                Some(d * temperature)
            }
            Self::TwoStream { drift, temperature } => Some(d * temperature + drift * drift),
            Self::Custom(s) => s.second_moment(dim),
        }
    }

    fn draw(&self, rng: &mut ChaCha8Rng, x: &mut [f64], v: &mut [f64]) {
        let maxwellian = |rng: &mut ChaCha8Rng, v: &mut [f64], t: f64| {
            let s = libm::sqrt(t);
            for c in v.iter_mut() {
                let z: f64 = rng.sample(StandardNormal);
                *c = s * z;
            }
        };
        match self {
            Self::UniformMaxwellian { temperature } => {
                x.iter_mut().for_each(|c| *c = rng.random::<f64>() - 0.5);
                maxwellian(rng, v, *temperature);
            }
            Self::PerturbedMaxwellian { amplitude, mode, temperature } => {
                x[0] = perturbed_quantile(rng.random::<f64>(), *amplitude, *mode);
                x[1..].iter_mut().for_each(|c| *c = rng.random::<f64>() - 0.5);
                maxwellian(rng, v, *temperature);
            }
            Self::TwoStream { drift, temperature } => {
                x.iter_mut().for_each(|c| *c = rng.random::<f64>() - 0.5);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                maxwellian(rng, v, *temperature);
                v[0] += sign * drift;
            }
            Self::Custom(s) => s.draw(rng, x, v),
        }
    }
}

/// Inverse of `F(x) = x + 1/2 + a sin(2 pi m x) / (2 pi m)` on `[-1/2, 1/2)`.
fn perturbed_quantile(u: f64, a: f64, m: u32) -> f64 {
    let k = 2.0 * PI * m as f64;
    let cdf = |x: f64| x + 0.5 + a * libm::sin(k * x) / k;
    let (mut lo, mut hi) = (-0.5, 0.5);
    let mut x = u - 0.5;
    for _ in 0..100 {
        let r = cdf(x) - u;
        if r.abs() < 1e-15 {
            break;
        }
        if r > 0.0 {
            hi = x;
        } else {
            lo = x;
        }
        let next = x - r / (1.0 + a * libm::cos(k * x));
        x = if next > lo && next < hi { next } else { 0.5 * (lo + hi) };
    }
    x
}

/// Initial distribution plus the decay parameters of the well-posedness theory.
#[derive(Debug, Clone)]
pub struct InitialData {
    pub kind: InitialKind,
    /// Velocity decay exponent in `f_0 <= C / (1 + |v|^k0)`.
    pub k0: f64,
    /// Order of the propagated velocity moment.
    pub m0: f64,
}

impl InitialData {
    pub fn new(kind: InitialKind, k0: f64, m0: f64) -> Self {
        Self { kind, k0, m0 }
    }

    /// Default decay parameters for dimension `dim`: `k0 = d + 1`, `m0 = 4`.
    pub fn with_defaults(kind: InitialKind, dim: usize) -> Self {
        Self { kind, k0: dim as f64 + 1.0, m0: 4.0 }
    }

    /// `k0 > d` and `m0 > d (d - 1)`.
    pub fn satisfies_main_hypotheses(&self, dim: usize) -> bool {
        let d = dim as f64;
        self.k0 > d && self.m0 > d * (d - 1.0)
    }
}

/// Draws `cfg.n_particles` equally weighted particles from `data` using `cfg.seed`.
pub fn sample_initial(cfg: &SimConfig, data: &InitialData) -> Result<ParticleEnsemble> {
    data.kind.validate()?;
    let dim = cfg.grid.dim();
    let n = cfg.n_particles;
    if n == 0 {
        return Err(Error::InvalidConfig("n_particles must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut positions = Vec::with_capacity(n * dim);
    let mut velocities = Vec::with_capacity(n * dim);
    let (mut x, mut v) = ([0.0; 2], [0.0; 2]);
    for _ in 0..n {
        data.kind.draw(&mut rng, &mut x[..dim], &mut v[..dim]);
        positions.extend_from_slice(&x[..dim]);
        velocities.extend_from_slice(&v[..dim]);
    }
    ParticleEnsemble::equal_weights(dim, positions, velocities, cfg.seed)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_inverts_cdf() {
        for &(a, m) in &[(0.0, 1), (0.5, 1), (-0.9, 3), (0.99, 2)] {
            let k = 2.0 * PI * m as f64;
            for i in 0..=100 {
                let u = i as f64 / 100.0;
                let x = perturbed_quantile(u, a, m);
                let back = x + 0.5 + a * libm::sin(k * x) / k;
                assert!((back - u).abs() < 1e-12, "a={a} m={m} u={u}");
            }
        }
    }
}

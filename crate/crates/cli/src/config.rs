//! Key-value run configuration.
//!
//! One `key = value` pair per line; `#` starts a comment. Every key except
//! `grid`, `n`, `dt` and `t_final` has a default (see [`KEYS`]). Unknown or
//! repeated keys are errors.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::Path;

use vpme_core::domain::TorusGrid;
use vpme_core::field_solver::NewtonSettings;
use vpme_core::particles::{Deposition, ForceScheme, InitialData, InitialKind, KindParams, SimConfig};
use vpme_core::transport_metrics::Perturbation;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConfigError {
    #[error("line {line}: {reason}")]
    ParseError { line: usize, reason: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid configuration: {0}")]
    Invalid(#[from] vpme_core::Error),
    #[error("cannot read {path}: {reason}")]
    Unreadable { path: String, reason: String },
}

/// Problem size used by the `verify` scenario.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum VerifyScale {
    /// Reference fixtures at full resolution.
    #[default]
    Full,
    /// Reduced particle counts and horizons for smoke runs.
    Quick,
}

impl VerifyScale {
    pub fn name(self) -> &'static str {
        match self {
            Self::Full => "full",
            Self::Quick => "quick",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "full" => Some(Self::Full),
            "quick" => Some(Self::Quick),
            _ => None,
        }
    }
}

/// Every accepted key with its default, in serialisation order.
pub const KEYS: &[(&str, &str)] = &[
    ("dim", "1"),
    ("grid", "required"),
    ("n", "required"),
    ("dt", "required"),
    ("t_final", "required"),
    ("seed", "0"),
    ("mollifier_r", "none"),
    ("deposition", "linear"),
    ("force", "interpolated"),
    ("output_every", "10"),
    ("mollify_diagnostics", "false"),
    ("newton_tol", "1e-10"),
    ("newton_max_iters", "50"),
    ("kind", "perturbed_maxwellian"),
    ("temperature", "0.01"),
    ("amplitude", "0.1"),
    ("mode", "1"),
    ("drift", "0.5"),
    ("k0", "dim + 1"),
    ("m0", "4"),
    ("perturb_dx", "1e-4"),
    ("perturb_dv", "0"),
    ("subsample", "256"),
    ("sweep_pairs", "100"),
    ("verify_scale", "full"),
];

/// Parsed run configuration: simulation settings plus scenario knobs.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub sim: SimConfig,
    pub kind: String,
    pub params: KindParams,
    pub k0: f64,
    pub m0: f64,
    /// Amplitude of the uniform position kick in `stability`.
    pub perturb_dx: f64,
    pub perturb_dv: f64,
    /// Particles entering the exact W2 estimate of a coupled run.
    pub subsample: usize,
    /// Random density pairs per inequality sweep.
    pub sweep_pairs: usize,
    pub verify_scale: VerifyScale,
}

fn force_name(f: ForceScheme) -> &'static str {
    match f {
        ForceScheme::Interpolated => "interpolated",
        ForceScheme::PotentialGradient => "potential_gradient",
    }
}

fn force_from_name(s: &str) -> Option<ForceScheme> {
    match s {
        "interpolated" => Some(ForceScheme::Interpolated),
        "potential_gradient" => Some(ForceScheme::PotentialGradient),
        _ => None,
    }
}

/// Shortest text that parses back to the same value.
fn real(x: f64) -> String {
    format!("{x:?}")
}

#[derive(Default)]
struct Raw {
    values: Vec<(&'static str, String, usize)>,
}

impl Raw {
    fn get(&self, key: &str) -> Option<(&str, usize)> {
        self.values.iter().find(|(k, _, _)| *k == key).map(|(_, v, l)| (v.as_str(), *l))
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str, default: Option<T>) -> Result<T, ConfigError> {
        match self.get(key) {
            Some((v, line)) => v
                .parse()
                .map_err(|_| ConfigError::ParseError { line, reason: format!("`{key}`: cannot parse `{v}`") }),
            None => default.ok_or(ConfigError::MissingKey(key)),
        }
    }

    fn real(&self, key: &'static str, default: Option<f64>) -> Result<f64, ConfigError> {
        let v = self.parse(key, default)?;
        if !v.is_finite() {
            let line = self.get(key).map_or(0, |(_, l)| l);
            return Err(ConfigError::ParseError { line, reason: format!("`{key}` must be finite") });
        }
        Ok(v)
    }

    fn choice<T>(
        &self,
        key: &'static str,
        default: T,
        from: impl Fn(&str) -> Option<T>,
    ) -> Result<T, ConfigError> {
        match self.get(key) {
            Some((v, line)) => {
                from(v).ok_or(ConfigError::ParseError { line, reason: format!("`{key}`: unknown value `{v}`") })
            }
            None => Ok(default),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Raw::default();
        let mut seen = HashSet::new();
        for (i, line) in text.lines().enumerate() {
            let line_no = i + 1;
            let body = line.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (k, v) = body
                .split_once('=')
                .ok_or(ConfigError::ParseError { line: line_no, reason: "expected `key = value`".into() })?;
            let (k, v) = (k.trim(), v.trim());
            let key = KEYS.iter().find(|(name, _)| *name == k).ok_or_else(|| ConfigError::UnknownKey(k.into()))?.0;
            if !seen.insert(key) {
                return Err(ConfigError::ParseError { line: line_no, reason: format!("duplicate key `{key}`") });
            }
            if v.is_empty() {
                return Err(ConfigError::ParseError { line: line_no, reason: format!("`{key}` has no value") });
            }
            raw.values.push((key, v.to_string(), line_no));
        }

        let dim: usize = raw.parse("dim", Some(1))?;
        let grid = TorusGrid::new(dim, raw.parse("grid", None)?)?;
        let mut sim = SimConfig::new(
            grid,
            raw.parse("n", None)?,
            raw.real("dt", None)?,
            raw.real("t_final", None)?,
            raw.parse("seed", Some(0))?,
        );
        sim.mollifier_r = match raw.get("mollifier_r") {
            Some(("none", _)) | None => None,
            Some(_) => Some(raw.real("mollifier_r", None)?),
        };
        sim.deposition = raw.choice("deposition", Deposition::Linear, Deposition::from_name)?;
        sim.force = raw.choice("force", ForceScheme::Interpolated, force_from_name)?;
        sim.output_every = raw.parse("output_every", Some(10))?;
        sim.mollify_diagnostics = raw.parse("mollify_diagnostics", Some(false))?;
        let defaults = NewtonSettings::default();
        sim.newton = NewtonSettings {
            tol: raw.real("newton_tol", Some(defaults.tol))?,
            max_iters: raw.parse("newton_max_iters", Some(defaults.max_iters))?,
            ..defaults
        };
        sim.validate()?;

        let p = KindParams::default();
        let params = KindParams {
            temperature: raw.real("temperature", Some(p.temperature))?,
            amplitude: raw.real("amplitude", Some(p.amplitude))?,
            mode: raw.parse("mode", Some(p.mode))?,
            drift: raw.real("drift", Some(p.drift))?,
        };
        let kind: String = raw.parse("kind", Some("perturbed_maxwellian".to_string()))?;
        InitialKind::from_name(&kind, params)?;

        let cfg = Self {
            sim,
            kind,
            params,
            k0: raw.real("k0", Some(dim as f64 + 1.0))?,
            m0: raw.real("m0", Some(4.0))?,
            perturb_dx: raw.real("perturb_dx", Some(1e-4))?,
            perturb_dv: raw.real("perturb_dv", Some(0.0))?,
            subsample: raw.parse("subsample", Some(256))?,
            sweep_pairs: raw.parse("sweep_pairs", Some(100))?,
            verify_scale: raw.choice("verify_scale", VerifyScale::Full, VerifyScale::from_name)?,
        };
        if cfg.subsample == 0 {
            return Err(vpme_core::Error::InvalidConfig("subsample must be positive".into()).into());
        }
        if cfg.perturb_dx < 0.0 || cfg.perturb_dv < 0.0 {
            return Err(vpme_core::Error::InvalidConfig("perturbation amplitudes must be nonnegative".into()).into());
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Unreadable { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    /// Writes every key explicitly; `parse(to_text())` reproduces `self`.
    pub fn to_text(&self) -> String {
        let s = &self.sim;
        let r = s.mollifier_r.map_or("none".to_string(), real);
        let values: Vec<String> = vec![
            s.grid.dim().to_string(),
            s.grid.cells_per_dim().to_string(),
            s.n_particles.to_string(),
            real(s.dt),
            real(s.t_final),
            s.seed.to_string(),
            r,
            s.deposition.name().into(),
            force_name(s.force).into(),
            s.output_every.to_string(),
            s.mollify_diagnostics.to_string(),
            real(s.newton.tol),
            s.newton.max_iters.to_string(),
            self.kind.clone(),
            real(self.params.temperature),
            real(self.params.amplitude),
            self.params.mode.to_string(),
            real(self.params.drift),
            real(self.k0),
            real(self.m0),
            real(self.perturb_dx),
            real(self.perturb_dv),
            self.subsample.to_string(),
            self.sweep_pairs.to_string(),
            self.verify_scale.name().into(),
        ];
        let mut out = String::new();
        for ((key, _), value) in KEYS.iter().zip(values) {
            let _ = writeln!(out, "{key} = {value}");
        }
        out
    }

    pub fn initial_data(&self) -> InitialData {
        let kind = InitialKind::from_name(&self.kind, self.params).expect("validated at parse time");
        InitialData::new(kind, self.k0, self.m0)
    }

    /// Perturbation for coupled runs; its seed is derived from the run seed.
    pub fn perturbation(&self) -> Perturbation {
        Perturbation { dx: self.perturb_dx, dv: self.perturb_dv, seed: self.sim.seed.wrapping_add(1) }
    }
}

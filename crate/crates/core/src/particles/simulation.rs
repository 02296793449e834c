use alloc::vec::Vec;

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::domain::{wrap_coordinate, ScalarField, TorusGrid, VectorField};
use crate::error::{Error, Result};
use crate::field_solver::{FieldSolution, FieldSolver, NewtonSettings};
use crate::mollifier::{make_mollifier, Mollifier};

use super::{deposit_with, interpolate_field_with, potential_gradient, Deposition, sample_initial, InitialData, ParticleEnsemble};

/// How the kick force is evaluated at particle positions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ForceScheme {
    /// Linear interpolation of the grid electric field; conserves momentum.
    #[default]
    Interpolated,
    /// Exact gradient of the linearly interpolated potential; conserves energy.
    PotentialGradient,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub grid: TorusGrid,
    pub n_particles: usize,
    /// Zero gives a diagnostics-only run.
    pub dt: f64,
    pub t_final: f64,
    /// Mollifier width; `None` solves the unregularised fields.
    pub mollifier_r: Option<f64>,
    pub deposition: Deposition,
    pub seed: u64,
    /// Steps between diagnostics records.
    pub output_every: usize,
    pub newton: NewtonSettings,
    /// Report density norms of the mollified rather than the deposited density.
    pub mollify_diagnostics: bool,
    pub force: ForceScheme,
}

impl SimConfig {
    pub fn new(grid: TorusGrid, n_particles: usize, dt: f64, t_final: f64, seed: u64) -> Self {
        Self {
            grid,
            n_particles,
            dt,
            t_final,
            mollifier_r: None,
            deposition: Deposition::Linear,
            seed,
            output_every: 10,
            newton: NewtonSettings::default(),
            mollify_diagnostics: false,
            force: ForceScheme::Interpolated,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_particles == 0 {
            return Err(Error::InvalidConfig("n_particles must be positive".into()));
        }
        if !(self.dt >= 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidConfig("dt must be finite and nonnegative".into()));
        }
        if !(self.t_final >= 0.0 && self.t_final.is_finite()) {
            return Err(Error::InvalidConfig("t_final must be finite and nonnegative".into()));
        }
        if self.output_every == 0 {
            return Err(Error::InvalidConfig("output_every must be positive".into()));
        }
        if let Some(r) = self.mollifier_r {
            make_mollifier(self.grid, r)?;
        }
        Ok(())
    }

    /// `0.5 h / max_speed`.
    pub fn cfl_limit(&self, max_speed: f64) -> f64 {
        0.5 * self.grid.spacing() / max_speed
    }

    pub fn check_cfl(&self, max_speed: f64) -> Result<()> {
        let limit = self.cfl_limit(max_speed);
        if self.dt > limit {
            return Err(Error::CflViolation { dt: self.dt, limit });
        }
        Ok(())
    }

    pub fn n_steps(&self) -> usize {
        if self.dt == 0.0 {
            0
        } else {
            libm::round(self.t_final / self.dt) as usize
        }
    }
}

/// Fields seen by the particles at one configuration.
#[derive(Debug, Clone)]
pub struct StageFields {
    pub deposited: ScalarField,
    /// Density handed to the solver, mollified when a width is set.
    pub source: ScalarField,
    pub solution: FieldSolution,
    /// Electric field used in the kicks, mollified when a width is set.
    pub force: VectorField,
    /// Potential whose negative gradient is `force`.
    pub force_potential: ScalarField,
}

fn compute_stage(
    ens: &ParticleEnsemble,
    kind: Deposition,
    solver: &FieldSolver,
    mollifier: Option<&Mollifier>,
    warm: Option<&ScalarField>,
) -> Result<StageFields> {
    let deposited = deposit_with(kind, ens, solver.grid())?;
    let source = match mollifier {
        Some(m) => m.convolve(&deposited)?,
        None => deposited.clone(),
    };
    let solution = solver.solve_fields(&source, warm)?;
    let field = solution.field();
    let (force, force_potential) = match mollifier {
        Some(m) => (m.convolve_vector(&field)?, m.convolve(&solution.potential())?),
        None => (field, solution.potential()),
    };
    Ok(StageFields { deposited, source, solution, force, force_potential })
}

fn kick(ens: &mut ParticleEnsemble, stage: &StageFields, cfg: &SimConfig, tau: f64) {
    let d = ens.dim();
    for p in 0..ens.len() {
        let e = match cfg.force {
            ForceScheme::Interpolated => interpolate_field_with(cfg.deposition, &stage.force, ens.position(p)),
            ForceScheme::PotentialGradient => {
                potential_gradient(cfg.deposition, &stage.force_potential, ens.position(p))
            }
        };
        let v = &mut ens.velocities_mut()[p * d..(p + 1) * d];
        for a in 0..d {
            v[a] += tau * e[a];
        }
    }
}

fn drift(ens: &mut ParticleEnsemble, tau: f64) {
    let (x, v) = ens.phase_space_mut();
    for (x, v) in x.iter_mut().zip(v.iter()) {
        *x = wrap_coordinate(*x + tau * v);
    }
}

/// One kick-drift-kick step computed from scratch.
pub fn step(ens: &ParticleEnsemble, cfg: &SimConfig, solver: &FieldSolver) -> Result<ParticleEnsemble> {
    let mollifier = cfg.mollifier_r.map(|r| make_mollifier(cfg.grid, r)).transpose()?;
    let start = compute_stage(ens, cfg.deposition, solver, mollifier.as_ref(), None)?;
    let mut out = ens.clone();
    kick(&mut out, &start, cfg, 0.5 * cfg.dt);
    drift(&mut out, cfg.dt);
    let end = compute_stage(&out, cfg.deposition, solver, mollifier.as_ref(), Some(&start.solution.u_hat))?;
    kick(&mut out, &end, cfg, 0.5 * cfg.dt);
    Ok(out)
}

/// Time loop state with the end-of-step fields cached for the next kick.
#[derive(Debug, Clone)]
pub struct Simulation {
    cfg: SimConfig,
    solver: FieldSolver,
    mollifier: Option<Mollifier>,
    ensemble: ParticleEnsemble,
    stage: StageFields,
    steps: usize,
    moment_order: f64,
}

impl Simulation {
    /// Validates the configuration, including the CFL bound for `ensemble`.
    pub fn new(cfg: SimConfig, ensemble: ParticleEnsemble) -> Result<Self> {
        cfg.validate()?;
        if ensemble.dim() != cfg.grid.dim() {
            return Err(Error::UnsupportedDimension(ensemble.dim()));
        }
        cfg.check_cfl(ensemble.max_speed())?;
        let solver = FieldSolver::with_settings(cfg.grid, cfg.newton);
        let mollifier = cfg.mollifier_r.map(|r| make_mollifier(cfg.grid, r)).transpose()?;
        let stage = compute_stage(&ensemble, cfg.deposition, &solver, mollifier.as_ref(), None)?;
        Ok(Self { cfg, solver, mollifier, ensemble, stage, steps: 0, moment_order: 4.0 })
    }

    /// Sets the order `m0` reported in the `m_m0` diagnostic.
    pub fn with_moment_order(mut self, m0: f64) -> Self {
        self.moment_order = m0;
        self
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn ensemble(&self) -> &ParticleEnsemble {
        &self.ensemble
    }

    pub fn into_ensemble(self) -> ParticleEnsemble {
        self.ensemble
    }

    pub fn stage(&self) -> &StageFields {
        &self.stage
    }

    pub fn mollifier(&self) -> Option<&Mollifier> {
        self.mollifier.as_ref()
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    pub fn time(&self) -> f64 {
        self.steps as f64 * self.cfg.dt
    }

    pub fn step(&mut self) -> Result<()> {
        let dt = self.cfg.dt;
        kick(&mut self.ensemble, &self.stage, &self.cfg, 0.5 * dt);
        drift(&mut self.ensemble, dt);
        let warm = self.stage.solution.u_hat.clone();
        self.stage = compute_stage(&self.ensemble, self.cfg.deposition, &self.solver, self.mollifier.as_ref(), Some(&warm))?;
        kick(&mut self.ensemble, &self.stage, &self.cfg, 0.5 * dt);
        self.steps += 1;
        Ok(())
    }

    pub fn record(&self) -> DiagnosticsRecord {
        let rho = if self.cfg.mollify_diagnostics { &self.stage.source } else { &self.stage.deposited };
        diagnostics::record(self.time(), &self.ensemble, &self.stage.solution, rho, self.moment_order)
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    /// Initial record, then one every `output_every` steps.
    pub records: Vec<DiagnosticsRecord>,
    pub ensemble: ParticleEnsemble,
}

/// Samples `data`, then steps to `t_final`.
pub fn run(cfg: &SimConfig, data: &InitialData) -> Result<RunOutput> {
    let ens = sample_initial(cfg, data)?;
    let mut sim = Simulation::new(cfg.clone(), ens)?.with_moment_order(data.m0);
    let mut records = alloc::vec![sim.record()];
    for k in 1..=cfg.n_steps() {
        sim.step()?;
        if k % cfg.output_every == 0 {
            records.push(sim.record());
        }
    }
    Ok(RunOutput { records, ensemble: sim.into_ensemble() })
}

//! Scenario drivers: each writes its artifacts and returns verdicts.

use std::fs;
use std::path::{Path, PathBuf};

use serde_json::json;
use vpme_core::diagnostics::{log_lipschitz_probe, DiagnosticsRecord};
use vpme_core::domain::{ScalarField, TorusGrid};
use vpme_core::field_solver::{regularity_report, FieldSolver};
use vpme_core::mollifier::make_mollifier;
use vpme_core::particles::{deposit_with, sample_initial, Simulation};
use vpme_core::transport_metrics::coupled_run;

use crate::config::{RunConfig, VerifyScale};
use crate::error::CliError;
use crate::io::{format_ensemble, format_field, format_vector_field, num, read_field, write_atomic, Csv};
use crate::report::{unix_seconds, verdict_json, RunManifest, Verdict};
use crate::verify;

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    /// Solve the split field equations for a density snapshot, or for the
    /// deposited initial data when no snapshot is given.
    SolvePoisson { density: Option<PathBuf> },
    Simulate,
    Stability,
    Verify,
}

impl Scenario {
    pub fn name(&self) -> &'static str {
        match self {
            Self::SolvePoisson { .. } => "solve-poisson",
            Self::Simulate => "simulate",
            Self::Stability => "stability",
            Self::Verify => "verify",
        }
    }

    /// Accepts the subcommand names and their long aliases.
    pub fn from_name(name: &str) -> Option<Self> {
        match name {
            "solve-poisson" | "poisson-verify" => Some(Self::SolvePoisson { density: None }),
            "simulate" => Some(Self::Simulate),
            "stability" => Some(Self::Stability),
            "verify" | "verify-all" => Some(Self::Verify),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOptions {
    pub out: PathBuf,
    pub quiet: bool,
    /// Worker cap from `VPME_THREADS`; recorded in the manifest.
    pub threads: usize,
}

#[derive(Debug, Clone)]
pub struct Outcome {
    pub verdicts: Vec<Verdict>,
    pub outputs: Vec<PathBuf>,
    pub manifest: PathBuf,
}

impl Outcome {
    pub fn pass(&self) -> bool {
        self.verdicts.iter().all(|v| v.pass)
    }

    pub fn exit_code(&self) -> i32 {
        if self.pass() {
            0
        } else {
            1
        }
    }

    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

struct Ctx<'a> {
    dir: &'a Path,
    quiet: bool,
    outputs: Vec<PathBuf>,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.dir.join(name);
        write_atomic(&path, contents.as_bytes())?;
        self.outputs.push(path);
        Ok(())
    }

    fn log(&self, msg: &str) {
        if !self.quiet {
            eprintln!("{msg}");
        }
    }

    fn report(&self, v: &Verdict) {
        self.log(&format!("  {:<24} {}", v.name, if v.pass { "pass" } else { "FAIL" }));
    }
}

pub const DIAGNOSTICS_HEADER: [&str; 10] =
    ["time", "kinetic", "field_energy", "ue_term", "total_energy", "m2", "m4", "m_m0", "rho_sup", "rho_lp"];

pub fn diagnostics_csv(records: &[DiagnosticsRecord], m0: f64) -> Csv {
    let mut csv = Csv::new(&DIAGNOSTICS_HEADER);
    for r in records {
        let m = |k: f64| r.moment(k).unwrap_or(f64::NAN);
        csv.numbers(&[
            r.time,
            r.kinetic,
            r.field_energy,
            r.ue_term,
            r.total,
            m(2.0),
            m(4.0),
            m(m0),
            r.rho_sup,
            r.rho_lp,
        ]);
    }
    csv
}

/// Runs `scenario`, writes its artifacts under `opts.out` and finishes with
/// the manifest.
pub fn run_scenario(scenario: &Scenario, cfg: &RunConfig, opts: &RunOptions) -> Result<Outcome, CliError> {
    let started = unix_seconds();
    fs::create_dir_all(&opts.out).map_err(|e| CliError::io(&opts.out, e))?;
    let mut ctx = Ctx { dir: &opts.out, quiet: opts.quiet, outputs: Vec::new() };
    ctx.log(&format!("{}: seed {}", scenario.name(), cfg.sim.seed));
    let verdicts = match scenario {
        Scenario::SolvePoisson { density } => solve_poisson(density.as_deref(), cfg, &mut ctx)?,
        Scenario::Simulate => simulate(cfg, &mut ctx)?,
        Scenario::Stability => stability(cfg, &mut ctx)?,
        Scenario::Verify => verify_all(cfg, &mut ctx)?,
    };
    let manifest = RunManifest {
        scenario: scenario.name().into(),
        version: env!("CARGO_PKG_VERSION").into(),
        seed: cfg.sim.seed,
        threads: opts.threads,
        config: cfg.to_text(),
        started_unix: started,
        finished_unix: unix_seconds(),
        outputs: ctx.outputs.iter().map(|p| p.display().to_string()).collect(),
        pass: verdicts.iter().all(|v| v.pass),
        verdicts: verdicts.clone(),
    };
    let manifest_path = opts.out.join("manifest.json");
    manifest.write(&manifest_path)?;
    Ok(Outcome { verdicts, outputs: ctx.outputs, manifest: manifest_path })
}

fn initial_density(cfg: &RunConfig) -> Result<ScalarField, CliError> {
    let ens = sample_initial(&cfg.sim, &cfg.initial_data())?;
    let rho = deposit_with(cfg.sim.deposition, &ens, cfg.sim.grid)?;
    Ok(match cfg.sim.mollifier_r {
        Some(r) => make_mollifier(cfg.sim.grid, r)?.convolve(&rho)?,
        None => rho,
    })
}

fn solve_poisson(density: Option<&Path>, cfg: &RunConfig, ctx: &mut Ctx) -> Result<Vec<Verdict>, CliError> {
    let rho = match density {
        Some(p) => read_field(p)?,
        None => initial_density(cfg)?,
    };
    let grid = rho.grid();
    let solver = FieldSolver::with_settings(grid, cfg.sim.newton);
    let sol = solver.solve_fields(&rho, None)?;
    ctx.write("ubar.txt", &format_field(&sol.u_bar))?;
    ctx.write("uhat.txt", &format_field(&sol.u_hat))?;
    ctx.write("efield.txt", &format_vector_field(&sol.field()))?;

    let reg = regularity_report(&rho, &sol);
    let defect = (sol.electron_mass() - 1.0).abs();
    let report = json!({
        "grid": grid.cells_per_dim(),
        "dim": grid.dim(),
        "newton_iters": sol.newton_iters,
        "residual": sol.final_residual,
        "electron_mass_defect": defect,
        "ubar_sup": reg.ubar_sup,
        "ubar_grad_sup": reg.ubar_grad_sup,
        "uhat_sup": reg.uhat_sup,
        "uhat_c1_bound": reg.uhat_c1_bound,
        "density_sup": reg.density_sup,
        "density_lp_norm": reg.density_lp_norm,
        "log_lipschitz_ratio": log_lipschitz_probe(&sol.e_bar, reg.density_sup, 2000, cfg.sim.seed),
    });
    ctx.write("regularity.json", &format!("{report}\n"))?;

    let mass = Verdict::new("mass_identity")
        .metric("defect", defect)
        .metric("newton_iters", sol.newton_iters as f64)
        .require(defect < 1e-8);
    let manufactured = verify::timed(|| verify::manufactured_solution(grid, cfg.sim.newton))?;
    let verdicts = vec![mass, manufactured];
    verdicts.iter().for_each(|v| ctx.report(v));
    ctx.write("poisson.json", &verdict_json("solve-poisson", &verdicts))?;
    Ok(verdicts)
}

fn simulate(cfg: &RunConfig, ctx: &mut Ctx) -> Result<Vec<Verdict>, CliError> {
    let data = cfg.initial_data();
    let ens = sample_initial(&cfg.sim, &data)?;
    let mut sim = Simulation::new(cfg.sim.clone(), ens)?.with_moment_order(cfg.m0);
    ctx.write("initial_particles.txt", &format_ensemble(sim.ensemble()))?;
    let steps = cfg.sim.n_steps();
    ctx.log(&format!("  {steps} steps of {} particles", cfg.sim.n_particles));
    let mut records = vec![sim.record()];
    for k in 1..=steps {
        sim.step()?;
        if k % cfg.sim.output_every == 0 {
            records.push(sim.record());
        }
    }
    ctx.write("diagnostics.csv", diagnostics_csv(&records, cfg.m0).as_str())?;
    ctx.write("final_particles.txt", &format_ensemble(sim.ensemble()))?;

    let e0 = records[0].total;
    let drift = records.iter().map(|r| ((r.total - e0) / e0).abs()).fold(0.0, f64::max);
    let mass_defect = (sim.ensemble().total_weight() - 1.0).abs();
    let finite = records.iter().all(|r| r.total.is_finite() && r.rho_sup.is_finite());
    let verdict = Verdict::new("simulation")
        .metric("steps", steps as f64)
        .metric("records", records.len() as f64)
        .metric("mass_defect", mass_defect)
        .metric("energy_drift", drift)
        .metric("rho_sup_max", records.iter().map(|r| r.rho_sup).fold(0.0, f64::max))
        .require(mass_defect <= 1e-12 && finite);
    ctx.report(&verdict);
    let verdicts = vec![verdict];
    ctx.write("simulate.json", &verdict_json("simulate", &verdicts))?;
    Ok(verdicts)
}

fn sweep_csv(csv: &mut Csv, check: &str, rows: &[[f64; 3]]) {
    for (i, r) in rows.iter().enumerate() {
        csv.row(&[check.into(), i.to_string(), num(r[0]), num(r[1]), num(r[2])]);
    }
}

fn stability(cfg: &RunConfig, ctx: &mut Ctx) -> Result<Vec<Verdict>, CliError> {
    ctx.log("  coupled run");
    let run = coupled_run(&cfg.sim, &cfg.initial_data(), cfg.perturbation(), cfg.subsample)?;
    let mut csv = Csv::new(&["t", "D", "W2_sq_est", "band", "I1", "I2", "I3", "I4"]);
    for s in &run.samples {
        csv.numbers(&[s.t, s.d, s.w2_sq_est, s.band, s.i[0], s.i[1], s.i[2], s.i[3]]);
    }
    ctx.write("stability.csv", csv.as_str())?;
    let coupled = verify::coupled_verdict("coupled_distance", &run);

    ctx.log("  inequality sweeps");
    let seed = cfg.sim.seed;
    let (loeper, loeper_rows) = verify::loeper_sweep(cfg.sim.grid, cfg.sweep_pairs, seed.wrapping_add(2))?;
    let (uhat, uhat_rows) = verify::uhat_sweep(&[cfg.sim.grid], cfg.sweep_pairs, seed.wrapping_add(3))?;
    let mut sweeps = Csv::new(&["check", "pair", "lhs", "rhs", "margin"]);
    sweep_csv(&mut sweeps, "loeper", &loeper_rows);
    sweep_csv(&mut sweeps, "uhat", &uhat_rows);
    ctx.write("inequalities.csv", sweeps.as_str())?;

    let verdicts = vec![coupled, loeper, uhat];
    verdicts.iter().for_each(|v| ctx.report(v));
    ctx.write("stability.json", &verdict_json("stability", &verdicts))?;
    Ok(verdicts)
}

/// Sample counts for the randomised properties.
fn counts(scale: VerifyScale) -> (usize, usize) {
    match scale {
        VerifyScale::Full => (100, 200),
        VerifyScale::Quick => (20, 40),
    }
}

fn verify_all(cfg: &RunConfig, ctx: &mut Ctx) -> Result<Vec<Verdict>, CliError> {
    let scale = cfg.verify_scale;
    let seed = cfg.sim.seed;
    let (pairs, samples) = counts(scale);
    let mut verdicts = Vec::new();
    let mut push = |ctx: &Ctx, v: Verdict| {
        ctx.report(&v);
        verdicts.push(v);
    };

    push(ctx, verify::timed(|| verify::manufactured_solution(TorusGrid::new(1, 128)?, cfg.sim.newton))?);
    push(ctx, verify::timed(|| verify::mass_identity(pairs, seed.wrapping_add(10)))?);
    let grid_1d = TorusGrid::new(1, 256)?;
    push(ctx, verify::timed(|| Ok(verify::loeper_sweep(grid_1d, pairs, seed.wrapping_add(11))?.0))?);
    let uhat_grids = [TorusGrid::new(1, 128)?, TorusGrid::new(2, 64)?];
    push(ctx, verify::timed(|| Ok(verify::uhat_sweep(&uhat_grids, pairs, seed.wrapping_add(12))?.0))?);
    push(ctx, verify::timed(|| verify::energy_conservation(scale, seed.wrapping_add(13)))?);
    push(ctx, verify::timed(|| verify::stationary_state(scale, seed.wrapping_add(14)))?);
    push(ctx, verify::timed(|| verify::moment_propagation(scale, seed.wrapping_add(15)))?);
    let mut kernel = None;
    push(
        ctx,
        verify::timed(|| {
            let (v, report) = verify::kernel_bound(scale)?;
            kernel = Some(report);
            Ok(v)
        })?,
    );
    push(ctx, verify::timed(|| verify::w2_exactness(50, samples, seed.wrapping_add(16)))?);
    push(ctx, verify::timed(|| verify::gronwall_contraction(scale, seed.wrapping_add(17)))?);
    push(ctx, verify::timed(|| verify::moment_interpolation(samples, seed.wrapping_add(18)))?);
    push(ctx, verify::timed(|| verify::determinism(seed.wrapping_add(19)))?);

    let mut csv = Csv::new(&["property", "metric", "value"]);
    for v in &verdicts {
        csv.row(&[v.name.clone(), "pass".into(), u8::from(v.pass).to_string()]);
        for (k, x) in &v.metrics {
            csv.row(&[v.name.clone(), k.clone(), num(*x)]);
        }
    }
    ctx.write("verify.csv", csv.as_str())?;
    if let Some(k) = kernel {
        ctx.write("kernel_bound.json", &serde_json::to_string_pretty(&k).expect("report serialises"))?;
    }
    ctx.write("verify.json", &verdict_json("verify", &verdicts))?;
    Ok(verdicts)
}

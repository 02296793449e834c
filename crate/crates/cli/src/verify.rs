//! Verification properties run by the `verify` scenario.
//!
//! Each property returns a [`Verdict`] whose metrics are deterministic for a
//! fixed seed; wall time is kept in [`Verdict::seconds`].

use std::f64::consts::PI;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use vpme_core::diagnostics::{interpolation_check, PhaseSpaceGrid};
use vpme_core::domain::{ScalarField, TorusGrid};
use vpme_core::field_solver::{FieldSolver, NewtonSettings};
use vpme_core::mollifier::{make_mollifier, regularised_kernel_bound, KernelBound};
use vpme_core::particles::{
    run, sample_initial, Deposition, Simulation, ForceScheme, InitialData, InitialKind, ParticleEnsemble, SimConfig,
};
use vpme_core::transport_metrics::{
    coupled_run, loeper_inequality_check, phase_space_distance_sq, uhat_stability_check, w2_ensembles_exact,
    CoupledRun, Perturbation,
};

use crate::config::VerifyScale;
use crate::error::CliError;
use crate::report::Verdict;
use crate::scenario::diagnostics_csv;

type Outcome = Result<Verdict, CliError>;

/// Runs `f` and stores its wall time in the verdict.
pub fn timed(f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut v = f()?;
    v.seconds = start.elapsed().as_secs_f64();
    Ok(v)
}

/// Random nonnegative unit-mean density; smoothed by a mollifier of width `r`
/// when given.
pub fn random_density(rng: &mut ChaCha8Rng, grid: TorusGrid, r: Option<f64>) -> Result<ScalarField, CliError> {
    let raw: Vec<f64> = (0..grid.len())
        .map(|_| {
            let u: f64 = rng.random_range(0.0..1.0);
            u * u * u
        })
        .collect();
    let mut f = ScalarField::new(grid, raw)?;
    if let Some(r) = r {
        f = make_mollifier(grid, r)?.convolve(&f)?.map(|v| v.max(0.0));
    }
    let m = f.mean();
    Ok(f.scale(1.0 / m))
}

/// Density bounded away from zero, `U(0.1, 2)` before normalisation.
pub fn random_positive_density(rng: &mut ChaCha8Rng, grid: TorusGrid) -> Result<ScalarField, CliError> {
    let f = ScalarField::new(grid, (0..grid.len()).map(|_| rng.random_range(0.1..2.0)).collect())?;
    let m = f.mean();
    Ok(f.scale(1.0 / m))
}

/// Recovers a prescribed `Uhat` from the `Ubar` that produces it.
pub fn manufactured_solution(grid: TorusGrid, settings: NewtonSettings) -> Outcome {
    let solver = FieldSolver::with_settings(grid, settings);
    let target = ScalarField::from_fn(grid, |x| 0.01 * (2.0 * PI * x[0]).cos());
    let lap = solver.spectral().laplacian(&target);
    let u_bar = lap.zip_map(&target, |l, t| (1.0 + l).ln() - t)?;
    let (u_hat, report) = solver.solve_nonlinear(&u_bar, None)?;
    let err = u_hat.sub(&target)?.sup_norm();
    Ok(Verdict::new("poisson_manufactured")
        .metric("sup_error", err)
        .metric("newton_iters", report.iterations as f64)
        .require(err < 1e-8 && report.iterations <= 10))
}

/// `|integral exp(U) - 1|` over random densities in one and two dimensions.
pub fn mass_identity(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Verdict::new("mass_identity");
    for (d, n) in [(1, 128), (2, 64)] {
        let grid = TorusGrid::new(d, n)?;
        let solver = FieldSolver::new(grid);
        let mut worst = 0.0f64;
        for _ in 0..count {
            let rho = random_density(&mut rng, grid, None)?;
            let sol = solver.solve_fields(&rho, None)?;
            worst = worst.max((sol.electron_mass() - 1.0).abs());
        }
        v = v.metric(&format!("max_defect_d{d}"), worst).require(worst < 1e-8);
    }
    Ok(v.metric("densities_per_dim", count as f64))
}

/// One line per checked pair: lhs, rhs and margin.
pub type SweepRows = Vec<[f64; 3]>;

/// Loeper's inequality on random mollified pairs with exact circular W2.
pub fn loeper_sweep(grid: TorusGrid, count: usize, seed: u64) -> Result<(Verdict, SweepRows), CliError> {
    let grid = TorusGrid::new(1, grid.cells_per_dim())?;
    let widths: Vec<f64> =
        [1.0 / 32.0, 1.0 / 16.0, 1.0 / 8.0].into_iter().filter(|&r| r >= 2.0 * grid.spacing()).collect();
    let widths = if widths.is_empty() { vec![0.25] } else { widths };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(count);
    let (mut violations, mut worst) = (0usize, 0.0f64);
    for _ in 0..count {
        let r = widths[rng.random_range(0..widths.len())];
        let h1 = random_density(&mut rng, grid, Some(r))?;
        let h2 = random_density(&mut rng, grid, Some(r))?;
        let rep = loeper_inequality_check(&h1, &h2)?;
        violations += usize::from(!rep.pass);
        if rep.rhs > 0.0 {
            worst = worst.max(rep.lhs / rep.rhs);
        }
        rows.push([rep.lhs, rep.rhs, rep.margin]);
    }
    let v = Verdict::new("loeper_inequality")
        .metric("pairs", count as f64)
        .metric("violations", violations as f64)
        .metric("max_lhs_over_rhs", worst)
        .require(violations == 0);
    Ok((v, rows))
}

/// Stability of `Uhat` in terms of `Ubar` with the explicit constant `A^3 / 4`.
pub fn uhat_sweep(grids: &[TorusGrid], count: usize, seed: u64) -> Result<(Verdict, SweepRows), CliError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut v = Verdict::new("uhat_stability").metric("pairs_per_grid", count as f64);
    let mut rows = Vec::new();
    for &grid in grids {
        let (mut violations, mut worst) = (0usize, 0.0f64);
        for _ in 0..count {
            let h1 = random_positive_density(&mut rng, grid)?;
            let h2 = random_positive_density(&mut rng, grid)?;
            let rep = uhat_stability_check(&h1, &h2)?.inequality;
            violations += usize::from(!rep.pass);
            if rep.rhs > 0.0 {
                worst = worst.max(rep.lhs / rep.rhs);
            }
            rows.push([rep.lhs, rep.rhs, rep.margin]);
        }
        let d = grid.dim();
        v = v
            .metric(&format!("violations_d{d}"), violations as f64)
            .metric(&format!("max_lhs_over_rhs_d{d}"), worst)
            .require(violations == 0);
    }
    Ok((v, rows))
}

/// Largest relative deviation of the total energy from its initial value.
fn energy_drift(cfg: &SimConfig, data: &InitialData) -> Result<f64, CliError> {
    let out = run(cfg, data)?;
    let e0 = out.records[0].total;
    Ok(out.records.iter().map(|r| ((r.total - e0) / e0).abs()).fold(0.0, f64::max))
}

/// Energy drift at `dt` and `dt / 2` for the energy-conserving transfer pair.
pub fn energy_conservation(scale: VerifyScale, seed: u64) -> Outcome {
    let (n, t_final) = match scale {
        VerifyScale::Full => (100_000, 2.0),
        VerifyScale::Quick => (20_000, 0.5),
    };
    let grid = TorusGrid::new(1, 128)?;
    let data = InitialData::with_defaults(
        InitialKind::PerturbedMaxwellian { amplitude: 0.5, mode: 1, temperature: 0.05 },
        1,
    );
    let drift = |dt: f64| {
        let mut cfg = SimConfig::new(grid, n, dt, t_final, seed);
        cfg.mollifier_r = Some(1.0 / 16.0);
        cfg.deposition = Deposition::CubicSpline;
        cfg.force = ForceScheme::PotentialGradient;
        cfg.output_every = (0.05 / dt).round() as usize;
        energy_drift(&cfg, &data)
    };
    let coarse = drift(1e-3)?;
    let fine = drift(5e-4)?;
    let ratio = coarse / fine;
    Ok(Verdict::new("energy_conservation")
        .metric("drift_dt", coarse)
        .metric("drift_half_dt", fine)
        .metric("ratio", ratio)
        .require(coarse < 1e-3 && (3.0..=5.0).contains(&ratio)))
}

/// The uniform Maxwellian stays within three times its initial sampling noise.
pub fn stationary_state(scale: VerifyScale, seed: u64) -> Outcome {
    let n = match scale {
        VerifyScale::Full => 100_000,
        VerifyScale::Quick => 20_000,
    };
    let grid = TorusGrid::new(1, 64)?;
    let cfg = SimConfig::new(grid, n, 0.01, 1.0, seed);
    let data = InitialData::with_defaults(InitialKind::UniformMaxwellian { temperature: 0.01 }, 1);
    let mut sim = Simulation::new(cfg.clone(), sample_initial(&cfg, &data)?)?;
    let deviation = |s: &Simulation| s.stage().deposited.map(|v| v - 1.0).sup_norm();
    let initial = deviation(&sim);
    let mut worst = initial;
    for _ in 0..cfg.n_steps() {
        sim.step()?;
        worst = worst.max(deviation(&sim));
    }
    let ratio = worst / initial;
    Ok(Verdict::new("stationary_state")
        .metric("initial_deviation", initial)
        .metric("max_deviation", worst)
        .metric("ratio", ratio)
        .require(ratio <= 3.0))
}

/// `M4(t) <= 10 M4(0) (1 + t)^6` for a two-dimensional perturbed Maxwellian.
pub fn moment_propagation(scale: VerifyScale, seed: u64) -> Outcome {
    let n = match scale {
        VerifyScale::Full => 200_000,
        VerifyScale::Quick => 20_000,
    };
    let grid = TorusGrid::new(2, 64)?;
    let mut cfg = SimConfig::new(grid, n, 0.01, 1.0, seed);
    cfg.mollifier_r = Some(1.0 / 16.0);
    let data = InitialData::new(InitialKind::PerturbedMaxwellian { amplitude: 0.3, mode: 1, temperature: 0.01 }, 3.0, 4.0);
    let out = run(&cfg, &data)?;
    let m0 = out.records[0].moment(4.0).unwrap_or(f64::NAN);
    let worst = out
        .records
        .iter()
        .map(|r| r.moment(4.0).unwrap_or(f64::NAN) / (m0 * (1.0 + r.time).powi(6)))
        .fold(0.0, f64::max);
    Ok(Verdict::new("moment_propagation")
        .metric("m4_initial", m0)
        .metric("max_normalised_m4", worst)
        .require(worst <= 10.0))
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelBoundReport {
    pub grid: usize,
    pub widths: Vec<f64>,
    pub bounds: Vec<f64>,
    pub max_over_widest: f64,
    pub pass: bool,
}

/// Uniform bound on the mollified Coulomb kernel as the width shrinks.
pub fn kernel_bound(scale: VerifyScale) -> Result<(Verdict, KernelBoundReport), CliError> {
    let n = match scale {
        VerifyScale::Full => 256,
        VerifyScale::Quick => 128,
    };
    let widths = [1.0 / 8.0, 1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0];
    let bounds: Vec<KernelBound> = regularised_kernel_bound(TorusGrid::new(2, n)?, &widths)?;
    let b: Vec<f64> = bounds.iter().map(|k| k.bound).collect();
    let ratio = b.iter().copied().fold(0.0, f64::max) / b[0];
    let mut v = Verdict::new("kernel_bound").metric("max_over_widest", ratio);
    for (r, bound) in widths.iter().zip(&b) {
        v = v.metric(&format!("bound_r1_{}", (1.0 / r).round()), *bound);
    }
    let report =
        KernelBoundReport { grid: n, widths: widths.to_vec(), bounds: b, max_over_widest: ratio, pass: ratio <= 2.0 };
    Ok((v.require(report.pass), report))
}

fn random_ensemble(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Result<ParticleEnsemble, CliError> {
    let x = (0..n * d).map(|_| rng.random_range(-0.5..0.5)).collect();
    let v = (0..n * d).map(|_| rng.random_range(-1.0..1.0)).collect();
    Ok(ParticleEnsemble::equal_weights(d, x, v, 0)?)
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    if n == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(n - 1) {
        for k in 0..n {
            let mut q = p.clone();
            q.insert(k, n - 1);
            out.push(q);
        }
    }
    out
}

/// Exact assignment against enumeration of all pairings, plus metric axioms.
pub fn w2_exactness(instances: usize, triples: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let perms = permutations(6);
    let mut mismatches = 0usize;
    for i in 0..instances {
        let d = 1 + i % 2;
        let a = random_ensemble(&mut rng, 6, d)?;
        let b = random_ensemble(&mut rng, 6, d)?;
        let brute = perms
            .iter()
            .map(|p| {
                let mut costs: Vec<f64> = (0..6)
                    .map(|k| phase_space_distance_sq(a.position(k), a.velocity(k), b.position(p[k]), b.velocity(p[k])))
                    .collect();
                costs.sort_by(f64::total_cmp);
                costs.iter().sum::<f64>() / 6.0
            })
            .fold(f64::INFINITY, f64::min);
        mismatches += usize::from(w2_ensembles_exact(&a, &b)? != brute.sqrt());
    }
    let (mut symmetry, mut triangle, mut identity) = (0usize, 0usize, 0usize);
    for i in 0..triples {
        let d = 1 + i % 2;
        let n = rng.random_range(1..12);
        let a = random_ensemble(&mut rng, n, d)?;
        let b = random_ensemble(&mut rng, n, d)?;
        let c = random_ensemble(&mut rng, n, d)?;
        let ab = w2_ensembles_exact(&a, &b)?;
        let bc = w2_ensembles_exact(&b, &c)?;
        let ac = w2_ensembles_exact(&a, &c)?;
        symmetry += usize::from((ab - w2_ensembles_exact(&b, &a)?).abs() > 1e-9);
        triangle += usize::from(ac > ab + bc + 1e-9);
        identity += usize::from(w2_ensembles_exact(&a, &a)? != 0.0);
    }
    Ok(Verdict::new("w2_exactness")
        .metric("brute_force_mismatches", mismatches as f64)
        .metric("symmetry_violations", symmetry as f64)
        .metric("triangle_violations", triangle as f64)
        .metric("identity_violations", identity as f64)
        .require(mismatches + symmetry + triangle + identity == 0))
}

/// Summary of a coupled run against the distance and envelope requirements.
pub fn coupled_verdict(name: &str, run: &CoupledRun) -> Verdict {
    let d_max = run.samples.iter().map(|s| s.d).fold(0.0, f64::max);
    let dominance = run.samples.iter().filter(|s| !s.dominates_w2()).count();
    Verdict::new(name)
        .metric("samples", run.samples.len() as f64)
        .metric("d_max", d_max)
        .metric("dominance_violations", dominance as f64)
        .metric("slope", run.fit.slope)
        .metric("c", run.fit.c)
        .metric("c_envelope", run.fit.c_envelope)
        .metric("fit_points", run.fit.points as f64)
        .require(dominance == 0 && d_max.is_finite() && run.fit.c.is_finite() && run.fit.c_envelope.is_finite())
}

/// Largest fitted slope of `log log(de / 4D)` still read as flat.
pub const FLAT_SLOPE: f64 = 0.05;

/// Coupled trajectories from a `1e-4` position kick in one dimension.
pub fn gronwall_contraction(scale: VerifyScale, seed: u64) -> Outcome {
    let (n, subsample) = match scale {
        VerifyScale::Full => (20_000, 512),
        VerifyScale::Quick => (4_000, 128),
    };
    let grid = TorusGrid::new(1, 64)?;
    let mut cfg = SimConfig::new(grid, n, 0.01, 1.0, seed);
    cfg.mollifier_r = Some(1.0 / 16.0);
    let data = InitialData::with_defaults(
        InitialKind::PerturbedMaxwellian { amplitude: 0.2, mode: 1, temperature: 0.01 },
        1,
    );
    let run = coupled_run(&cfg, &data, Perturbation { dx: 1e-4, dv: 0.0, seed: seed.wrapping_add(1) }, subsample)?;
    let v = coupled_verdict("gronwall_contraction", &run);
    let ok = v.get("d_max") < 1e-2 && v.get("slope") <= FLAT_SLOPE && v.get("fit_points") >= 2.0;
    Ok(v.require(ok))
}

fn random_phase_space(rng: &mut ChaCha8Rng, d: usize) -> Result<PhaseSpaceGrid, CliError> {
    let grid = TorusGrid::new(d, 8)?;
    let shells = rng.random_range(1..8);
    let mut radii = vec![0.0];
    for _ in 0..shells {
        let last = radii[radii.len() - 1];
        radii.push(last + rng.random_range(0.05..1.5));
    }
    let sectors = if d == 1 { 2 } else { rng.random_range(1..7) };
    let sparse = rng.random_bool(0.5);
    let values = (0..grid.len() * shells * sectors)
        .map(|_| if sparse && rng.random_bool(0.7) { 0.0 } else { rng.random_range(0.0..5.0) })
        .collect();
    Ok(PhaseSpaceGrid::new(grid, radii, sectors, values)?)
}

/// Moment interpolation with the explicit constant on random gridded data.
pub fn moment_interpolation(count: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut violations, mut worst, mut checks) = (0usize, 0.0f64, 0usize);
    for d in [1, 2] {
        for _ in 0..count {
            let g = random_phase_space(&mut rng, d)?;
            for (m, k) in [(2.0, 0.0), (4.0, 1.0), (4.0, 2.0)] {
                let rep = interpolation_check(&g, m, k)?;
                checks += 1;
                violations += usize::from(!rep.pass);
                if rep.rhs > 0.0 {
                    worst = worst.max(rep.lhs / rep.rhs);
                }
            }
        }
    }
    Ok(Verdict::new("moment_interpolation")
        .metric("checks", checks as f64)
        .metric("violations", violations as f64)
        .metric("max_lhs_over_rhs", worst)
        .require(violations == 0))
}

/// Two identical short runs must serialise to identical bytes.
pub fn determinism(seed: u64) -> Outcome {
    let grid = TorusGrid::new(1, 32)?;
    let mut cfg = SimConfig::new(grid, 2_000, 0.01, 0.2, seed);
    cfg.mollifier_r = Some(1.0 / 8.0);
    cfg.output_every = 2;
    let data = InitialData::with_defaults(InitialKind::TwoStream { drift: 0.3, temperature: 0.01 }, 1);
    let once = || -> Result<String, CliError> {
        let ens = sample_initial(&cfg, &data)?;
        let out = run(&cfg, &data)?;
        Ok(format!(
            "{}{}{}",
            crate::io::format_ensemble(&ens),
            diagnostics_csv(&out.records, data.m0).as_str(),
            crate::io::format_ensemble(&out.ensemble)
        ))
    };
    let same = once()? == once()?;
    Ok(Verdict::new("determinism").metric("identical", f64::from(u8::from(same))).require(same))
}

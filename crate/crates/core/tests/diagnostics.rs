use std::f64::consts::PI;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpme_core::diagnostics::{
    density_lp, energy, interpolation_check, interpolation_constant, log_lipschitz_probe, moment, PhaseSpaceGrid,
};
use vpme_core::domain::{ScalarField, TorusGrid, VectorField};
use vpme_core::field_solver::{solve_fields, FieldSolver};
use vpme_core::mollifier::make_mollifier;
use vpme_core::particles::{run, sample_initial, InitialData, InitialKind, ParticleEnsemble, SimConfig};
use vpme_core::Error;

/// Particles on the nodes of `grid` with the given velocities, so that `rho = 1`.
fn lattice(grid: TorusGrid, velocities: Vec<f64>) -> ParticleEnsemble {
    let positions: Vec<f64> = (0..grid.len()).map(|i| grid.node(i)[0]).collect();
    ParticleEnsemble::equal_weights(1, positions, velocities, 0).unwrap()
}

#[test]
fn neutral_state_energy_is_kinetic() {
    let grid = TorusGrid::new(1, 64).unwrap();
    let cfg = SimConfig::new(grid, 100_000, 0.0, 0.0, 17);
    let data = InitialData::with_defaults(InitialKind::UniformMaxwellian { temperature: 1.0 }, 1);
    let ens = sample_initial(&cfg, &data).unwrap();
    let sol = solve_fields(&ScalarField::constant(grid, 1.0)).unwrap();
    let e = energy(&ens, &sol);
    assert_eq!(e.field_energy, 0.0);
    assert_eq!(e.ue_term, 0.0);
    assert_eq!(e.total, e.kinetic);
    assert!((e.kinetic - 0.5).abs() < 0.01);
    assert!((moment(&ens, 2.0) - 1.0).abs() < 3.0 * (2.0f64 / 1e5).sqrt());
    assert!((moment(&ens, 4.0) - 3.0).abs() < 3.0 * (96.0f64 / 1e5).sqrt());

    let still = lattice(grid, vec![0.0; 64]);
    assert_eq!(moment(&still, 0.0), 1.0);
    for m in [0.5, 1.0, 2.0, 4.0, 7.3] {
        assert_eq!(moment(&still, m), 0.0);
    }
}

#[test]
fn energy_components_on_a_solved_density() {
    let grid = TorusGrid::new(1, 128).unwrap();
    let rho = ScalarField::from_fn(grid, |x| 1.0 + 0.5 * (2.0 * PI * x[0]).cos());
    let sol = solve_fields(&rho).unwrap();
    let ens = lattice(grid, vec![0.0; 128]);
    let e = energy(&ens, &sol);
    // Field energy agrees with the grid integral of |E|^2 for a well-resolved potential.
    assert!((e.field_energy - 0.5 * sol.field().l2_norm_sq()).abs() < 1e-12);
    assert!(e.ue_term >= -(-1.0f64).exp());
    assert!((e.total - (e.kinetic + e.field_energy + e.ue_term)).abs() == 0.0);
}

#[test]
fn density_norms() {
    let g = TorusGrid::new(1, 8).unwrap();
    assert!((density_lp(&ScalarField::constant(g, 1.0), 3.0).unwrap() - 1.0).abs() < 1e-15);
    let alt = ScalarField::new(g, (0..8).map(|i| if i % 2 == 0 { 2.0 } else { 0.0 }).collect()).unwrap();
    assert!((density_lp(&alt, 2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
    assert!(matches!(density_lp(&alt, 0.5), Err(Error::DomainError(_))));

    let g = TorusGrid::new(2, 32).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rho = ScalarField::new(g, (0..g.len()).map(|_| rng.random_range(0.0..3.0)).collect()).unwrap();
    for p in [1.0, 2.0, 1.5] {
        let reversed: f64 = rho.values().iter().rev().map(|v| v.powf(p)).sum::<f64>() * g.cell_volume();
        assert!((density_lp(&rho, p).unwrap() - reversed.powf(1.0 / p)).abs() < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncating_fast_particles_never_raises_moments(seed in 0u64..1000, cut in 0.2f64..3.0, m in 0.5f64..6.0) {
        let grid = TorusGrid::new(1, 16).unwrap();
        let cfg = SimConfig::new(grid, 500, 0.0, 0.0, seed);
        let data = InitialData::with_defaults(InitialKind::UniformMaxwellian { temperature: 1.0 }, 1);
        let ens = sample_initial(&cfg, &data).unwrap();
        if let Ok(cut_ens) = ens.filter(|_, v| v[0].abs() <= cut) {
            prop_assert!(moment(&cut_ens, m) <= moment(&ens, m) * (1.0 + 1e-12));
        }
    }
}

#[test]
fn ue_term_lower_bound_along_a_run() {
    let grid = TorusGrid::new(1, 64).unwrap();
    let mut cfg = SimConfig::new(grid, 5_000, 0.01, 0.5, 9);
    cfg.output_every = 5;
    let data = InitialData::with_defaults(
        InitialKind::PerturbedMaxwellian { amplitude: 0.8, mode: 2, temperature: 0.02 },
        1,
    );
    let out = run(&cfg, &data).unwrap();
    assert!(out.records.iter().all(|r| r.ue_term >= -(-1.0f64).exp()));
    assert!(out.records.iter().all(|r| r.moment(2.0).is_some() && r.moment(4.0).is_some()));
}

#[test]
fn interpolation_constant_on_the_unit_ball() {
    for d in [1usize, 2] {
        let grid = TorusGrid::new(d, 8).unwrap();
        let sectors = if d == 1 { 2 } else { 4 };
        let g = PhaseSpaceGrid::new(grid, vec![0.0, 0.5, 1.0], sectors, vec![1.0; grid.len() * 2 * sectors]).unwrap();
        let omega = if d == 1 { 2.0 } else { 2.0 * PI };
        for (m, k) in [(2.0, 0.0), (4.0, 1.0), (4.0, 2.0)] {
            let df = d as f64;
            let rep = interpolation_check(&g, m, k).unwrap();
            let theta = (k + df) / (m + df);
            assert!((rep.lhs - omega / (k + df)).abs() < 1e-12);
            let c = interpolation_constant(d, m, k).unwrap();
            assert!((rep.rhs - c * (omega / (m + df)).powf(theta)).abs() < 1e-12);
            assert!(rep.pass);
        }
    }
    assert!(interpolation_constant(1, 2.0, 2.0).is_err());
    assert!(interpolation_constant(1, 2.0, 3.0).is_err());
}

fn random_phase_space(rng: &mut ChaCha8Rng, d: usize) -> PhaseSpaceGrid {
    let grid = TorusGrid::new(d, 8).unwrap();
    let shells = rng.random_range(1..8);
    let mut radii = vec![0.0];
    for _ in 0..shells {
        let last = *radii.last().unwrap();
        radii.push(last + rng.random_range(0.05..1.5));
    }
    let sectors = if d == 1 { 2 } else { rng.random_range(1..7) };
    let sparse = rng.random_bool(0.5);
    let values = (0..grid.len() * shells * sectors)
        .map(|_| if sparse && rng.random_bool(0.7) { 0.0 } else { rng.random_range(0.0..5.0) })
        .collect();
    PhaseSpaceGrid::new(grid, radii, sectors, values).unwrap()
}

#[test]
fn interpolation_inequality_is_homogeneous_and_holds_on_random_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for d in [1, 2] {
        for _ in 0..200 {
            let g = random_phase_space(&mut rng, d);
            if g.sup_norm() == 0.0 {
                continue;
            }
            for (m, k) in [(2.0, 0.0), (4.0, 1.0), (4.0, 2.0)] {
                let a = interpolation_check(&g, m, k).unwrap();
                assert!(a.pass, "{a:?}");
                let b = interpolation_check(&g.scaled(3.7), m, k).unwrap();
                assert!((a.lhs / a.rhs - b.lhs / b.rhs).abs() < 1e-12);
            }
        }
    }
}

#[test]
fn binned_ensembles_satisfy_the_interpolation_inequality() {
    for d in [1, 2] {
        let grid = TorusGrid::new(d, 16).unwrap();
        let cfg = SimConfig::new(grid, 20_000, 0.0, 0.0, 5);
        let data = InitialData::with_defaults(InitialKind::TwoStream { drift: 0.8, temperature: 0.1 }, d);
        let ens = sample_initial(&cfg, &data).unwrap();
        let g = PhaseSpaceGrid::bin_ensemble(&ens, grid, 24, 8).unwrap();
        // Binning preserves mass.
        let mass: f64 = g.velocity_moment(0.0).iter().sum::<f64>() * grid.cell_volume();
        assert!((mass - 1.0).abs() < 1e-12);
        for (m, k) in [(2.0, 0.0), (4.0, 1.0), (4.0, 2.0)] {
            assert!(interpolation_check(&g, m, k).unwrap().pass);
        }
    }
}

fn ebar_ratio(n: usize, rho: impl Fn(f64) -> f64) -> f64 {
    let grid = TorusGrid::new(1, n).unwrap();
    let mut rho = ScalarField::from_fn(grid, |x| rho(x[0]));
    let mean = rho.mean();
    rho = rho.scale(1.0 / mean);
    let sol = FieldSolver::new(grid).solve_fields(&rho, None).unwrap();
    log_lipschitz_probe(&sol.e_bar, rho.sup_norm(), 4000, 1)
}

#[test]
fn log_lipschitz_probe_is_stable() {
    let grid = TorusGrid::new(2, 16).unwrap();
    assert_eq!(log_lipschitz_probe(&VectorField::zeros(grid), 1.0, 100, 0), 0.0);

    // In d = 1, Ebar' = rho - 1, so the ratio never exceeds 2.
    let smooth = |x: f64| 1.0 + 0.6 * (2.0 * PI * x).sin();
    let ratios: Vec<f64> = [128, 256, 512].iter().map(|&n| ebar_ratio(n, smooth)).collect();
    assert!(ratios.iter().all(|r| *r > 0.0 && *r <= 2.0));
    assert!(ratios[2] / ratios[0] < 2.0 && ratios[0] / ratios[2] < 2.0, "{ratios:?}");

    let g = TorusGrid::new(1, 512).unwrap();
    let bump = make_mollifier(g, 0.02).unwrap();
    let narrow = bump.samples().values().to_vec();
    let r = ebar_ratio(512, |x| {
        let i = (((x + 0.5) * 512.0).round() as usize) % 512;
        0.05 + narrow[i]
    });
    assert!(r.is_finite() && r <= 2.0, "{r}");
}

//! Acceptance suite: two full `verify` runs with the same seed, one line per
//! criterion. Exits nonzero if any criterion fails.

use std::fs;
use std::process::ExitCode;

use vpme::{run_scenario, Outcome, RunConfig, RunOptions, Scenario, Verdict};

const CONFIG: &str = "grid = 64\nn = 10000\ndt = 0.01\nt_final = 1\nseed = 7\n";

struct Criterion {
    id: usize,
    title: &'static str,
    ok: bool,
    detail: String,
}

fn verdict<'a>(o: &'a Outcome, name: &str) -> &'a Verdict {
    o.verdict(name).unwrap_or_else(|| panic!("verify did not report `{name}`"))
}

fn check(o: &Outcome) -> Vec<Criterion> {
    let mut out = Vec::new();
    let mut add = |id, title, ok, detail: String| out.push(Criterion { id, title, ok, detail });

    let v = verdict(o, "poisson_manufactured");
    add(
        1,
        "nonlinear Poisson manufactured solution",
        v.get("sup_error") < 1e-8 && v.get("newton_iters") <= 10.0 && v.seconds < 1.0,
        format!("sup error {:.2e}, {} Newton iterations, {:.3}s", v.get("sup_error"), v.get("newton_iters"), v.seconds),
    );

    let v = verdict(o, "mass_identity");
    add(
        2,
        "electron mass identity",
        v.get("densities_per_dim") == 100.0
            && v.get("max_defect_d1") < 1e-8
            && v.get("max_defect_d2") < 1e-8
            && v.seconds < 30.0,
        format!("max defect {:.2e} (d=1), {:.2e} (d=2), {:.1}s", v.get("max_defect_d1"), v.get("max_defect_d2"), v.seconds),
    );

    let v = verdict(o, "loeper_inequality");
    add(
        3,
        "Loeper inequality",
        v.get("pairs") == 100.0 && v.get("violations") == 0.0,
        format!("{} violations, max lhs/rhs {:.3}", v.get("violations"), v.get("max_lhs_over_rhs")),
    );

    let v = verdict(o, "uhat_stability");
    add(
        4,
        "Uhat stability with constant A^3/4",
        v.get("pairs_per_grid") == 100.0 && v.get("violations_d1") == 0.0 && v.get("violations_d2") == 0.0,
        format!(
            "violations {} (d=1), {} (d=2); max lhs/rhs {:.3}, {:.3}",
            v.get("violations_d1"),
            v.get("violations_d2"),
            v.get("max_lhs_over_rhs_d1"),
            v.get("max_lhs_over_rhs_d2")
        ),
    );

    let v = verdict(o, "energy_conservation");
    let ratio = v.get("ratio");
    add(
        5,
        "energy conservation, second order",
        v.get("drift_dt") < 1e-3 && (3.0..=5.0).contains(&ratio) && v.seconds < 120.0,
        format!("drift {:.2e} at dt, {:.2e} at dt/2, ratio {ratio:.4}, {:.1}s", v.get("drift_dt"), v.get("drift_half_dt"), v.seconds),
    );

    let v = verdict(o, "stationary_state");
    add(
        6,
        "stationary uniform Maxwellian",
        v.get("ratio") <= 3.0,
        format!("max |rho - 1| is {:.3}x its initial value", v.get("ratio")),
    );

    let v = verdict(o, "moment_propagation");
    add(
        7,
        "fourth moment growth in 2D",
        v.get("max_normalised_m4") <= 10.0 && v.seconds < 300.0,
        format!("max M4(t) / (M4(0) (1+t)^6) = {:.4}, {:.1}s", v.get("max_normalised_m4"), v.seconds),
    );

    let v = verdict(o, "kernel_bound");
    add(
        8,
        "uniform mollified kernel bound",
        v.get("max_over_widest") <= 2.0,
        format!("max B(r) / B(1/8) = {:.4}", v.get("max_over_widest")),
    );

    let v = verdict(o, "w2_exactness");
    let bad = ["brute_force_mismatches", "symmetry_violations", "triangle_violations", "identity_violations"]
        .iter()
        .map(|k| v.get(k))
        .sum::<f64>();
    add(9, "exact W2 against brute force", bad == 0.0, format!("{bad} mismatches or axiom violations"));

    let v = verdict(o, "gronwall_contraction");
    add(
        10,
        "Gronwall-type contraction",
        v.get("d_max") < 1e-2
            && v.get("dominance_violations") == 0.0
            && v.get("slope") <= vpme::verify::FLAT_SLOPE
            && v.get("c").is_finite(),
        format!(
            "max D {:.2e}, slope {:.3e}, C {:.3e}, {} samples below W2 band",
            v.get("d_max"),
            v.get("slope"),
            v.get("c"),
            v.get("dominance_violations")
        ),
    );

    let v = verdict(o, "moment_interpolation");
    add(
        11,
        "moment interpolation constant",
        v.get("checks") == 1200.0 && v.get("violations") == 0.0,
        format!("{} checks, {} violations, max lhs/rhs {:.3}", v.get("checks"), v.get("violations"), v.get("max_lhs_over_rhs")),
    );
    out
}

fn main() -> ExitCode {
    let cfg = RunConfig::parse(CONFIG).expect("reference config");
    let dir = tempfile::tempdir().expect("temporary directory");
    let runs: Vec<Outcome> = ["first", "second"]
        .iter()
        .map(|name| {
            let opts = RunOptions { out: dir.path().join(name), quiet: true, threads: 1 };
            run_scenario(&Scenario::Verify, &cfg, &opts).expect("verify run")
        })
        .collect();

    let mut criteria = check(&runs[0]);
    let body = |name: &str| fs::read(dir.path().join(name).join("verify.csv")).expect("verify.csv");
    let (a, b) = (body("first"), body("second"));
    criteria.push(Criterion {
        id: 12,
        title: "determinism of verify CSV",
        ok: a == b && verdict(&runs[0], "determinism").pass,
        detail: format!("{} bytes, identical: {}", a.len(), a == b),
    });

    for c in &criteria {
        println!("criterion {:>2} {} {}: {}", c.id, if c.ok { "PASS" } else { "FAIL" }, c.title, c.detail);
    }
    let failed = criteria.iter().filter(|c| !c.ok).count();
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vpme::io::{format_ensemble, format_field, parse_ensemble, parse_field, read_field, write_atomic, Csv};
use vpme::CliError;
use vpme_core::domain::{ScalarField, TorusGrid};
use vpme_core::particles::ParticleEnsemble;

#[test]
fn field_snapshot_round_trips_bit_for_bit() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (d, n) in [(1, 64), (2, 16)] {
        let grid = TorusGrid::new(d, n).unwrap();
        let f = ScalarField::new(grid, (0..grid.len()).map(|_| rng.random_range(-1e3..1e3) * 1e-7).collect()).unwrap();
        let text = format_field(&f);
        assert!(text.starts_with(&format!("# torus d={d} n={n}\n")));
        assert_eq!(text.lines().count(), grid.len() + 1);
        assert_eq!(parse_field(&text, Path::new("f")).unwrap(), f);
    }
}

#[test]
fn malformed_field_snapshots() {
    let p = Path::new("rho.txt");
    let err = |t: &str| parse_field(t, p).unwrap_err();
    assert!(matches!(err("# grid d=1 n=8\n"), CliError::Format { line: 1, .. }));
    assert!(matches!(err("# torus d=1\n"), CliError::Format { line: 1, .. }));
    assert!(matches!(err("# torus d=1 n=8\n1\n2\n"), CliError::Format { line: 0, .. }));
    assert!(matches!(err("# torus d=1 n=8\n1\nx\n"), CliError::Format { line: 3, .. }));
    assert!(matches!(err("# torus d=3 n=8\n"), CliError::Core(vpme_core::Error::UnsupportedDimension(3))));
}

#[test]
fn ensemble_snapshot_round_trips() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for d in [1, 2] {
        let n = 50;
        let x = (0..n * d).map(|_| rng.random_range(-0.5..0.5)).collect();
        let v = (0..n * d).map(|_| rng.random_range(-3.0..3.0)).collect();
        let ens = ParticleEnsemble::equal_weights(d, x, v, 42).unwrap();
        let text = format_ensemble(&ens);
        assert!(text.starts_with(&format!("# particles n={n} d={d} seed=42\n")));
        let back = parse_ensemble(&text, Path::new("e")).unwrap();
        assert_eq!(back.positions(), ens.positions());
        assert_eq!(back.velocities(), ens.velocities());
        assert_eq!(back.weights(), ens.weights());
        assert_eq!(back.rng_seed(), 42);
    }
    let short = "# particles n=2 d=1 seed=0\n0.1 0.0 1.0\n";
    assert!(matches!(parse_ensemble(short, Path::new("e")), Err(CliError::Format { .. })));
    let light = "# particles n=1 d=1 seed=0\n0.1 0.0 0.5\n";
    assert!(matches!(parse_ensemble(light, Path::new("e")), Err(CliError::Core(_))));
}

#[test]
fn atomic_write_leaves_only_the_target() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("rho.txt");
    let grid = TorusGrid::new(1, 8).unwrap();
    let f = ScalarField::constant(grid, 1.0);
    write_atomic(&path, format_field(&f).as_bytes()).unwrap();
    let names: Vec<_> = std::fs::read_dir(dir.path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(names, vec![std::ffi::OsString::from("rho.txt")]);
    assert_eq!(read_field(&path).unwrap(), f);
    assert!(matches!(read_field(&dir.path().join("missing")), Err(CliError::Io { .. })));
}

#[test]
fn csv_rows() {
    let mut csv = Csv::new(&["a", "b"]);
    csv.numbers(&[1.0, 0.1]);
    csv.row(&["x".into(), "y".into()]);
    assert_eq!(csv.as_str(), "a,b\n1.0000000000000000e0,1.0000000000000001e-1\nx,y\n");
}

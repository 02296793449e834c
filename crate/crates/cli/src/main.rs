use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;
use vpme::{run_scenario, threads_from_env, CliError, RunConfig, RunOptions, Scenario};

#[derive(Parser)]
#[command(name = "vpme", version, about = "Vlasov-Poisson with massless electrons on the periodic torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the split field equations and write potentials, field and a regularity report.
    #[command(alias = "poisson-verify")]
    SolvePoisson {
        #[command(flatten)]
        common: Common,
        /// Density snapshot; defaults to the deposited initial data.
        #[arg(long)]
        density: Option<PathBuf>,
    },
    /// Run the particle simulation and write diagnostics and snapshots.
    Simulate(Common),
    /// Coupled-trajectory run plus inequality sweeps.
    Stability(Common),
    /// Run every verification property.
    #[command(alias = "verify-all")]
    Verify(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Overrides the seed in the configuration file.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    quiet: bool,
}

fn fail(out: &Path, err: &CliError) -> ExitCode {
    let doc = json!({ "error": err.kind(), "message": err.to_string(), "exit_code": err.exit_code() });
    eprintln!("{doc}");
    if std::fs::create_dir_all(out).is_ok() {
        let _ = vpme::io::write_atomic(&out.join("failure.json"), format!("{doc}\n").as_bytes());
    }
    ExitCode::from(err.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenario, common) = match cli.command {
        Command::SolvePoisson { common, density } => (Scenario::SolvePoisson { density }, common),
        Command::Simulate(c) => (Scenario::Simulate, c),
        Command::Stability(c) => (Scenario::Stability, c),
        Command::Verify(c) => (Scenario::Verify, c),
    };
    let result = (|| {
        let threads = threads_from_env()?;
        let mut cfg = RunConfig::load(&common.config)?;
        if let Some(seed) = common.seed {
            cfg.sim.seed = seed;
        }
        let opts = RunOptions { out: common.out.clone(), quiet: common.quiet, threads };
        run_scenario(&scenario, &cfg, &opts)
    })();
    match result {
        Ok(outcome) => {
            if !common.quiet {
                eprintln!("{}", if outcome.pass() { "all checks passed" } else { "some checks failed" });
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => fail(&common.out, &e),
    }
}

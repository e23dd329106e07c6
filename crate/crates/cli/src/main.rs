use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use slowbond::harness::{self, ScenarioConfig};
use slowbond::{Error, Result};

#[derive(Parser)]
#[command(name = "slowbond", version, about = "Symmetric exclusion with a slow membrane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run particle replicas and write trajectories.
    Simulate(Common),
    /// Solve the hydrodynamic equation for the configured regime.
    SolvePde(Common),
    /// Compare particle replicas against the reference PDE for every N.
    Converge(Common),
    /// Tabulate errors against all three reference regimes for each beta.
    Phase(Common),
    /// Eigenpairs and operator checks of the discrete generators.
    Spectrum(Common),
    /// Membrane classification, boundary sums and Green identities.
    GeometryCheck(Common),
}

#[derive(Args)]
struct Common {
    /// Scenario file (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Output directory, created if missing.
    #[arg(long)]
    out: PathBuf,
    /// Overrides `master_seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores. Does not affect results.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

impl Common {
    fn load(&self) -> Result<ScenarioConfig> {
        let cfg = ScenarioConfig::load(&self.config)?;
        Ok(match self.seed {
            Some(seed) => cfg.with_seed(seed),
            None => cfg,
        })
    }
}

fn run(cli: Cli) -> Result<Vec<PathBuf>> {
    match cli.command {
        Command::Simulate(c) => {
            let cfg = c.load()?;
            harness::emit_simulation(&harness::run_simulation(&cfg, c.workers)?, &cfg, &c.out)
        }
        Command::SolvePde(c) => {
            let cfg = c.load()?;
            harness::emit_pde(&harness::run_pde(&cfg)?, &cfg, &c.out)
        }
        Command::Converge(c) => {
            let cfg = c.load()?;
            harness::emit_convergence(&harness::run_convergence(&cfg, c.workers)?, &cfg, &c.out)
        }
        Command::Phase(c) => {
            let cfg = c.load()?;
            harness::emit_phase(&harness::run_phase_transition(&cfg, c.workers)?, &cfg, &c.out)
        }
        Command::Spectrum(c) => {
            let cfg = c.load()?;
            harness::emit_spectrum(&harness::run_spectrum(&cfg)?, &cfg, &c.out)
        }
        Command::GeometryCheck(c) => {
            let cfg = c.load()?;
            harness::emit_geometry(&harness::run_geometry(&cfg)?, &cfg, &c.out)
        }
    }
}

fn one_line(e: &Error) -> String {
    e.to_string().replace(['\n', '\r'], " ")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(files) => {
            for f in files {
                println!("{}", f.strip_prefix(Path::new(".")).unwrap_or(&f).display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {}: {}", e.category(), one_line(&e));
            ExitCode::from(2)
        }
    }
}

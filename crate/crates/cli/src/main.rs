use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use conecurve_cli::{exit, load_problem, CliError, Outcome};

#[derive(Debug, Parser)]
#[command(name = "conecurve", version, about = "Prescribed Orlicz-integral Gauss curvature for pseudo-cones")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for (c, K); with --beta, over the enlarged cone Γ(β).
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        beta: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Record wall time and thread count (makes reports run-dependent).
        #[arg(long)]
        timing: bool,
    },
    /// Run the property battery on fixtures or on the body of a config.
    Verify {
        #[arg(long)]
        fixture: Vec<String>,
        #[arg(long)]
        config: Option<PathBuf>,
    },
    /// Curvature masses, entropy, b(K) and the copolar of a configured body.
    Measure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        timing: bool,
    },
    /// Write an OBJ mesh of the boundary of K inside a ball of radius R.
    Export {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        radius: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Solve over several enlarged cones and compare the constants c.
    DemoNonunique {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        beta: Vec<f64>,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        timing: bool,
    },
}

fn env_u64(name: &str) -> Result<Option<u64>, CliError> {
    match std::env::var(name) {
        Ok(v) => v.trim().parse().map(Some).map_err(|_| CliError::Usage(format!("{name}={v} is not an integer"))),
        Err(_) => Ok(None),
    }
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    if let Some(threads) = env_u64("CONECURVE_THREADS")? {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads as usize)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let seed = env_u64("CONECURVE_SEED")?;
    match cli.command {
        Command::Solve { config, beta, out, timing } => {
            conecurve_cli::cmd_solve(&load_problem(&config, seed)?, &beta, out.as_deref(), timing)
        }
        Command::Verify { fixture, config } => conecurve_cli::cmd_verify(&fixture, config.as_deref(), seed),
        Command::Measure { config, timing } => conecurve_cli::cmd_measure(&load_problem(&config, seed)?, timing),
        Command::Export { config, radius, out } => {
            conecurve_cli::cmd_export(&load_problem(&config, seed)?, radius, out.as_deref())
        }
        Command::DemoNonunique { config, beta, out_dir, timing } => {
            conecurve_cli::cmd_demo_nonunique(&load_problem(&config, seed)?, &beta, out_dir.as_deref(), timing)
                .map(|(outcome, _)| outcome)
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            outcome.code
        }
        Err(err) => {
            eprintln!("error: {err}");
            err.exit_code()
        }
    };
    ExitCode::from(u8::try_from(code).unwrap_or(exit::CONFIG as u8))
}

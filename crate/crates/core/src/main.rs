use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use wgmaxwell::cli::{run_convergence, run_probes, run_solve, RunConfig};

#[derive(Parser)]
#[command(name = "wgmaxwell", version, about = "Weak Galerkin solver for 2D time-harmonic Maxwell problems")]
struct Args {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a manufactured case on every level and fit convergence rates.
    Converge {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run the commutativity, coercivity, inf-sup and trace/inverse probes.
    Probes {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve the first level once, optionally writing the sparse system.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Matrix Market file for the matrix; the right side goes to `<path>.rhs`.
        #[arg(long)]
        dump_system: Option<PathBuf>,
    },
}

fn run(args: Args) -> wgmaxwell::Result<bool> {
    match args.command {
        Command::Converge { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = run_convergence(&cfg)?;
            println!("{}", report.csv("convergence").lines().skip(1).collect::<Vec<_>>().join("\n"));
            for f in &report.failures {
                eprintln!("FAIL: {f}");
            }
            println!("report written to {}", cfg.output.display());
            Ok(report.passed)
        }
        Command::Probes { config } => {
            let cfg = RunConfig::load(&config)?;
            let report = run_probes(&cfg)?;
            for e in &report.entries {
                println!("{} {}: {}", if e.passed { "PASS" } else { "FAIL" }, e.name, e.details);
            }
            Ok(report.passed)
        }
        Command::Solve { config, dump_system } => {
            let cfg = RunConfig::load(&config)?;
            let out = run_solve(&cfg, dump_system.as_deref())?;
            println!("{}", serde_json::to_string_pretty(&out)?);
            Ok(out.solver.warning.is_none())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Args::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

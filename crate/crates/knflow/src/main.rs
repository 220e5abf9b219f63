use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use knflow::{run, Command};

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Cmd {
    Coeff,
    Flow,
    CheckConvexity,
    CheckEvi,
    Reparam,
    Contract,
    AuditEnergy,
    Perturb,
    Pipeline,
}

impl From<Cmd> for Command {
    fn from(c: Cmd) -> Command {
        match c {
            Cmd::Coeff => Command::Coeff,
            Cmd::Flow => Command::Flow,
            Cmd::CheckConvexity => Command::CheckConvexity,
            Cmd::CheckEvi => Command::CheckEvi,
            Cmd::Reparam => Command::Reparam,
            Cmd::Contract => Command::Contract,
            Cmd::AuditEnergy => Command::AuditEnergy,
            Cmd::Perturb => Command::Perturb,
            Cmd::Pipeline => Command::Pipeline,
        }
    }
}

/// Gradient flows of (K,N)-convex functionals: experiments from JSON configs.
///
/// Exit status: 0 on success, 2 when a check fails, 1 on error.
#[derive(Debug, Parser)]
#[command(name = "knflow", version)]
struct Args {
    #[arg(value_enum)]
    command: Cmd,
    /// Experiment config (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; relative input paths are resolved against it.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

fn main() -> ExitCode {
    let args = Args::parse();
    match run(args.command.into(), &args.config, &args.out) {
        Ok(outcome) => {
            for c in &outcome.manifest.checks {
                println!(
                    "stage {} {}: {}",
                    c.stage,
                    c.command,
                    if c.pass { "pass" } else { "fail" }
                );
            }
            ExitCode::from(outcome.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("knflow: {e}");
            let mut src = std::error::Error::source(&e);
            while let Some(s) = src {
                eprintln!("  caused by: {s}");
                src = s.source();
            }
            ExitCode::from(1)
        }
    }
}

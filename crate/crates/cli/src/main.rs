use std::path::PathBuf;
use std::process::ExitCode;

use altlin_cli::{parse_tol_scale, run, Command, TOL_SCALE_VAR};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "altlin", version, about = "Alternative linear structures: checks and demo outputs")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Vector-space laws of the selected structure on random samples.
    Axioms(Io),
    /// Integral curves of the deformed coordinate fields.
    Curves(Io),
    /// Constant-field charged particle: trajectory and conservation summary.
    Magnetic(Io),
    /// Weyl, adjoint-mismatch and Moyal-limit report.
    Quantum(Io),
}

#[derive(Args)]
struct Io {
    /// Scenario JSON.
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding the scenario's output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, io) = match cli.command {
        Cmd::Axioms(io) => (Command::Axioms, io),
        Cmd::Curves(io) => (Command::Curves, io),
        Cmd::Magnetic(io) => (Command::Magnetic, io),
        Cmd::Quantum(io) => (Command::Quantum, io),
    };
    let scale = std::env::var(TOL_SCALE_VAR).ok();
    let result = parse_tol_scale(scale.as_deref()).and_then(|s| run(cmd, &io.config, io.out.as_deref(), s));
    match result {
        Ok(report) => {
            print!("{}", report.render());
            for f in &report.files {
                println!("wrote {}", f.display());
            }
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("altlin: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

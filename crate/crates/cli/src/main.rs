//! `soliton-pole-lab`: evaluate, track and verify the poles of two-soliton mKdV solutions.

mod commands;
mod config;

use std::io::Write;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Failure, Output};
use config::{Common, Settings};

#[derive(Parser, Debug)]
#[command(name = "soliton-pole-lab", version, about)]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate u at one complex point.
    Eval(commands::EvalArgs),
    /// Poles in the fundamental strip from the global root finder (exact mode only).
    Poles(commands::PolesArgs),
    /// Track every pole curve over a time interval.
    Track(commands::SpanArgs),
    /// Match tracked curves against the asymptotic pole families.
    Asympt(commands::AsymptArgs),
    /// Run the invariant suite; exit 1 when any check fails.
    Verify,
    /// Construct a blowup on a horizontal line and fit its rate.
    Blowup(commands::BlowupArgs),
    /// Centre derivatives, speeds and maxima across wavenumber ratios.
    Interaction(commands::InteractionArgs),
}

fn run(cli: Cli) -> Result<Output, Failure> {
    let settings = Settings::merge(&cli.common).map_err(Failure::Usage)?;
    match cli.command {
        Command::Eval(a) => commands::eval(&settings, a),
        Command::Poles(a) => commands::poles(&settings, a),
        Command::Track(a) => commands::track(&settings, a),
        Command::Asympt(a) => commands::asympt(&settings, a),
        Command::Verify => commands::verify(&settings),
        Command::Blowup(a) => commands::blowup(&settings, a),
        Command::Interaction(a) => commands::interaction(&settings, a),
    }
}

fn emit(out: &Output) -> std::io::Result<()> {
    match &out.path {
        Some(p) => std::fs::write(p, &out.text),
        None => match std::io::stdout().lock().write_all(out.text.as_bytes()) {
            Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
            other => other,
        },
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => match emit(&out) {
            Ok(()) if out.passed => ExitCode::SUCCESS,
            Ok(()) => ExitCode::from(1),
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(1)
            }
        },
        Err(Failure::Usage(e)) => {
            eprintln!("usage error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

//! `katetov`: build Katětov towers, check their limit properties, export artifacts.
//!
//! Exit status: 0 when every check passes, 2 when a check finds a counterexample (the
//! report says which), 1 on usage, input or capacity errors.

mod commands;
mod config;
mod report;

use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{BergmanCmd, BuildCmd, EmbedCmd, ExportCmd, ExtendCmd, GenericKCmd, MetricCmd, VerifyCmd};

#[derive(Parser, Debug)]
#[command(name = "katetov", version, about = "Katětov towers and Fraïssé limits at finite depth")]
struct Cli {
    /// Worker threads; 1 runs every fan-out sequentially.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Expand the tower over a seed to a depth.
    Build(BuildCmd),
    /// Check that every one-point extension of small substructures of a level is realized.
    VerifyEp(VerifyCmd),
    /// Extend a finite partial map of the limit to a truncated endomorphism.
    Extend(ExtendCmd),
    /// Lift endomorphisms of a seed to the tower and check the lift is a monoid embedding.
    EmbedEndos(EmbedCmd),
    /// Build K(A) for a graph by one-point pushouts.
    GenericK(GenericKCmd),
    /// Katětov functions and the metric tower on a discrete space.
    MetricDemo(MetricCmd),
    /// Check the distortion identities and word evaluations on the JEP chain.
    BergmanCheck(BergmanCmd),
    /// Re-export a stored tower as JSON, DOT or text.
    Export(ExportCmd),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let exec = config::execution(cli.jobs);
    let outcome = match cli.command {
        Command::Build(c) => c.run(exec),
        Command::VerifyEp(c) => c.run(exec),
        Command::Extend(c) => c.run(exec),
        Command::EmbedEndos(c) => c.run(exec),
        Command::GenericK(c) => c.run(exec),
        Command::MetricDemo(c) => c.run(exec),
        Command::BergmanCheck(c) => c.run(exec),
        Command::Export(c) => c.run(exec),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

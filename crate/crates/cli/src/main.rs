//! `demix`: generate planted instances, demix mixtures, run the
//! concentration checks and the MNIST demo.
//!
//! Exit codes: 0 success, 1 internal failure, 2 malformed input,
//! 3 solver divergence, 4 a statistical assertion failed.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod demix;
mod generate;
mod manifest;
mod mnist;
mod output;
mod phase;
mod plot;
mod render;
mod replay;
mod verify;

use std::process::ExitCode;

use clap::{Parser, Subcommand};
use demix_core::DemixError;

#[derive(Parser, Debug)]
#[command(name = "demix", version, about = "Latent-space demixing with Lipschitz generators")]
pub struct Cli {
    /// Cap on worker threads; defaults to one per core.
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a planted instance: generators, latents, signals and mixture.
    Generate(generate::Args),
    /// Recover both signals from a mixture.
    Demix(demix::Args),
    /// Run a deviation, S-REC or width check from a JSON config.
    Verify(verify::Args),
    /// Recovery error against the number of measurements.
    #[command(alias = "sweep")]
    Phase(phase::Args),
    /// Demix two MNIST digits with exported decoders.
    MnistDemo(mnist::Args),
    /// Plot a result or phase report as PNG.
    Render(render::Args),
    /// Rerun the command recorded in a manifest.
    Replay(replay::Args),
}

/// Result of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Passed,
    AssertionsFailed,
}

/// Input that parsed but cannot be used.
#[derive(Debug)]
pub struct InputError(pub String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

pub fn input_error(msg: impl Into<String>) -> anyhow::Error {
    InputError(msg.into()).into()
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if let Some(e) = err.downcast_ref::<DemixError>() {
        return match e {
            DemixError::Diverged { .. } => 3,
            _ => 2,
        };
    }
    if err.downcast_ref::<InputError>().is_some()
        || err.downcast_ref::<clap::Error>().is_some()
        || err.downcast_ref::<image::ImageError>().is_some()
        || err.downcast_ref::<serde_json::Error>().is_some()
    {
        return 2;
    }
    1
}

/// Parses `argv` (without the program name) and runs it.
pub fn run(argv: Vec<String>) -> anyhow::Result<Outcome> {
    let cli = Cli::try_parse_from(std::iter::once("demix".to_string()).chain(argv.iter().cloned()))?;
    dispatch(cli.command, argv)
}

fn dispatch(command: Command, argv: Vec<String>) -> anyhow::Result<Outcome> {
    match command {
        Command::Generate(a) => generate::run(a, argv),
        Command::Demix(a) => demix::run(a, argv),
        Command::Verify(a) => verify::run(a, argv),
        Command::Phase(a) => phase::run(a, argv),
        Command::MnistDemo(a) => mnist::run(a, argv),
        Command::Render(a) => render::run(a, argv),
        Command::Replay(a) => replay::run(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::env::args()) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot size the thread pool: {e}");
            return ExitCode::from(2);
        }
    }
    // The thread cap does not change any output, so it stays out of the manifest.
    let argv = manifest::strip_threads(argv);
    match dispatch(cli.command, argv) {
        Ok(Outcome::Passed) => ExitCode::SUCCESS,
        Ok(Outcome::AssertionsFailed) => {
            eprintln!("one or more statistical assertions failed; reports were written");
            ExitCode::from(4)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

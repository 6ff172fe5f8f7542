//! `graphon-chroma`: chromatic coefficients of block graphons and colouring experiments.

mod commands;
mod config;
mod output;

use clap::{Parser, Subcommand};
use config::RunConfig;
use serde_json::json;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "graphon-chroma", version, about, long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// JSON manifest with any of the options below; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunConfig,
}

#[derive(Clone, Copy, Subcommand)]
enum Command {
    /// Balanced coefficient phi(W) and its maximising block set.
    Phi,
    /// Optimal coefficient phi_*(W), its decomposition and bounds.
    Phistar,
    /// Closed-form phi for the block1 / block2 families.
    ClosedForm,
    /// Colour sampled graphs with several strategies (CSV by default).
    Simulate,
    /// Randomised property suites.
    Properties,
    /// Sample G(n, W) (or a block model with --sizes) as an edge list.
    Sample,
    /// Sample a graph and split its vertices by decomposition type.
    Split,
    /// Sample a graph and colour it with one strategy.
    Colour,
}

#[derive(Debug)]
pub struct CliError {
    kind: String,
    message: String,
    code: u8,
}

impl CliError {
    pub fn usage(message: String) -> Self {
        Self { kind: "usage".into(), message, code: 2 }
    }

    pub fn io(path: &Path, e: std::io::Error) -> Self {
        Self { kind: "io".into(), message: format!("{}: {e}", path.display()), code: 1 }
    }

    pub fn parse(path: &Path, e: serde_json::Error) -> Self {
        Self { kind: "parse".into(), message: format!("{}: {e}", path.display()), code: 1 }
    }
}

impl From<graphon_chroma::Error> for CliError {
    fn from(e: graphon_chroma::Error) -> Self {
        Self { kind: e.kind().into(), message: e.to_string(), code: 1 }
    }
}

fn threads() -> Result<(), CliError> {
    let Ok(v) = std::env::var("GRAPHON_CHROMA_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::usage(format!("GRAPHON_CHROMA_THREADS must be a positive integer, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::usage(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<bool, CliError> {
    threads()?;
    let cfg = match &cli.config {
        Some(path) => cli.run.over_manifest(path)?,
        None => cli.run,
    };
    let (out, passed) = match cli.command {
        Command::Phi => commands::phi_cmd(&cfg),
        Command::Phistar => commands::phistar_cmd(&cfg),
        Command::ClosedForm => commands::closed_form_cmd(&cfg),
        Command::Simulate => commands::simulate_cmd(&cfg),
        Command::Properties => commands::properties_cmd(&cfg),
        Command::Sample => commands::sample_cmd(&cfg),
        Command::Split => commands::split_cmd(&cfg),
        Command::Colour => commands::colour_cmd(&cfg),
    }?;
    output::write(&output::render(out), cfg.out.as_deref())?;
    Ok(passed)
}

fn fail(e: CliError) -> ExitCode {
    let body = json!({"error": {"kind": e.kind, "message": e.message}});
    println!("{}", serde_json::to_string(&body).expect("error json"));
    ExitCode::from(e.code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => {
            // --help and --version
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => return fail(CliError::usage(e.render().to_string().trim().to_string())),
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => fail(e),
    }
}

mod args;
mod commands;
mod io;
mod manifest;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;
use lle_spectra::LleError;
use serde_json::json;

use args::{Cli, Command};
use commands::{diag, Outcome};
use manifest::{hash_all, RunManifest};

const THREADS_ENV: &str = "LLE_SPECTRA_THREADS";

#[derive(Debug)]
pub enum CliError {
    /// Bad arguments or unreadable input; exit code 2.
    Usage(String),
    /// A numerical step failed; exit code 3.
    Numerical(String),
}

impl CliError {
    pub fn io(path: &Path, e: std::io::Error) -> Self {
        CliError::Usage(format!("{}: {e}", path.display()))
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<LleError> for CliError {
    fn from(e: LleError) -> Self {
        match e {
            LleError::InvalidArgument(_) | LleError::Parse(_) | LleError::Io(_) => CliError::Usage(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<(), CliError> {
    let threads = match std::env::var(THREADS_ENV) {
        Ok(v) => Some(
            v.trim()
                .parse::<usize>()
                .map_err(|_| CliError::Usage(format!("{THREADS_ENV} must be a positive integer, got '{v}'")))?,
        ),
        Err(_) => flag,
    };
    match threads {
        Some(0) => Err(CliError::Usage("thread count must be positive".into())),
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::Usage(e.to_string())),
        None => Ok(()),
    }
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Generate(_) => "generate",
        Command::Spectrum(_) => "spectrum",
        Command::Kernel(_) => "kernel",
        Command::Covariance(_) => "covariance",
        Command::Embed(_) => "embed",
        Command::Compare(_) => "compare",
        Command::Theory(_) => "theory",
        Command::Replay(_) => "replay",
    }
}

fn execute(command: &Command) -> Result<Outcome, CliError> {
    match command {
        Command::Generate(a) => commands::generate(a),
        Command::Spectrum(a) => commands::spectrum(a),
        Command::Kernel(a) => commands::kernel(a),
        Command::Covariance(a) => commands::covariance(a),
        Command::Embed(a) => commands::embed_cmd(a),
        Command::Compare(a) => commands::compare(a),
        Command::Theory(a) => commands::theory(a),
        Command::Replay(_) => Err(CliError::Usage("replay cannot replay itself".into())),
    }
}

/// Runs a command and writes its manifest.
fn run_recorded(command: &Command, argv: &[String]) -> Result<(), CliError> {
    let start = Instant::now();
    let outcome = execute(command)?;
    if let Some(path) = &outcome.manifest {
        let manifest = RunManifest {
            command: command_name(command).to_string(),
            argv: argv.to_vec(),
            parameters: outcome.parameters.clone(),
            seed: outcome.seed,
            inputs: hash_all(&outcome.inputs)?,
            outputs: hash_all(&outcome.outputs)?,
            wall_time_s: start.elapsed().as_secs_f64(),
            library_version: env!("CARGO_PKG_VERSION").to_string(),
        };
        manifest.write(path)?;
    }
    match outcome.failure {
        Some(msg) => Err(CliError::Numerical(msg)),
        None => Ok(()),
    }
}

/// Reruns the recorded arguments and checks every output hash.
fn replay(path: &Path) -> Result<(), CliError> {
    let recorded = RunManifest::read(path)?;
    for input in &recorded.inputs {
        let now = manifest::sha256_file(&input.path)?;
        if now != input.sha256 {
            return Err(CliError::Usage(format!("input {} changed since the run", input.path.display())));
        }
    }
    let cli = Cli::try_parse_from(std::iter::once("lle-spectra".to_string()).chain(recorded.argv.iter().cloned()))
        .map_err(|e| CliError::Usage(format!("manifest arguments no longer parse: {e}")))?;
    let outcome = execute(&cli.command)?;
    let paths: Vec<PathBuf> = outcome.outputs.clone();
    let now = hash_all(&paths)?;
    let mismatched: Vec<String> = recorded
        .outputs
        .iter()
        .filter(|f| !now.contains(f))
        .map(|f| f.path.display().to_string())
        .collect();
    diag(json!({"event": "replay", "outputs": now.len(), "mismatched": mismatched}));
    if mismatched.is_empty() && now.len() == recorded.outputs.len() {
        Ok(())
    } else {
        Err(CliError::Numerical(format!("replay differs in {} output(s)", mismatched.len().max(1))))
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => e.exit(),
    };
    let result = configure_threads(cli.threads).and_then(|_| match &cli.command {
        Command::Replay(a) => replay(&a.manifest),
        other => run_recorded(other, &argv),
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            diag(json!({"event": "error", "exit_code": e.code(), "message": e.message()}));
            ExitCode::from(e.code())
        }
    }
}

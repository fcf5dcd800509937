//! Command-line front end: configuration, dispatch and file output.

pub mod commands;
pub mod config;
pub mod output;

use thiserror::Error;

use crate::config::{Cli, Command, CommandKind, RunConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Numerical(_) => EXIT_NUMERICAL,
        }
    }
}

impl From<tfic::Error> for CliError {
    fn from(e: tfic::Error) -> Self {
        use tfic::Error as E;
        match e {
            E::Numerical(_) | E::NormBound(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

/// Runs one invocation and returns the process exit status.
pub fn run(cli: Cli) -> i32 {
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("tfic: {e}");
            e.exit_code()
        }
    }
}

fn execute(cli: Cli) -> Result<i32, CliError> {
    let (kind, args) = match cli.command {
        Command::Evolve(a) => (CommandKind::Evolve, a),
        Command::Scan(a) => (CommandKind::Scan, a),
        Command::Peaks(a) => (CommandKind::Peaks, a),
        Command::ValidateRwa(a) => (CommandKind::ValidateRwa, a),
        Command::Heisenberg(a) => (CommandKind::Heisenberg, a),
        Command::Refit(a) => {
            let report = commands::refit(&a.summary)?;
            let output = a.output.unwrap_or_else(|| std::path::PathBuf::from("."));
            println!("{}", commands::write_refit(&report, &output)?.display());
            if !report.matches_input {
                eprintln!("tfic: warning: recomputed fits differ from the stored ones");
                return Ok(EXIT_PARTIAL);
            }
            return Ok(EXIT_OK);
        }
    };
    let config = RunConfig::resolve(kind, &args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| CliError::Config(format!("--workers {}: {e}", config.workers)))?;
    let outcome = pool.install(|| commands::run_command(&config))?;
    for f in &outcome.files {
        println!("{}", f.display());
    }
    for w in outcome.partial.iter().chain(&outcome.notes) {
        eprintln!("tfic: warning: {w}");
    }
    Ok(if outcome.partial.is_empty() { EXIT_OK } else { EXIT_PARTIAL })
}

//! Command-line front end. Exit codes: 0 ok, 2 configuration error,
//! 3 numerical or truncation failure, 4 oracle deviation above tolerance.

pub mod args;
pub mod commands;
pub mod config;
pub mod grid;
pub mod output;

use std::io::Write;
use std::path::{Path, PathBuf};

pub use args::{Cli, Command, CommandKind, OraclePath, RunArgs};
pub use commands::{execute, Artifact, Outcome};
pub use config::{Axis, AxisKind, RunConfig};
pub use grid::GridSpec;
pub use output::{Format, Table};

use crate::error::Error;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] Error),
    #[error("{column} = {value} at row {row} violates {bound}")]
    Bounds {
        column: String,
        row: usize,
        value: f64,
        bound: &'static str,
    },
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io { .. } => 2,
            CliError::Core(e) => match e {
                Error::NonPositiveCoupling { .. }
                | Error::NegativeRate { .. }
                | Error::ConstrictionViolated { .. }
                | Error::InvalidPolicy(_)
                | Error::InvalidArgument(_) => 2,
                Error::TruncationCapExceeded { .. }
                | Error::CutoffTooSmall { .. }
                | Error::NormDrift { .. }
                | Error::LeakageExceeded { .. }
                | Error::InsufficientSamples { .. } => 3,
            },
            CliError::Bounds { .. } => 3,
        }
    }
}

/// Output path for one artifact: the suffix goes before the extension.
pub fn artifact_path(base: &Path, suffix: &str, format: Format) -> PathBuf {
    if suffix.is_empty() {
        return base.to_path_buf();
    }
    let stem = base.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let ext = base
        .extension()
        .map(|e| e.to_string_lossy().into_owned())
        .unwrap_or_else(|| format.extension().to_string());
    base.with_file_name(format!("{stem}_{suffix}.{ext}"))
}

/// Write every artifact once the whole run has been assembled.
pub fn emit(outcome: &Outcome, config: &RunConfig) -> Result<Vec<PathBuf>, CliError> {
    let mut written = Vec::new();
    match &config.output {
        Some(base) => {
            let single = outcome.artifacts.len() == 1;
            for art in &outcome.artifacts {
                let path = if single { base.clone() } else { artifact_path(base, &art.suffix, config.format) };
                std::fs::write(&path, art.table.render(config.format)).map_err(|source| CliError::Io {
                    path: path.clone(),
                    source,
                })?;
                written.push(path);
            }
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            for art in &outcome.artifacts {
                lock.write_all(art.table.render(config.format).as_bytes())
                    .map_err(|source| CliError::Io {
                        path: "<stdout>".into(),
                        source,
                    })?;
            }
        }
    }
    Ok(written)
}

/// Run a parsed command line and return the process exit code.
pub fn run(cli: &Cli) -> i32 {
    let (kind, args) = cli.command.split();
    let result = RunConfig::from_args(kind, args).and_then(|config| {
        let outcome = execute(&config)?;
        if kind == CommandKind::Validate {
            // The report is the primary output; the table only goes to a file.
            print!("{}", outcome.report);
            if config.output.is_some() {
                emit(&outcome, &config)?;
            }
        } else {
            eprint!("{}", outcome.report);
            emit(&outcome, &config)?;
        }
        Ok(outcome)
    });
    match result {
        Ok(outcome) => match outcome.breach {
            Some((dev, tol)) => {
                eprintln!("error: max deviation {dev:.3e} exceeds tolerance {tol:.1e}");
                4
            }
            None => 0,
        },
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use super::grid::GridSpec;
use super::output::Format;
use crate::oracle::Propagation;

#[derive(Debug, Parser)]
#[command(name = "drivenjc", version, about = "Driven Jaynes-Cummings inversion and lineshape data")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CommandKind {
    Inversion,
    Lineshape,
    Surface,
    Validate,
}

impl CommandKind {
    pub fn name(self) -> &'static str {
        match self {
            CommandKind::Inversion => "inversion",
            CommandKind::Lineshape => "lineshape",
            CommandKind::Surface => "surface",
            CommandKind::Validate => "validate",
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Atomic inversion <sigma_z>(t) on a time grid.
    Inversion(RunArgs),
    /// Time-averaged lineshape W(delta), one file per field value.
    Lineshape(RunArgs),
    /// W(delta) against mean photon number or atomic drive strength.
    Surface(RunArgs),
    /// Compare the closed forms with the truncated Fock-space oracle.
    Validate(RunArgs),
}

impl Command {
    pub fn split(&self) -> (CommandKind, &RunArgs) {
        match self {
            Command::Inversion(a) => (CommandKind::Inversion, a),
            Command::Lineshape(a) => (CommandKind::Lineshape, a),
            Command::Surface(a) => (CommandKind::Surface, a),
            Command::Validate(a) => (CommandKind::Validate, a),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OraclePath {
    /// RK4 on the time-dependent lab-frame Hamiltonian.
    Lab,
    /// Exact evolution in the displaced drive frame.
    Transformed,
}

impl From<OraclePath> for Propagation {
    fn from(p: OraclePath) -> Self {
        match p {
            OraclePath::Lab => Propagation::Lab,
            OraclePath::Transformed => Propagation::Transformed,
        }
    }
}

#[derive(Debug, Clone, Args)]
#[command(allow_negative_numbers = true)]
pub struct RunArgs {
    /// Cavity frequency.
    #[arg(long, default_value_t = 0.4)]
    pub omega_c: f64,
    /// Atomic transition frequency.
    #[arg(long, default_value_t = 0.9)]
    pub omega_eg: f64,
    /// Atom-cavity coupling.
    #[arg(long, default_value_t = 1.0)]
    pub g: f64,
    /// Classical drive on the atom; 0 selects the undriven model.
    #[arg(long, default_value_t = 0.0)]
    pub zeta: f64,
    /// Classical drive on the cavity.
    #[arg(long, default_value_t = 0.0)]
    pub xi: f64,
    /// Drive frequency. Derived from the other parameters; if given it is
    /// only checked for consistency.
    #[arg(long)]
    pub omega_0: Option<f64>,

    /// Thermal mean photon numbers, comma separated.
    #[arg(long, conflicts_with = "fock")]
    pub nbar: Option<String>,
    /// Initial Fock states, comma separated.
    #[arg(long)]
    pub fock: Option<String>,

    /// Detuning grid `start:stop:count`, endpoints included.
    #[arg(long, allow_hyphen_values = true)]
    pub delta: Option<GridSpec>,
    #[arg(long, default_value_t = 20.0)]
    pub t_max: f64,
    /// Number of time samples on [0, t_max].
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
    #[arg(long, conflicts_with = "zeta_range")]
    pub nbar_range: Option<GridSpec>,
    #[arg(long)]
    pub zeta_range: Option<GridSpec>,

    #[arg(long, default_value_t = 1e-12)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 4096)]
    pub max_terms: usize,

    /// Run the numerical oracle alongside the closed forms.
    #[arg(long)]
    pub oracle: bool,
    /// Fixed Fock cutoff for the oracle (default: automatic).
    #[arg(long)]
    pub cutoff: Option<usize>,
    #[arg(long, value_enum)]
    pub oracle_path: Option<OraclePath>,
    /// Allowed oracle deviation (default 1e-5 for traces, 5e-3 for averages).
    #[arg(long)]
    pub tol: Option<f64>,
    /// Averaging window for numeric lineshapes, in units of 1/g.
    #[arg(long, default_value_t = 2000.0)]
    pub window: f64,
    /// Time samples for numeric lineshapes.
    #[arg(long, default_value_t = 200_000)]
    pub avg_samples: usize,

    /// Output file; a list of field values adds a suffix per value.
    /// Standard output if absent.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

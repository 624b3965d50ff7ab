use std::path::PathBuf;

use super::args::{CommandKind, OraclePath, RunArgs};
use super::grid::{check_strict, parse_list, GridSpec};
use super::output::Format;
use super::CliError;
use crate::model::{FieldSpec, ModelParams, ParamInput, TruncationPolicy};
use crate::oracle::{AverageOptions, NumericOptions, Propagation};

pub const TRACE_TOL: f64 = 1e-5;
pub const AVERAGE_TOL: f64 = 5e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AxisKind {
    Nbar,
    Zeta,
}

impl AxisKind {
    pub fn name(self) -> &'static str {
        match self {
            AxisKind::Nbar => "nbar",
            AxisKind::Zeta => "zeta",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub kind: AxisKind,
    pub values: Vec<f64>,
}

/// Validated run description.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub params: ModelParams,
    pub fields: Vec<FieldSpec>,
    pub times: Option<Vec<f64>>,
    pub deltas: Option<Vec<f64>>,
    pub axis: Option<Axis>,
    pub policy: TruncationPolicy,
    pub format: Format,
    pub output: Option<PathBuf>,
    pub oracle: bool,
    pub numeric: NumericOptions,
    pub average: AverageOptions,
    pub tol: Option<f64>,
}

fn config<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Config(e.to_string())
}

impl RunConfig {
    pub fn from_args(command: CommandKind, a: &RunArgs) -> Result<Self, CliError> {
        let mut input = ParamInput::new(a.omega_c, a.omega_eg, a.g, a.zeta, a.xi);
        if let Some(w0) = a.omega_0 {
            input = input.with_omega_0(w0);
        }
        let params = input.validate()?;
        let policy = TruncationPolicy::new(a.epsilon, a.max_terms)?;

        let mut fields = Vec::new();
        if let Some(list) = &a.nbar {
            for n in parse_list::<f64>(list).map_err(config)? {
                fields.push(FieldSpec::thermal(n)?);
            }
        }
        if let Some(list) = &a.fock {
            fields.extend(parse_list::<usize>(list).map_err(config)?.into_iter().map(FieldSpec::fock));
        }

        let deltas = a.delta.map(|g| g.values());
        let axis = match (a.nbar_range, a.zeta_range) {
            (Some(r), None) => Some(Axis {
                kind: AxisKind::Nbar,
                values: range_values(r, "nbar")?,
            }),
            (None, Some(r)) => Some(Axis {
                kind: AxisKind::Zeta,
                values: range_values(r, "zeta")?,
            }),
            (None, None) => None,
            (Some(_), Some(_)) => return Err(config("--nbar-range and --zeta-range are exclusive")),
        };

        let needs_times = matches!(command, CommandKind::Inversion) || (command == CommandKind::Validate && deltas.is_none());
        let times = if needs_times { Some(time_grid(a.t_max, a.samples)?) } else { None };

        match command {
            CommandKind::Inversion | CommandKind::Validate if fields.is_empty() => {
                return Err(config("give the initial field with --nbar or --fock"))
            }
            CommandKind::Lineshape if fields.is_empty() => return Err(config("give the initial field with --nbar or --fock")),
            CommandKind::Lineshape | CommandKind::Surface if deltas.is_none() => {
                return Err(config("--delta start:stop:count is required"))
            }
            CommandKind::Surface => match &axis {
                None => return Err(config("surface needs --nbar-range or --zeta-range")),
                Some(Axis { kind: AxisKind::Nbar, .. }) if !fields.is_empty() => {
                    return Err(config("--nbar-range replaces --nbar/--fock"))
                }
                Some(Axis { kind: AxisKind::Zeta, .. }) if fields.len() != 1 => {
                    return Err(config("--zeta-range needs a single --nbar or --fock value"))
                }
                _ => {}
            },
            _ => {}
        }
        if command != CommandKind::Surface && axis.is_some() {
            return Err(config("--nbar-range/--zeta-range only apply to surface"));
        }
        if command == CommandKind::Surface && a.oracle {
            return Err(config("surface has no oracle column; use lineshape --oracle"));
        }
        if let Some(t) = a.tol {
            if !(t > 0.0 && t.is_finite()) {
                return Err(config(format!("--tol must be positive (got {t})")));
            }
        }
        if !(a.window > 0.0 && a.window.is_finite()) {
            return Err(config(format!("--window must be positive (got {})", a.window)));
        }

        let averaging = deltas.is_some() && matches!(command, CommandKind::Lineshape | CommandKind::Validate);
        let path = a
            .oracle_path
            .unwrap_or(if averaging { OraclePath::Transformed } else { OraclePath::Lab });
        let numeric = NumericOptions {
            cutoff: a.cutoff,
            propagation: Propagation::from(path),
            epsilon: a.epsilon,
            ..NumericOptions::default()
        };
        let average = AverageOptions {
            window_g: a.window,
            samples: a.avg_samples,
            numeric,
        };

        Ok(Self {
            command,
            params,
            fields,
            times,
            deltas,
            axis,
            policy,
            format: a.format,
            output: a.output.clone(),
            oracle: a.oracle || command == CommandKind::Validate,
            numeric,
            average,
            tol: a.tol,
        })
    }

    /// Tolerance for the oracle comparison of this run.
    pub fn tolerance(&self) -> f64 {
        self.tol.unwrap_or(if self.deltas.is_some() { AVERAGE_TOL } else { TRACE_TOL })
    }
}

fn range_values(r: GridSpec, what: &str) -> Result<Vec<f64>, CliError> {
    let v = r.values();
    check_strict(&v, what).map_err(config)?;
    if v[0] < 0.0 {
        return Err(config(format!("{what} range must be non-negative")));
    }
    Ok(v)
}

/// `samples` points on `[0, t_max]`.
pub fn time_grid(t_max: f64, samples: usize) -> Result<Vec<f64>, CliError> {
    if !(t_max >= 0.0 && t_max.is_finite()) {
        return Err(config(format!("--t-max must be finite and non-negative (got {t_max})")));
    }
    let spec = GridSpec {
        start: 0.0,
        stop: t_max,
        count: samples,
    };
    let v = if samples == 0 || (samples == 1) != (t_max == 0.0) {
        return Err(config(format!("time grid 0:{t_max}:{samples} is not strictly increasing")));
    } else {
        spec.values()
    };
    check_strict(&v, "time").map_err(config)?;
    Ok(v)
}

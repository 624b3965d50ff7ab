use std::fmt::Write as _;

use rayon::prelude::*;

use super::args::CommandKind;
use super::config::{AxisKind, RunConfig};
use super::output::{sci, Table};
use super::CliError;
use crate::analytic::{
    inversion_series, inversion_series_undriven, sweep_lineshape, sweep_lineshape_undriven, InversionSeries,
    LineshapeCurve, TruncationReport,
};
use crate::model::{FieldSpec, ModelParams};
use crate::oracle::{inversion_numeric_with_diagnostics, lineshape_numeric, NumericDiagnostics, Propagation};

/// One output table and the file-name suffix used when a run fans out.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub suffix: String,
    pub table: Table,
}

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub artifacts: Vec<Artifact>,
    /// Human-readable oracle summary; empty without an oracle run.
    pub report: String,
    /// `(max deviation, tolerance)` when the oracle disagrees.
    pub breach: Option<(f64, f64)>,
    pub max_deviation: Option<f64>,
}

pub fn execute(config: &RunConfig) -> Result<Outcome, CliError> {
    match config.command {
        CommandKind::Inversion => cmd_inversion(config),
        CommandKind::Lineshape => cmd_lineshape(config),
        CommandKind::Surface => cmd_surface(config),
        CommandKind::Validate => cmd_validate(config),
    }
}

fn base_table(config: &RunConfig, columns: &[&str]) -> Table {
    let p = &config.params;
    let d = p.derived();
    let mut t = Table::new(columns);
    t.meta("generator", format!("drivenjc {}", env!("CARGO_PKG_VERSION")))
        .meta("command", config.command.name())
        .meta("omega_c", num(p.omega_c()))
        .meta("omega_eg", num(p.omega_eg()))
        .meta("g", num(p.g()))
        .meta("zeta", num(p.zeta()))
        .meta("xi", num(p.xi()))
        .meta("omega_0", num(p.omega_0()))
        .meta("alpha", num(d.alpha))
        .meta("delta_c", num(d.delta_c))
        .meta("delta_eg", num(d.delta_eg))
        .meta("model", if p.is_driven() { "driven" } else { "undriven" })
        .meta("epsilon", num(config.policy.epsilon))
        .meta("max_terms", config.policy.max_terms);
    t
}

/// Shortest round-trip text, e.g. `0.7`, `1e-12`.
fn num(v: f64) -> String {
    format!("{v:?}")
}

fn truncation_meta(t: &mut Table, r: &TruncationReport) {
    t.meta("m_max", r.m_max).meta("tail_bound", sci(r.tail_bound));
}

fn propagation_name(p: Propagation) -> &'static str {
    match p {
        Propagation::Lab => "lab",
        Propagation::Transformed => "transformed",
    }
}

fn suffix(config: &RunConfig, field: &FieldSpec) -> String {
    if config.fields.len() > 1 {
        field.label()
    } else {
        String::new()
    }
}

/// Closed-form trace; a thermal field without drive uses the undriven form.
fn analytic_trace(params: &ModelParams, field: FieldSpec, times: &[f64], config: &RunConfig) -> Result<InversionSeries, CliError> {
    Ok(match field {
        FieldSpec::Thermal { n_bar } if !params.is_driven() => inversion_series_undriven(params, n_bar, times, &config.policy)?,
        _ => inversion_series(params, field, times, &config.policy)?,
    })
}

fn analytic_curve(g: f64, alpha: f64, field: FieldSpec, deltas: &[f64], config: &RunConfig) -> Result<LineshapeCurve, CliError> {
    Ok(match field {
        FieldSpec::Thermal { n_bar } if alpha == 0.0 => sweep_lineshape_undriven(g, n_bar, deltas, &config.policy)?,
        _ => sweep_lineshape(field, g, alpha, deltas, &config.policy)?,
    })
}

fn check_inversion(column: &str, values: &[f64]) -> Result<(), CliError> {
    check_bounds(column, values, "-1 <= sigma_z <= 1", |v| (-1.0..=1.0).contains(&v))
}

fn check_lineshape(column: &str, values: &[f64]) -> Result<(), CliError> {
    check_bounds(column, values, "0 <= W < 1", |v| (0.0..1.0).contains(&v))
}

fn check_finite(column: &str, values: &[f64]) -> Result<(), CliError> {
    check_bounds(column, values, "finiteness", f64::is_finite)
}

fn check_bounds(column: &str, values: &[f64], bound: &'static str, ok: impl Fn(f64) -> bool) -> Result<(), CliError> {
    match values.iter().position(|&v| !ok(v)) {
        Some(row) => Err(CliError::Bounds {
            column: column.to_string(),
            row,
            value: values[row],
            bound,
        }),
        None => Ok(()),
    }
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

struct OracleTally {
    max_deviation: f64,
    report: String,
}

impl OracleTally {
    fn new() -> Self {
        Self {
            max_deviation: 0.0,
            report: String::new(),
        }
    }

    fn finish(self, config: &RunConfig, artifacts: Vec<Artifact>) -> Outcome {
        let tol = config.tolerance();
        let mut report = self.report;
        let _ = writeln!(report, "max abs deviation: {} (tolerance {})", sci(self.max_deviation), sci(tol));
        Outcome {
            artifacts,
            report,
            breach: (self.max_deviation >= tol).then_some((self.max_deviation, tol)),
            max_deviation: Some(self.max_deviation),
        }
    }
}

fn diagnostics_meta(t: &mut Table, diag: &NumericDiagnostics, config: &RunConfig) {
    t.meta("oracle_path", propagation_name(config.numeric.propagation))
        .meta("oracle_cutoff", diag.cutoff)
        .meta("oracle_leakage", sci(diag.max_leakage))
        .meta("oracle_norm_drift", sci(diag.max_norm_drift))
        .meta("oracle_dropped_mass", sci(diag.dropped_mass));
}

fn trace_artifacts(config: &RunConfig, with_deviation: bool) -> Result<Outcome, CliError> {
    let times = config.times.as_deref().expect("time grid configured");
    let params = &config.params;
    let mut columns = vec!["t", "g_t", "sigma_z_analytic"];
    if config.oracle {
        columns.push("sigma_z_numeric");
    }
    if with_deviation {
        columns.push("abs_deviation");
    }
    let mut artifacts = Vec::new();
    let mut tally = OracleTally::new();
    for &field in &config.fields {
        let analytic = analytic_trace(params, field, times, config)?;
        check_inversion("sigma_z_analytic", &analytic.values)?;
        let mut table = base_table(config, &columns);
        table.meta("field", field.label());
        truncation_meta(&mut table, &analytic.truncation_report);
        let _ = writeln!(
            tally.report,
            "{}: analytic m_max {} tail bound {}",
            field.label(),
            analytic.truncation_report.m_max,
            sci(analytic.truncation_report.tail_bound)
        );
        if !params.is_driven() {
            if let FieldSpec::Thermal { .. } = field {
                let general = inversion_series(params, field, times, &config.policy)?;
                let dev = max_abs_diff(&general.values, &analytic.values);
                table.meta("analytic_paths_deviation", sci(dev));
                let _ = writeln!(tally.report, "{}: driven vs undriven closed form {}", field.label(), sci(dev));
            }
        }
        let numeric = if config.oracle {
            let (series, diag) = inversion_numeric_with_diagnostics(params, field, times, &config.numeric)?;
            check_finite("sigma_z_numeric", &series.values)?;
            let dev = max_abs_diff(&series.values, &analytic.values);
            tally.max_deviation = tally.max_deviation.max(dev);
            diagnostics_meta(&mut table, &diag, config);
            table.meta("max_abs_deviation", sci(dev));
            let _ = writeln!(
                tally.report,
                "{}: oracle {} cutoff {} leakage {} norm drift {} deviation {}",
                field.label(),
                propagation_name(config.numeric.propagation),
                diag.cutoff,
                sci(diag.max_leakage),
                sci(diag.max_norm_drift),
                sci(dev)
            );
            Some(series.values)
        } else {
            None
        };
        table.rows = times
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let mut row = vec![t, params.g() * t, analytic.values[i]];
                if let Some(n) = &numeric {
                    row.push(n[i]);
                    if with_deviation {
                        row.push((n[i] - analytic.values[i]).abs());
                    }
                }
                row
            })
            .collect();
        artifacts.push(Artifact {
            suffix: suffix(config, &field),
            table,
        });
    }
    Ok(if config.oracle {
        tally.finish(config, artifacts)
    } else {
        Outcome {
            artifacts,
            ..Outcome::default()
        }
    })
}

fn lineshape_artifacts(config: &RunConfig, with_deviation: bool) -> Result<Outcome, CliError> {
    let deltas = config.deltas.as_deref().expect("delta grid configured");
    let g = config.params.g();
    let alpha = config.params.alpha();
    let mut columns = vec!["delta", "W_analytic"];
    if config.oracle {
        columns.push("W_numeric");
    }
    if with_deviation {
        columns.push("abs_deviation");
    }
    let mut artifacts = Vec::new();
    let mut tally = OracleTally::new();
    for &field in &config.fields {
        let curve = analytic_curve(g, alpha, field, deltas, config)?;
        check_lineshape("W_analytic", &curve.values)?;
        let mut table = base_table(config, &columns);
        table.meta("field", field.label());
        truncation_meta(&mut table, &curve.truncation_report);
        let _ = writeln!(
            tally.report,
            "{}: analytic m_max {} tail bound {}",
            field.label(),
            curve.truncation_report.m_max,
            sci(curve.truncation_report.tail_bound)
        );
        if alpha == 0.0 {
            if let FieldSpec::Thermal { .. } = field {
                let general = sweep_lineshape(field, g, alpha, deltas, &config.policy)?;
                let dev = max_abs_diff(&general.values, &curve.values);
                table.meta("analytic_paths_deviation", sci(dev));
                let _ = writeln!(tally.report, "{}: driven vs undriven closed form {}", field.label(), sci(dev));
            }
        }
        let numeric = if config.oracle {
            let values = deltas
                .par_iter()
                .map(|&d| lineshape_numeric(field, g, alpha, d, &config.average))
                .collect::<crate::error::Result<Vec<f64>>>()?;
            check_finite("W_numeric", &values)?;
            let dev = max_abs_diff(&values, &curve.values);
            tally.max_deviation = tally.max_deviation.max(dev);
            table
                .meta("oracle_path", propagation_name(config.average.numeric.propagation))
                .meta("average_window", format!("{}/g", config.average.window_g))
                .meta("average_samples", config.average.samples)
                .meta("max_abs_deviation", sci(dev));
            let _ = writeln!(
                tally.report,
                "{}: numeric time average over {}/g, deviation {}",
                field.label(),
                config.average.window_g,
                sci(dev)
            );
            Some(values)
        } else {
            None
        };
        table.rows = deltas
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut row = vec![d, curve.values[i]];
                if let Some(n) = &numeric {
                    row.push(n[i]);
                    if with_deviation {
                        row.push((n[i] - curve.values[i]).abs());
                    }
                }
                row
            })
            .collect();
        artifacts.push(Artifact {
            suffix: suffix(config, &field),
            table,
        });
    }
    Ok(if config.oracle {
        tally.finish(config, artifacts)
    } else {
        Outcome {
            artifacts,
            ..Outcome::default()
        }
    })
}

pub fn cmd_inversion(config: &RunConfig) -> Result<Outcome, CliError> {
    trace_artifacts(config, false)
}

pub fn cmd_lineshape(config: &RunConfig) -> Result<Outcome, CliError> {
    lineshape_artifacts(config, false)
}

/// Long format `(delta, axis_value, W)`, axis-major. Every row goes through
/// the general displaced-distribution path, `zeta = 0` included.
pub fn cmd_surface(config: &RunConfig) -> Result<Outcome, CliError> {
    let deltas = config.deltas.as_deref().expect("delta grid configured");
    let axis = config.axis.as_ref().expect("secondary axis configured");
    let g = config.params.g();
    let curves = axis
        .values
        .par_iter()
        .map(|&v| {
            let (field, alpha) = match axis.kind {
                AxisKind::Nbar => (FieldSpec::thermal(v)?, config.params.alpha()),
                AxisKind::Zeta => (config.fields[0], v / g),
            };
            sweep_lineshape(field, g, alpha, deltas, &config.policy)
        })
        .collect::<crate::error::Result<Vec<_>>>()?;

    let mut table = base_table(config, &["delta", "axis_value", "W"]);
    table.meta("axis", axis.kind.name());
    if axis.kind == AxisKind::Zeta {
        table.meta("field", config.fields[0].label());
    }
    let worst = curves
        .iter()
        .map(|c| c.truncation_report)
        .fold(TruncationReport::<f64>::default(), |a, r| TruncationReport {
            m_max: a.m_max.max(r.m_max),
            tail_bound: a.tail_bound.max(r.tail_bound),
        });
    truncation_meta(&mut table, &worst);
    for (&v, curve) in axis.values.iter().zip(&curves) {
        check_lineshape("W", &curve.values)?;
        table
            .rows
            .extend(deltas.iter().zip(&curve.values).map(|(&d, &w)| vec![d, v, w]));
    }
    Ok(Outcome {
        artifacts: vec![Artifact {
            suffix: String::new(),
            table,
        }],
        ..Outcome::default()
    })
}

/// Closed form against the oracle: the inversion trace on the time grid,
/// or numeric time averages when a detuning grid is given.
pub fn cmd_validate(config: &RunConfig) -> Result<Outcome, CliError> {
    if config.deltas.is_some() {
        lineshape_artifacts(config, true)
    } else {
        trace_artifacts(config, true)
    }
}

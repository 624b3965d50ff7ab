//! Tabular output: CSV with `#` metadata lines, or a single JSON object.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{Map, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Metadata, column names and numeric rows, in emission order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Table {
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Self {
        Self {
            meta: Vec::new(),
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.meta.push((key.to_string(), value.to_string()));
        self
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| sci(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    /// Numbers are written with the same `%.12e` text as the CSV, which is
    /// valid JSON number syntax.
    pub fn to_json(&self) -> String {
        let meta: Map<String, Value> = self.meta.iter().map(|(k, v)| (k.clone(), Value::String(v.clone()))).collect();
        let mut out = String::from("{\n");
        let _ = writeln!(out, "  \"meta\": {},", serde_json::to_string(&meta).expect("strings serialize"));
        let _ = writeln!(out, "  \"columns\": {},", serde_json::to_string(&self.columns).expect("strings serialize"));
        out.push_str("  \"rows\": [");
        for (i, row) in self.rows.iter().enumerate() {
            let cells: Vec<String> = row.iter().map(|&v| json_number(v)).collect();
            let sep = if i == 0 { "\n" } else { ",\n" };
            let _ = write!(out, "{sep}    [{}]", cells.join(", "));
        }
        out.push_str(if self.rows.is_empty() { "]\n}\n" } else { "\n  ]\n}\n" });
        out
    }

    /// Inverse of [`Table::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, String> {
        let mut table = Table::default();
        let mut lines = text.lines();
        for line in lines.by_ref() {
            if let Some(m) = line.strip_prefix("# ") {
                let (k, v) = m.split_once(": ").ok_or_else(|| format!("bad metadata line `{line}`"))?;
                table.meta.push((k.to_string(), v.to_string()));
            } else {
                table.columns = line.split(',').map(str::to_string).collect();
                break;
            }
        }
        for line in lines {
            let row = line
                .split(',')
                .map(|c| c.parse::<f64>().map_err(|e| format!("bad cell `{c}`: {e}")))
                .collect::<Result<Vec<_>, _>>()?;
            if row.len() != table.columns.len() {
                return Err(format!("row `{line}` has {} cells, expected {}", row.len(), table.columns.len()));
            }
            table.rows.push(row);
        }
        Ok(table)
    }
}

fn json_number(v: f64) -> String {
    if v.is_finite() {
        sci(v)
    } else {
        "null".into()
    }
}

/// `printf("%.12e")`: 12 fractional digits, signed exponent of at least two
/// digits.
pub fn sci(v: f64) -> String {
    if !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{v:.12e}");
    let (mantissa, exp) = s.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    let sign = if exp < 0 { '-' } else { '+' };
    format!("{mantissa}e{sign}{:02}", exp.abs())
}

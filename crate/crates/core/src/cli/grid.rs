//! `start:stop:count` grids and comma-separated value lists.

use std::str::FromStr;

/// Inclusive linear grid. `count = 1` requires `start == stop`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub count: usize,
}

impl GridSpec {
    pub fn values(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let last = (self.count - 1) as f64;
        (0..self.count)
            .map(|i| {
                if i + 1 == self.count {
                    self.stop
                } else {
                    self.start + (self.stop - self.start) * (i as f64 / last)
                }
            })
            .collect()
    }
}

impl FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        if parts.len() != 3 {
            return Err(format!("grid `{s}` is not of the form start:stop:count"));
        }
        let num = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("grid `{s}`: `{p}`: {e}"));
        let (start, stop) = (num(parts[0])?, num(parts[1])?);
        let count: usize = parts[2]
            .trim()
            .parse()
            .map_err(|e| format!("grid `{s}`: count `{}`: {e}", parts[2]))?;
        if !start.is_finite() || !stop.is_finite() {
            return Err(format!("grid `{s}` has non-finite endpoints"));
        }
        match count {
            0 => Err(format!("grid `{s}` is empty")),
            1 if start != stop => Err(format!("grid `{s}`: a single point needs start == stop")),
            1 => Ok(Self { start, stop, count }),
            _ if stop <= start => Err(format!("grid `{s}` is not strictly increasing")),
            _ => Ok(Self { start, stop, count }),
        }
    }
}

/// Parse `a,b,c` into values of `T`.
pub fn parse_list<T: FromStr>(s: &str) -> Result<Vec<T>, String>
where
    T::Err: std::fmt::Display,
{
    let out = s
        .split(',')
        .map(|p| p.trim().parse::<T>().map_err(|e| format!("list `{s}`: `{p}`: {e}")))
        .collect::<Result<Vec<T>, String>>()?;
    if out.is_empty() {
        return Err(format!("list `{s}` is empty"));
    }
    Ok(out)
}

/// Strictly increasing and finite.
pub fn check_strict(values: &[f64], what: &str) -> Result<(), String> {
    if values.is_empty() {
        return Err(format!("{what} grid is empty"));
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(format!("{what} grid has non-finite values"));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(format!("{what} grid is not strictly increasing"));
    }
    Ok(())
}

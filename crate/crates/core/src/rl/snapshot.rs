//! Line-oriented text snapshots of learned policies.
//!
//! Linear weights are a single line of 22 comma-separated numbers after a
//! `# linear_q` header. Q-tables are one `state...,action,value` row per
//! state-action pair after a header line. Floats are written in shortest
//! round-trip form so reading a snapshot back is exact.

use std::fmt::Write as _;

use crate::rl::{Action, LinearQ, Observation, QTable, RlError, BASIS_DIM};

pub const LINEAR_HEADER: &str = "# linear_q";
pub const TABLE_HEADER: &str =
    "hour,weekday,worked_out_today,fatigue,sleep,breakfast,lunch,dinner,work,work_out,action,value";

pub fn write_linear(q: &LinearQ) -> String {
    let body: Vec<String> = q.weights.iter().map(|w| w.to_string()).collect();
    format!("{LINEAR_HEADER}\n{}\n", body.join(","))
}

pub fn read_linear(text: &str) -> Result<LinearQ, RlError> {
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, l)) if l.trim() == LINEAR_HEADER => {}
        _ => return Err(RlError::Snapshot { line: 1, reason: format!("expected `{LINEAR_HEADER}`") }),
    }
    let (n, line) = lines.next().ok_or(RlError::Snapshot { line: 2, reason: "missing weights".into() })?;
    let values: Vec<f64> = line
        .split(',')
        .map(|v| v.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|e| RlError::Snapshot { line: n + 1, reason: e.to_string() })?;
    if values.len() != BASIS_DIM {
        return Err(RlError::Snapshot {
            line: n + 1,
            reason: format!("expected {BASIS_DIM} weights, got {}", values.len()),
        });
    }
    let mut weights = [0.0; BASIS_DIM];
    weights.copy_from_slice(&values);
    Ok(LinearQ { weights })
}

pub fn write_table(table: &QTable) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for (s, values) in table.rows() {
        for action in Action::ALL {
            let _ = write!(out, "{},{},{},{}", s.hour, s.weekday, u8::from(s.worked_out_today), s.fatigue);
            for f in s.last_hour {
                let _ = write!(out, ",{}", u8::from(f));
            }
            let _ = writeln!(out, ",{},{}", action.index(), values[action.index()]);
        }
    }
    out
}

pub fn read_table(text: &str) -> Result<QTable, RlError> {
    let mut table = QTable::new();
    let mut partial: std::collections::BTreeMap<Observation, [Option<f64>; 2]> = Default::default();
    for (n, line) in text.lines().enumerate() {
        let line = line.trim();
        if n == 0 || line.is_empty() {
            continue;
        }
        let err = |reason: String| RlError::Snapshot { line: n + 1, reason };
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != 12 {
            return Err(err(format!("expected 12 columns, got {}", cols.len())));
        }
        let int = |i: usize| cols[i].parse::<u8>().map_err(|e| err(format!("column {}: {e}", i + 1)));
        let bit = |i: usize| match cols[i] {
            "0" => Ok(false),
            "1" => Ok(true),
            other => Err(err(format!("column {}: expected 0/1, got `{other}`", i + 1))),
        };
        let mut last_hour = [false; 6];
        for (k, f) in last_hour.iter_mut().enumerate() {
            *f = bit(4 + k)?;
        }
        let s = Observation { hour: int(0)?, weekday: int(1)?, worked_out_today: bit(2)?, fatigue: int(3)?, last_hour };
        s.validate().map_err(|e| err(e.to_string()))?;
        let action = Action::from_index(int(10)? as usize).ok_or_else(|| err("action must be 0 or 1".into()))?;
        let value: f64 = cols[11].parse().map_err(|e| err(format!("value: {e}")))?;
        partial.entry(s).or_default()[action.index()] = Some(value);
    }
    for (s, v) in partial {
        match v {
            [Some(a), Some(b)] => table.set(s, [a, b]),
            _ => {
                return Err(RlError::Snapshot { line: 0, reason: format!("state {s:?} lacks a value for one action") })
            }
        }
    }
    Ok(table)
}

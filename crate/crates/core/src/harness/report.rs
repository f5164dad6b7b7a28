//! Plot-ready long-format series derived from the CSV exports alone.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::harness::protocol::cumulative_average;
use crate::harness::HarnessError;
use crate::rl::{Action, Experience, Observation};
use crate::sim::ProfileKind;

/// Files [`write_report`] produces.
pub const REPORT_FILES: [&str; 5] = [
    "fig1_average_reward.csv",
    "fig2_cumulative_lspi.csv",
    "fig3_cumulative_qlearning.csv",
    "per_profile.csv",
    "cluster_composition.csv",
];

#[derive(Debug, Deserialize)]
struct SummaryRow {
    setup: String,
    learner: String,
    strategy: String,
    avg_daily_reward: f64,
    workaholic: Option<f64>,
    arnold: Option<f64>,
    retiree: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct MetricsRow {
    day: u32,
    setup: String,
    avg_daily_reward: f64,
    cumulative_avg: f64,
    workaholic: Option<f64>,
    arnold: Option<f64>,
    retiree: Option<f64>,
}

#[derive(Debug, Deserialize)]
struct CompositionRow {
    setup: String,
    cluster: usize,
    workaholic: usize,
    arnold: usize,
    retiree: usize,
}

fn read_rows<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<Vec<T>, HarnessError> {
    let err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut r = csv::Reader::from_path(path).map_err(err)?;
    r.deserialize().collect::<Result<Vec<T>, _>>().map_err(err)
}

fn write_rows(path: &Path, header: &[&str], rows: &[Vec<String>]) -> Result<(), HarnessError> {
    let err = |source| HarnessError::Csv { path: path.to_path_buf(), source };
    let mut w = csv::Writer::from_path(path).map_err(err)?;
    w.write_record(header).map_err(err)?;
    for row in rows {
        w.write_record(row).map_err(err)?;
    }
    w.flush().map_err(|source| HarnessError::Io { path: path.to_path_buf(), source })
}

/// Input files the report needs from `results`, missing ones first.
fn check_inputs(results: &Path) -> Result<Vec<SummaryRow>, HarnessError> {
    let mut missing: Vec<String> = ["summary.csv", "cluster_composition.csv"]
        .into_iter()
        .filter(|f| !results.join(f).is_file())
        .map(String::from)
        .collect();
    if !missing.is_empty() {
        missing.push("runs/<setup>/metrics.csv".into());
        return Err(HarnessError::MissingInputs { dir: results.to_path_buf(), missing });
    }
    let summary: Vec<SummaryRow> = read_rows(&results.join("summary.csv"))?;
    let missing: Vec<String> = summary
        .iter()
        .map(|s| format!("runs/{}/metrics.csv", s.setup))
        .filter(|f| !results.join(f).is_file())
        .collect();
    if !missing.is_empty() {
        return Err(HarnessError::MissingInputs { dir: results.to_path_buf(), missing });
    }
    if summary.is_empty() {
        return Err(HarnessError::Invalid(format!("{}: summary.csv lists no runs", results.display())));
    }
    Ok(summary)
}

fn profile_values(w: Option<f64>, a: Option<f64>, r: Option<f64>) -> [(ProfileKind, Option<f64>); 3] {
    [(ProfileKind::Workaholic, w), (ProfileKind::Arnold, a), (ProfileKind::Retiree, r)]
}

/// Reads a result directory and writes [`REPORT_FILES`] into `out`.
/// Returns the paths written.
pub fn write_report(results: &Path, out: &Path) -> Result<Vec<PathBuf>, HarnessError> {
    let summary = check_inputs(results)?;
    std::fs::create_dir_all(out).map_err(|source| HarnessError::Io { path: out.to_path_buf(), source })?;

    let mut fig1 = Vec::new();
    for s in &summary {
        let base = |metric: &str, v: f64| {
            vec![s.setup.clone(), s.learner.clone(), s.strategy.clone(), metric.to_string(), v.to_string()]
        };
        fig1.push(base("avg_daily_reward", s.avg_daily_reward));
        for (k, v) in profile_values(s.workaholic, s.arnold, s.retiree) {
            if let Some(v) = v {
                fig1.push(base(&format!("avg_daily_reward_{k}"), v));
            }
        }
    }

    let mut cumulative: BTreeMap<String, Vec<Vec<String>>> = BTreeMap::new();
    let mut per_profile = Vec::new();
    for s in &summary {
        let metrics: Vec<MetricsRow> = read_rows(&results.join("runs").join(&s.setup).join("metrics.csv"))?;
        let rows = cumulative.entry(s.learner.clone()).or_default();
        for m in &metrics {
            rows.push(vec![
                m.day.to_string(),
                m.setup.clone(),
                "avg_daily_reward".into(),
                m.avg_daily_reward.to_string(),
            ]);
            rows.push(vec![m.day.to_string(), m.setup.clone(), "cumulative_avg".into(), m.cumulative_avg.to_string()]);
        }
        for k in ProfileKind::ALL {
            let daily: Vec<(u32, f64)> = metrics
                .iter()
                .filter_map(|m| profile_values(m.workaholic, m.arnold, m.retiree)[k.index()].1.map(|v| (m.day, v)))
                .collect();
            let values: Vec<f64> = daily.iter().map(|d| d.1).collect();
            for ((day, v), c) in daily.iter().zip(cumulative_average(&values)) {
                let key = |metric: &str, x: f64| {
                    vec![day.to_string(), s.setup.clone(), k.to_string(), metric.to_string(), x.to_string()]
                };
                per_profile.push(key("avg_daily_reward", *v));
                per_profile.push(key("cumulative_avg", c));
            }
        }
    }

    let composition: Vec<CompositionRow> = read_rows(&results.join("cluster_composition.csv"))?;
    let mut comp_rows = Vec::new();
    for c in &composition {
        for (k, n) in ProfileKind::ALL.into_iter().zip([c.workaholic, c.arnold, c.retiree]) {
            comp_rows.push(vec![c.setup.clone(), c.cluster.to_string(), k.to_string(), n.to_string()]);
        }
    }

    let series = ["day", "setup", "metric", "value"];
    let files: [(&str, &[&str], Vec<Vec<String>>); 5] = [
        (REPORT_FILES[0], &["setup", "learner", "strategy", "metric", "value"], fig1),
        (REPORT_FILES[1], &series, cumulative.remove("lspi").unwrap_or_default()),
        (REPORT_FILES[2], &series, cumulative.remove("qlearning").unwrap_or_default()),
        (REPORT_FILES[3], &["day", "setup", "profile", "metric", "value"], per_profile),
        (REPORT_FILES[4], &["setup", "cluster", "profile", "count"], comp_rows),
    ];
    let mut written = Vec::new();
    for (name, header, rows) in files {
        let path = out.join(name);
        write_rows(&path, header, &rows)?;
        written.push(path);
    }
    Ok(written)
}

#[derive(Debug, Deserialize)]
struct TraceRow {
    user_id: usize,
    profile: String,
    phase: String,
    hour: u8,
    weekday: u8,
    worked_out_today: u8,
    fatigue: u8,
    sleep: u8,
    breakfast: u8,
    lunch: u8,
    dinner: u8,
    work: u8,
    work_out: u8,
    action: usize,
    reward: f64,
}

/// Reads the rows of one phase (`warmup` or `learning`) of a trace export
/// back into per-user experience sequences, users in id order. The `next`
/// observation of each experience is the following row's state (the last
/// one repeats its own state).
pub fn read_trace_export(path: &Path, phase: &str) -> Result<(Vec<ProfileKind>, Vec<Vec<Experience>>), HarnessError> {
    let rows: Vec<TraceRow> = read_rows(path)?;
    let bad = |m: String| HarnessError::Invalid(format!("{}: {m}", path.display()));
    let mut users: BTreeMap<usize, (ProfileKind, Vec<(Observation, Action, f64)>)> = BTreeMap::new();
    for (i, r) in rows.iter().enumerate().filter(|(_, r)| r.phase == phase) {
        let kind: ProfileKind = r.profile.parse().map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        let flag = |v: u8| match v {
            0 => Ok(false),
            1 => Ok(true),
            _ => Err(bad(format!("row {}: flag {v} is not 0/1", i + 2))),
        };
        let s = Observation {
            hour: r.hour,
            weekday: r.weekday,
            worked_out_today: flag(r.worked_out_today)?,
            fatigue: r.fatigue,
            last_hour: [
                flag(r.sleep)?,
                flag(r.breakfast)?,
                flag(r.lunch)?,
                flag(r.dinner)?,
                flag(r.work)?,
                flag(r.work_out)?,
            ],
        };
        s.validate().map_err(|e| bad(format!("row {}: {e}", i + 2)))?;
        let action = Action::from_index(r.action).ok_or_else(|| bad(format!("row {}: bad action", i + 2)))?;
        let entry = users.entry(r.user_id).or_insert_with(|| (kind, Vec::new()));
        if entry.0 != kind {
            return Err(bad(format!("row {}: user {} changes profile", i + 2, r.user_id)));
        }
        entry.1.push((s, action, r.reward));
    }
    if users.is_empty() {
        return Err(bad(format!("no `{phase}` rows")));
    }
    let mut profiles = Vec::with_capacity(users.len());
    let mut traces = Vec::with_capacity(users.len());
    for (_, (kind, steps)) in users {
        profiles.push(kind);
        let trace = steps
            .iter()
            .enumerate()
            .map(|(i, &(s, action, reward))| Experience {
                s,
                action,
                reward,
                next: steps.get(i + 1).map_or(s, |n| n.0),
            })
            .collect();
        traces.push(trace);
    }
    Ok((profiles, traces))
}

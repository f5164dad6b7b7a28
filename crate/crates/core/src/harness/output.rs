//! CSV exports of a protocol run.
//!
//! Layout under the output directory:
//!
//! - `config.toml`: the effective configuration
//! - `summary.csv`: one row per run
//! - `stats.csv`: pairwise Wilcoxon tests on daily average rewards
//! - `cluster_composition.csv`, `co_clustering.csv`: cluster analysis
//! - `runs/<run>/traces.csv`, `metrics.csv`, `clusters.csv`
//!
//! A warm-up-only run writes `config.toml` and `warmup/traces.csv`.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use crate::cluster::Partition;
use crate::config::ExperimentConfig;
use crate::harness::protocol::{ProtocolOutcome, RunOutcome};
use crate::harness::warmup::Warmup;
use crate::harness::HarnessError;
use crate::rl::Experience;
use crate::sim::ProfileKind;

/// Top-level files written by [`write_protocol`].
pub const CSV_FILES: [&str; 4] = ["summary.csv", "stats.csv", "cluster_composition.csv", "co_clustering.csv"];

pub const TRACE_HEADER: [&str; 17] = [
    "setup",
    "user_id",
    "profile",
    "phase",
    "day",
    "hour",
    "weekday",
    "worked_out_today",
    "fatigue",
    "sleep",
    "breakfast",
    "lunch",
    "dinner",
    "work",
    "work_out",
    "action",
    "reward",
];

const METRICS_HEADER: [&str; 7] =
    ["day", "setup", "avg_daily_reward", "cumulative_avg", "workaholic", "arnold", "retiree"];

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> HarnessError + '_ {
    move |source| HarnessError::Csv { path: path.to_path_buf(), source }
}

/// Writes rows to `path` in one go.
fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_path(path).map_err(csv_err(path))?;
    w.write_record(header).map_err(csv_err(path))?;
    for row in rows {
        w.write_record(&row).map_err(csv_err(path))?;
    }
    w.flush().map_err(io_err(path))
}

fn opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn trace_rows<'a>(
    setup: &'a str,
    profiles: &'a [ProfileKind],
    phase: &'a str,
    first_day: u32,
    traces: &'a [Vec<Experience>],
) -> impl Iterator<Item = Vec<String>> + 'a {
    traces.iter().enumerate().flat_map(move |(u, trace)| {
        trace.iter().enumerate().map(move |(i, e)| {
            let s = &e.s;
            let mut row = vec![
                setup.to_string(),
                u.to_string(),
                profiles[u].to_string(),
                phase.to_string(),
                (first_day + (i / 24) as u32).to_string(),
                s.hour.to_string(),
                s.weekday.to_string(),
                u8::from(s.worked_out_today).to_string(),
                s.fatigue.to_string(),
            ];
            row.extend(s.last_hour.iter().map(|&f| u8::from(f).to_string()));
            row.push(e.action.index().to_string());
            row.push(e.reward.to_string());
            row
        })
    })
}

/// Writes `runs/<run>/{traces,metrics,clusters}.csv` for one run.
pub fn write_run(dir: &Path, warmup: &Warmup, warmup_days: u32, run: &RunOutcome) -> Result<PathBuf, HarnessError> {
    let setup = run.id.to_string();
    let run_dir = dir.join("runs").join(&setup);
    fs::create_dir_all(&run_dir).map_err(io_err(&run_dir))?;
    let profiles = &warmup.profiles;

    let rows = trace_rows(&setup, profiles, "warmup", 0, &warmup.traces).chain(trace_rows(
        &setup,
        profiles,
        "learning",
        warmup_days,
        &run.traces,
    ));
    write_csv(&run_dir.join("traces.csv"), &TRACE_HEADER, rows)?;

    let rows = run.records.iter().map(|r| {
        let mut row =
            vec![r.day.to_string(), setup.clone(), r.avg_daily_reward.to_string(), r.cumulative_avg.to_string()];
        row.extend(r.per_profile.iter().map(|p| opt(*p)));
        row
    });
    write_csv(&run_dir.join("metrics.csv"), &METRICS_HEADER, rows)?;

    write_clusters(&run_dir.join("clusters.csv"), profiles, &run.partition)?;
    Ok(run_dir)
}

/// Writes the group of every user; the silhouette column is empty unless
/// the partition came from clustering.
pub fn write_clusters(path: &Path, profiles: &[ProfileKind], partition: &Partition) -> Result<(), HarnessError> {
    let silhouette = partition.assignment.as_ref().map(|a| a.silhouette);
    let rows = partition
        .group_of
        .iter()
        .enumerate()
        .map(|(u, g)| vec![u.to_string(), profiles[u].to_string(), g.to_string(), opt(silhouette)]);
    write_csv(path, &["user_id", "true_profile", "cluster_label", "silhouette_overall"], rows)
}

/// Writes `warmup/traces.csv` and `config.toml` after a warm-up-only run.
pub fn write_warmup(dir: &Path, config: &ExperimentConfig, warmup: &Warmup) -> Result<PathBuf, HarnessError> {
    write_config(dir, config)?;
    let sub = dir.join("warmup");
    fs::create_dir_all(&sub).map_err(io_err(&sub))?;
    let path = sub.join("traces.csv");
    write_csv(&path, &TRACE_HEADER, trace_rows("warmup", &warmup.profiles, "warmup", 0, &warmup.traces))?;
    Ok(path)
}

fn write_config(dir: &Path, config: &ExperimentConfig) -> Result<(), HarnessError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let path = dir.join("config.toml");
    fs::File::create(&path).and_then(|mut f| f.write_all(config.to_toml().as_bytes())).map_err(io_err(&path))
}

/// Writes the full result bundle of a protocol run into `dir`.
pub fn write_protocol(dir: &Path, outcome: &ProtocolOutcome) -> Result<(), HarnessError> {
    write_config(dir, &outcome.config)?;
    for run in &outcome.runs {
        write_run(dir, &outcome.warmup, outcome.config.warmup_days, run)?;
    }

    let rows = outcome.runs.iter().map(|r| {
        let mut row = vec![
            r.id.to_string(),
            r.id.learner.to_string(),
            r.id.strategy.to_string(),
            r.partition.len().to_string(),
            r.average_daily_reward().to_string(),
        ];
        row.extend(ProfileKind::ALL.map(|k| opt(r.profile_average(k))));
        row.extend(
            [r.tally.sends, r.tally.acceptances, r.tally.rejections, r.tally.completions, r.unconverged_fits]
                .map(|x| x.to_string()),
        );
        row
    });
    write_csv(
        &dir.join("summary.csv"),
        &[
            "setup",
            "learner",
            "strategy",
            "groups",
            "avg_daily_reward",
            "workaholic",
            "arnold",
            "retiree",
            "sends",
            "acceptances",
            "rejections",
            "completions",
            "unconverged_fits",
        ],
        rows,
    )?;

    let rows = outcome.tests.iter().map(|t| {
        vec![
            t.a.to_string(),
            t.b.to_string(),
            t.mean_a.to_string(),
            t.mean_b.to_string(),
            t.result.n.to_string(),
            t.result.w_plus.to_string(),
            t.result.w_minus.to_string(),
            t.result.z.to_string(),
            t.result.p_value.to_string(),
        ]
    });
    write_csv(
        &dir.join("stats.csv"),
        &["setup_a", "setup_b", "mean_a", "mean_b", "n", "w_plus", "w_minus", "z", "p_value"],
        rows,
    )?;

    let cluster_runs: Vec<&RunOutcome> = outcome.runs.iter().filter(|r| r.purity.is_some()).collect();
    let rows = cluster_runs.iter().flat_map(|r| {
        let report = r.purity.as_ref().expect("filtered");
        report.clusters.iter().map(move |c| {
            let mut row = vec![r.id.to_string(), c.label.to_string(), c.size.to_string(), c.majority.to_string()];
            row.push(c.purity.to_string());
            row.extend(c.composition.iter().map(|n| n.to_string()));
            row
        })
    });
    write_csv(
        &dir.join("cluster_composition.csv"),
        &["setup", "cluster", "size", "majority", "purity", "workaholic", "arnold", "retiree"],
        rows,
    )?;

    let rows = cluster_runs.iter().flat_map(|r| {
        let report = r.purity.as_ref().expect("filtered");
        ProfileKind::ALL.into_iter().map(move |k| {
            vec![
                r.id.to_string(),
                k.to_string(),
                opt(report.co_clustering[k.index()]),
                report.random_baseline.to_string(),
            ]
        })
    });
    write_csv(&dir.join("co_clustering.csv"), &["setup", "profile", "co_clustering_rate", "random_baseline"], rows)?;
    Ok(())
}

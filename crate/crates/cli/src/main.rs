//! `cbrl`: runs the intervention experiments and exports their results.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand};

use cbrl_core::config::{ExperimentConfig, RunId};
use cbrl_core::harness::report::{read_trace_export, write_report};
use cbrl_core::harness::{
    cluster_traces, run_protocol, run_warmup, spawn_users, write_clusters, write_protocol, write_warmup, HarnessError,
};

#[derive(Parser, Debug)]
#[command(name = "cbrl", version, about = "Simulated workout-intervention experiments with per-group learners")]
struct Cli {
    /// More progress output on stderr.
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Warm-up plus the learning runs; writes every CSV export.
    Run {
        #[command(flatten)]
        common: Common,
        /// Only this run, as `<learner>-<strategy>`. Repeatable.
        #[arg(long, value_name = "RUN")]
        only: Vec<RunId>,
    },
    /// Only the warm-up week; writes `warmup/traces.csv`.
    WarmupOnly {
        #[command(flatten)]
        common: Common,
    },
    /// Clusters the users of a trace export on their warm-up week.
    Cluster {
        #[command(flatten)]
        common: Common,
        /// A `traces.csv` written by `run` or `warmup-only`.
        #[arg(long)]
        traces: PathBuf,
    },
    /// Plot-ready series from a result directory written by `run`.
    Report {
        /// Result directory of a previous `run`.
        results: PathBuf,
        /// Where to write the series [default: <RESULTS>/report].
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write into a non-empty output directory.
        #[arg(long)]
        force: bool,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// TOML configuration; omitted fields take their defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, env = "CBRL_OUT", default_value = "results")]
    out: PathBuf,
    /// Write into a non-empty output directory.
    #[arg(long)]
    force: bool,
}

/// Errors the user can fix by changing the invocation.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

impl Common {
    fn load(&self) -> anyhow::Result<ExperimentConfig> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path).map_err(|e| usage(e.to_string()))?,
            None => ExperimentConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        Ok(config)
    }
}

/// Refuses to write into a non-empty directory unless forced.
fn check_out(out: &Path, force: bool) -> anyhow::Result<()> {
    if out.exists() {
        if !out.is_dir() {
            return Err(usage(format!("{} exists and is not a directory", out.display())));
        }
        let non_empty = std::fs::read_dir(out).with_context(|| format!("reading {}", out.display()))?.next().is_some();
        if non_empty && !force {
            return Err(usage(format!("{} is not empty; pass --force to write into it", out.display())));
        }
    }
    Ok(())
}

struct Log {
    level: u8,
    start: Instant,
}

impl Log {
    fn info(&self, msg: impl AsRef<str>) {
        if self.level > 0 {
            eprintln!("[{:>7.1}s] {}", self.start.elapsed().as_secs_f64(), msg.as_ref());
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let log = Log { level: cli.verbose, start: Instant::now() };
    match cli.command {
        Command::Run { common, only } => {
            let mut config = common.load()?;
            if !only.is_empty() {
                config.runs.clear();
                for id in only {
                    if !config.runs.contains(&id) {
                        config.runs.push(id);
                    }
                }
            }
            config.validate().map_err(|e| usage(e.to_string()))?;
            check_out(&common.out, common.force)?;
            log.info(format!(
                "seed {}: {} users, {} + {} days, {} run(s)",
                config.seed,
                config.n_users(),
                config.warmup_days,
                config.learning_days,
                config.runs.len()
            ));
            let outcome = run_protocol(&config)?;
            log.info("runs finished, writing exports");
            write_protocol(&common.out, &outcome)?;
            for r in &outcome.runs {
                println!(
                    "{:<20} groups {:>3}  avg daily reward {:>8.4}",
                    r.id.to_string(),
                    r.partition.len(),
                    r.average_daily_reward()
                );
            }
            println!("results in {}", common.out.display());
            if !outcome.failures.is_empty() {
                for f in &outcome.failures {
                    eprintln!("error: {f}");
                }
                bail!("{} run(s) failed", outcome.failures.len());
            }
        }
        Command::WarmupOnly { common } => {
            let config = common.load()?;
            check_out(&common.out, common.force)?;
            let warmup = run_warmup(spawn_users(&config), config.warmup_days, config.warmup_hours, config.seed)?;
            let path = write_warmup(&common.out, &config, &warmup)?;
            let t = &warmup.tally;
            println!(
                "{} users, {} days: {} sends, {} accepted, {} workouts completed",
                warmup.users.len(),
                config.warmup_days,
                t.sends,
                t.acceptances,
                t.completions
            );
            println!("traces in {}", path.display());
        }
        Command::Cluster { common, traces } => {
            let config = common.load()?;
            if !traces.is_file() {
                return Err(usage(format!("{} not found", traces.display())));
            }
            check_out(&common.out, common.force)?;
            let (profiles, traces) = read_trace_export(&traces, "warmup")?;
            log.info(format!("clustering {} users", traces.len()));
            let partition = cluster_traces(&traces, &config.clustering, config.seed)?;
            std::fs::create_dir_all(&common.out).with_context(|| format!("creating {}", common.out.display()))?;
            let path = common.out.join("clusters.csv");
            write_clusters(&path, &profiles, &partition)?;
            let silhouette = partition.assignment.as_ref().map_or(f64::NAN, |a| a.silhouette);
            println!("k = {}, silhouette {silhouette:.4}", partition.len());
            for (g, members) in partition.groups.iter().enumerate() {
                let mut counts = [0usize; 3];
                for &u in members {
                    counts[profiles[u].index()] += 1;
                }
                println!(
                    "cluster {g}: {} users (workaholic {}, arnold {}, retiree {})",
                    members.len(),
                    counts[0],
                    counts[1],
                    counts[2]
                );
            }
            println!("assignment in {}", path.display());
        }
        Command::Report { results, out, force } => {
            let out = out.unwrap_or_else(|| results.join("report"));
            check_out(&out, force)?;
            let written = write_report(&results, &out).map_err(|e| match e {
                HarnessError::MissingInputs { .. } => usage(e.to_string()),
                e => e.into(),
            })?;
            for p in written {
                println!("{}", p.display());
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(1)
            } else {
                ExitCode::from(2)
            }
        }
    }
}

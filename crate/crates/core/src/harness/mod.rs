//! The two-phase protocol: a random-policy warm-up, then a learning phase
//! per learner/strategy run, with metrics, exports and pairwise tests.

mod learner;
mod output;
mod protocol;
pub mod report;
mod warmup;

pub use learner::{chronological, GroupLearner};
pub use output::{write_clusters, write_protocol, write_run, write_warmup, CSV_FILES, TRACE_HEADER};
pub use protocol::{
    average_daily_reward, cluster_traces, cumulative_average, run_learning, run_protocol, EventTally, MetricsRecord,
    PairwiseTest, ProtocolOutcome, RunOutcome,
};
pub use warmup::{run_warmup, spawn_users, Warmup};

use std::path::PathBuf;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::cluster::ClusterError;
use crate::config::{ConfigError, RunId};
use crate::rl::RlError;
use crate::sim::SimError;
use crate::stats::StatsError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Sim(#[from] SimError),
    #[error(transparent)]
    Rl(#[from] RlError),
    #[error(transparent)]
    Cluster(#[from] ClusterError),
    #[error(transparent)]
    Stats(#[from] StatsError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("run {run} failed: {source}")]
    Run { run: RunId, source: Box<HarnessError> },
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Csv { path: PathBuf, source: csv::Error },
    #[error("missing inputs in {}: {}", dir.display(), missing.join(", "))]
    MissingInputs { dir: PathBuf, missing: Vec<String> },
    #[error("{0}")]
    Invalid(String),
}

/// Independent random streams derived from the experiment seed.
#[derive(Clone, Copy, Debug)]
pub(crate) enum Stream {
    /// A user's own generator (plans, durations, acceptance draws).
    User = 1,
    /// Warm-up intervention hours, per user.
    Warmup = 2,
    /// Exploration draws, per user.
    Explore = 3,
    /// Q-table initialization, per learning group.
    LearnerInit = 4,
    Clustering = 5,
}

pub(crate) fn stream(seed: u64, kind: Stream, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((kind as u64) << 48) | index);
    rng
}

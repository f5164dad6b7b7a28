//! Learners: state featurization, tabular Q-learning with backward replay,
//! and least-squares policy iteration.

mod features;
mod lspi;
mod policy;
mod qlearning;
pub mod snapshot;

pub use features::{featurize, FeatureVector, Observation, FEATURE_DIM};
pub use lspi::{basis, batch_states, lspi, lstdq, LinearQ, LspiOutcome, TransitionBatch, BASIS_DIM, BLOCK_DIM};
pub use policy::{epsilon_greedy, greedy, Action};
pub use qlearning::{q_init, q_update, replay_backward, QTable, ReplayBuffer, REPLAY_CAPACITY};

use thiserror::Error;

/// One hourly transition `<s, i, r, s'>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Experience {
    pub s: Observation,
    pub action: Action,
    pub reward: f64,
    pub next: Observation,
}

#[derive(Debug, Error, PartialEq)]
pub enum RlError {
    #[error("observation out of range: {0:?}")]
    InvalidObservation(Observation),
    #[error("empty experience batch")]
    EmptyBatch,
    #[error("linear solve failed: {0}")]
    SolverFailed(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("malformed snapshot line {line}: {reason}")]
    Snapshot { line: usize, reason: String },
}

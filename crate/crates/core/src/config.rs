//! Experiment configuration. Every field has a default, so an empty file is a
//! complete configuration; the built-in profiles are the reference ones.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cluster::{ClusterSettings, Strategy, TRACE_STEPS};
use crate::rl::REPLAY_CAPACITY;
use crate::sim::{ProfileKind, UserProfile};

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("invalid config: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Learner {
    #[serde(rename = "qlearning")]
    QLearning,
    Lspi,
}

impl Learner {
    pub const ALL: [Learner; 2] = [Learner::QLearning, Learner::Lspi];

    pub fn name(self) -> &'static str {
        match self {
            Learner::QLearning => "qlearning",
            Learner::Lspi => "lspi",
        }
    }
}

impl fmt::Display for Learner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Learner {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Learner::ALL.into_iter().find(|l| l.name() == s).ok_or_else(|| format!("unknown learner `{s}`"))
    }
}

/// One learner/strategy combination, written `<learner>-<strategy>`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct RunId {
    pub learner: Learner,
    pub strategy: Strategy,
}

impl RunId {
    pub fn new(learner: Learner, strategy: Strategy) -> Self {
        RunId { learner, strategy }
    }

    /// All eight runs, Q-learning first, strategies in their canonical order.
    pub fn all() -> Vec<RunId> {
        Learner::ALL.into_iter().flat_map(|l| Strategy::ALL.map(|s| RunId::new(l, s))).collect()
    }
}

impl fmt::Display for RunId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.learner, self.strategy)
    }
}

impl FromStr for RunId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (l, st) = s.split_once('-').ok_or_else(|| format!("expected `<learner>-<strategy>`, got `{s}`"))?;
        Ok(RunId::new(l.parse()?, st.parse()?))
    }
}

impl TryFrom<String> for RunId {
    type Error = String;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<RunId> for String {
    fn from(r: RunId) -> String {
        r.to_string()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QLearningConfig {
    pub gamma: f64,
    pub epsilon: f64,
    /// Learning rate on the first learning day.
    pub alpha0: f64,
    /// Multiplicative learning-rate decay per day.
    pub alpha_decay: f64,
    pub replay_capacity: usize,
}

impl Default for QLearningConfig {
    fn default() -> Self {
        QLearningConfig { gamma: 0.95, epsilon: 0.05, alpha0: 0.2, alpha_decay: 0.99, replay_capacity: REPLAY_CAPACITY }
    }
}

impl QLearningConfig {
    pub fn alpha(&self, day: u32) -> f64 {
        self.alpha0 * self.alpha_decay.powi(day as i32)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LspiConfig {
    pub gamma: f64,
    pub epsilon: f64,
    pub max_iter: usize,
    /// Convergence threshold on the weight change.
    pub tolerance: f64,
}

impl Default for LspiConfig {
    fn default() -> Self {
        LspiConfig { gamma: 0.95, epsilon: 0.01, max_iter: 20, tolerance: 1e-5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub seed: u64,
    /// Users spawned per profile.
    pub n_per_profile: usize,
    pub warmup_days: u32,
    pub learning_days: u32,
    /// First and last hour (inclusive) of the warm-up intervention draw.
    pub warmup_hours: [u8; 2],
    /// Runs to execute.
    pub runs: Vec<RunId>,
    pub qlearning: QLearningConfig,
    pub lspi: LspiConfig,
    pub clustering: ClusterSettings,
    pub profiles: Vec<UserProfile>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            seed: 42,
            n_per_profile: 33,
            warmup_days: 7,
            learning_days: 100,
            warmup_hours: [9, 20],
            runs: RunId::all(),
            qlearning: QLearningConfig::default(),
            lspi: LspiConfig::default(),
            clustering: ClusterSettings::default(),
            profiles: UserProfile::builtins(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        let config: ExperimentConfig = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|source| ConfigError::Read { path: path.display().to_string(), source })?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn n_users(&self) -> usize {
        self.n_per_profile * self.profiles.len()
    }

    /// Profile of every user; users are numbered profile by profile.
    pub fn user_profiles(&self) -> Vec<ProfileKind> {
        self.profiles.iter().flat_map(|p| std::iter::repeat_n(p.kind, self.n_per_profile)).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let bad = |m: String| Err(ConfigError::Invalid(m));
        if self.n_per_profile == 0 {
            return bad("n_per_profile must be positive".into());
        }
        if self.warmup_days == 0 || self.learning_days == 0 {
            return bad("warmup_days and learning_days must be positive".into());
        }
        let [first, last] = self.warmup_hours;
        if first > last || last > 23 {
            return bad(format!("warmup_hours {first}..={last} must be an hour range within 0..=23"));
        }
        let q = &self.qlearning;
        if !(0.0..1.0).contains(&q.gamma) || !(0.0..=1.0).contains(&q.epsilon) {
            return bad("qlearning: gamma must lie in [0, 1) and epsilon in [0, 1]".into());
        }
        if !(q.alpha0 > 0.0 && q.alpha0 <= 1.0) || !(q.alpha_decay > 0.0 && q.alpha_decay <= 1.0) {
            return bad("qlearning: alpha0 and alpha_decay must lie in (0, 1]".into());
        }
        if q.replay_capacity == 0 {
            return bad("qlearning: replay_capacity must be positive".into());
        }
        let l = &self.lspi;
        if !(0.0..1.0).contains(&l.gamma) || !(0.0..=1.0).contains(&l.epsilon) {
            return bad("lspi: gamma must lie in [0, 1) and epsilon in [0, 1]".into());
        }
        if l.max_iter == 0 || !(l.tolerance > 0.0) {
            return bad("lspi: max_iter and tolerance must be positive".into());
        }
        let c = &self.clustering;
        if c.k_min < 2 || c.k_min > c.k_max || c.restarts == 0 {
            return bad("clustering: need 2 <= k_min <= k_max and restarts >= 1".into());
        }
        if self.profiles.is_empty() {
            return bad("at least one profile is required".into());
        }
        for (i, p) in self.profiles.iter().enumerate() {
            p.validate().map_err(|e| ConfigError::Invalid(e.to_string()))?;
            if self.profiles[..i].iter().any(|q| q.kind == p.kind) {
                return bad(format!("profile {} listed twice", p.kind));
            }
        }
        if self.runs.is_empty() {
            return bad("no runs selected".into());
        }
        if self.runs.iter().any(|r| r.strategy == Strategy::Cluster) {
            if self.n_users() <= c.k_max {
                return bad(format!("cluster runs need more than k_max = {} users", c.k_max));
            }
            if (self.warmup_days as usize) * 24 < TRACE_STEPS {
                return bad(format!("cluster runs need a warm-up of at least {} days", TRACE_STEPS / 24));
            }
        }
        Ok(())
    }
}

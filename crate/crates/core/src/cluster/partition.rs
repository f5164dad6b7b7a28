use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{select_k_matrix, ClusterAssignment, ClusterError, DistanceMatrix, TraceVector};
use crate::sim::ProfileKind;

/// How users are grouped for learning: one policy per group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Strategy {
    /// Everyone in one group.
    Pooled,
    /// One group per user.
    Separate,
    /// Groups found by k-medoids over warm-up traces.
    Cluster,
    /// One group per true profile.
    Grouped,
}

impl Strategy {
    pub const ALL: [Strategy; 4] = [Strategy::Pooled, Strategy::Separate, Strategy::Cluster, Strategy::Grouped];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Pooled => "pooled",
            Strategy::Separate => "separate",
            Strategy::Cluster => "cluster",
            Strategy::Grouped => "grouped",
        }
    }
}

impl std::fmt::Display for Strategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Strategy::ALL.into_iter().find(|k| k.name() == s).ok_or_else(|| format!("unknown strategy `{s}`"))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClusterSettings {
    pub k_min: usize,
    pub k_max: usize,
    pub restarts: usize,
    /// Cap on accepted swaps per k-medoids run.
    pub max_iter: usize,
}

impl Default for ClusterSettings {
    fn default() -> Self {
        ClusterSettings { k_min: 2, k_max: 8, restarts: 10, max_iter: 100 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Partition {
    pub strategy: Strategy,
    /// Users of each group, ascending.
    pub groups: Vec<Vec<usize>>,
    pub group_of: Vec<usize>,
    /// The clustering behind a `Cluster` partition.
    pub assignment: Option<ClusterAssignment>,
}

impl Partition {
    fn from_labels(strategy: Strategy, labels: Vec<usize>, assignment: Option<ClusterAssignment>) -> Self {
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let mut groups = vec![Vec::new(); k];
        for (u, &l) in labels.iter().enumerate() {
            groups[l].push(u);
        }
        Partition { strategy, groups, group_of: labels, assignment }
    }

    pub fn len(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }
}

/// Splits `n_users` users into learning groups according to `strategy`.
///
/// `traces` is required for `Cluster`, `true_profiles` for `Grouped`.
pub fn partition_users<R: Rng + ?Sized>(
    strategy: Strategy,
    n_users: usize,
    traces: Option<&[TraceVector]>,
    true_profiles: Option<&[ProfileKind]>,
    settings: &ClusterSettings,
    rng: &mut R,
) -> Result<Partition, ClusterError> {
    if n_users == 0 {
        return Err(ClusterError::Empty);
    }
    match strategy {
        Strategy::Pooled => Ok(Partition::from_labels(strategy, vec![0; n_users], None)),
        Strategy::Separate => Ok(Partition::from_labels(strategy, (0..n_users).collect(), None)),
        Strategy::Grouped => {
            let profiles = true_profiles
                .filter(|p| p.len() == n_users)
                .ok_or(ClusterError::MissingInput { strategy: "grouped", what: "one true profile per user" })?;
            // Number groups by profile order, skipping absent profiles.
            let present: Vec<ProfileKind> = ProfileKind::ALL.into_iter().filter(|k| profiles.contains(k)).collect();
            let labels = profiles.iter().map(|p| present.iter().position(|k| k == p).expect("present")).collect();
            Ok(Partition::from_labels(strategy, labels, None))
        }
        Strategy::Cluster => {
            let traces = traces
                .filter(|t| t.len() == n_users)
                .ok_or(ClusterError::MissingInput { strategy: "cluster", what: "one trace vector per user" })?;
            let dm = DistanceMatrix::from_vectors(traces)?;
            let assignment =
                select_k_matrix(&dm, settings.k_min, settings.k_max, settings.restarts, rng, settings.max_iter)?;
            Ok(Partition::from_labels(strategy, assignment.labels.clone(), Some(assignment)))
        }
    }
}

//! Trace vectors, Euclidean distances, k-medoids clustering and the user
//! partitioning strategies built on them.

mod kmedoids;
mod partition;
mod purity;

pub use kmedoids::{
    k_medoids, k_medoids_matrix, select_k, select_k_matrix, silhouette, silhouette_matrix, ClusterAssignment,
    KMedoidsRun,
};
pub use partition::{partition_users, ClusterSettings, Partition, Strategy};
pub use purity::{cluster_purity, random_label_baseline, ClusterPurity, PurityReport};

use thiserror::Error;

use crate::rl::{featurize, Experience, RlError, FEATURE_DIM};

/// Hourly steps in a one-week trace.
pub const TRACE_STEPS: usize = 7 * 24;
/// Features plus reward per step.
pub const STEP_DIM: usize = FEATURE_DIM + 1;
pub const TRACE_DIM: usize = TRACE_STEPS * STEP_DIM;

#[derive(Debug, Error, PartialEq)]
pub enum ClusterError {
    #[error("vectors of different dimension: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("trace has {0} steps, expected {TRACE_STEPS}")]
    WrongTraceLength(usize),
    #[error("invalid k = {k} for {n} points")]
    InvalidK { k: usize, n: usize },
    #[error("invalid k range {k_min}..={k_max}")]
    InvalidKRange { k_min: usize, k_max: usize },
    #[error("{labels} labels for {points} points")]
    LabelMismatch { labels: usize, points: usize },
    #[error("silhouette needs at least two non-empty clusters")]
    SingleCluster,
    #[error("no input vectors")]
    Empty,
    #[error("strategy `{strategy}` requires {what}")]
    MissingInput { strategy: &'static str, what: &'static str },
    #[error(transparent)]
    Rl(#[from] RlError),
}

/// One user's warm-up week flattened step by step: the ten normalized
/// features of the state followed by the hour's reward.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceVector(pub Vec<f64>);

impl AsRef<[f64]> for TraceVector {
    fn as_ref(&self) -> &[f64] {
        &self.0
    }
}

pub fn vectorize_trace(trace: &[Experience]) -> Result<TraceVector, ClusterError> {
    if trace.len() != TRACE_STEPS {
        return Err(ClusterError::WrongTraceLength(trace.len()));
    }
    let mut v = Vec::with_capacity(TRACE_DIM);
    for e in trace {
        v.extend_from_slice(featurize(&e.s)?.as_slice());
        v.push(e.reward);
    }
    Ok(TraceVector(v))
}

/// Same layout as [`vectorize_trace`], from already-normalized rows (as read
/// back from a trace export).
pub fn vectorize_rows(rows: &[([f64; FEATURE_DIM], f64)]) -> Result<TraceVector, ClusterError> {
    if rows.len() != TRACE_STEPS {
        return Err(ClusterError::WrongTraceLength(rows.len()));
    }
    let mut v = Vec::with_capacity(TRACE_DIM);
    for (features, reward) in rows {
        v.extend_from_slice(features);
        v.push(*reward);
    }
    Ok(TraceVector(v))
}

pub fn euclidean(a: &[f64], b: &[f64]) -> Result<f64, ClusterError> {
    if a.len() != b.len() {
        return Err(ClusterError::DimensionMismatch(a.len(), b.len()));
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt())
}

/// Symmetric matrix of pairwise Euclidean distances.
#[derive(Clone, Debug)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_vectors<T: AsRef<[f64]>>(vectors: &[T]) -> Result<Self, ClusterError> {
        let n = vectors.len();
        if n == 0 {
            return Err(ClusterError::Empty);
        }
        let mut d = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = euclidean(vectors[i].as_ref(), vectors[j].as_ref())?;
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.d[i * self.n + j]
    }
}

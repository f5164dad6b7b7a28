//! Partitioning around medoids with a best-improvement swap phase, and
//! silhouette-based selection of the number of clusters.

use rand::seq::index::sample;
use rand::Rng;

use crate::cluster::{ClusterError, DistanceMatrix};

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterAssignment {
    pub k: usize,
    /// Cluster of each point, `0..k`, numbered in increasing medoid index.
    pub labels: Vec<usize>,
    /// Point index of each cluster's medoid, ascending.
    pub medoids: Vec<usize>,
    pub silhouette: f64,
    /// Sum of distances of every point to its medoid.
    pub cost: f64,
}

impl ClusterAssignment {
    pub fn members(&self, cluster: usize) -> Vec<usize> {
        (0..self.labels.len()).filter(|&i| self.labels[i] == cluster).collect()
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }
}

/// Outcome of one k-medoids run, including the cost after the initial
/// assignment and after every accepted swap.
#[derive(Clone, Debug)]
pub struct KMedoidsRun {
    pub assignment: ClusterAssignment,
    pub cost_history: Vec<f64>,
    pub swaps: usize,
}

fn assign(dm: &DistanceMatrix, medoids: &[usize]) -> (Vec<usize>, f64) {
    let mut labels = Vec::with_capacity(dm.len());
    let mut cost = 0.0;
    for i in 0..dm.len() {
        let (best, d) =
            match medoids.iter().position(|&m| m == i) {
                Some(own) => (own, 0.0),
                None => medoids
                    .iter()
                    .enumerate()
                    .map(|(c, &m)| (c, dm.get(i, m)))
                    .fold((0, f64::INFINITY), |acc, x| if x.1 < acc.1 { x } else { acc }),
            };
        labels.push(best);
        cost += d;
    }
    (labels, cost)
}

/// Nearest and second-nearest medoid distance for every point.
fn nearest_two(dm: &DistanceMatrix, medoids: &[usize]) -> Vec<(usize, f64, f64)> {
    (0..dm.len())
        .map(|i| {
            let mut best = (usize::MAX, f64::INFINITY);
            let mut second = f64::INFINITY;
            for (c, &m) in medoids.iter().enumerate() {
                let d = dm.get(i, m);
                if d < best.1 {
                    second = best.1;
                    best = (c, d);
                } else if d < second {
                    second = d;
                }
            }
            (best.0, best.1, second)
        })
        .collect()
}

/// k-medoids from a uniformly sampled initial medoid set, improved by the
/// single swap (medoid, non-medoid) that lowers the total cost most, until no
/// swap helps or `max_iter` swaps were made.
pub fn k_medoids_matrix<R: Rng + ?Sized>(
    dm: &DistanceMatrix,
    k: usize,
    rng: &mut R,
    max_iter: usize,
) -> Result<KMedoidsRun, ClusterError> {
    let n = dm.len();
    if k == 0 || k > n {
        return Err(ClusterError::InvalidK { k, n });
    }
    let mut medoids = sample(rng, n, k).into_vec();
    medoids.sort_unstable();
    let (_, mut cost) = assign(dm, &medoids);
    let mut cost_history = vec![cost];
    let mut swaps = 0;
    let tolerance = 1e-12 * (1.0 + cost.abs());
    while swaps < max_iter {
        let near = nearest_two(dm, &medoids);
        let mut best: Option<(usize, usize, f64)> = None;
        for slot in 0..medoids.len() {
            for o in (0..n).filter(|o| !medoids.contains(o)) {
                let delta: f64 = near
                    .iter()
                    .enumerate()
                    .map(|(j, &(c, d1, d2))| {
                        let to_o = dm.get(j, o);
                        let without = if c == slot { d2 } else { d1 };
                        without.min(to_o) - d1
                    })
                    .sum();
                if delta < -tolerance && best.is_none_or(|b| delta < b.2) {
                    best = Some((slot, o, delta));
                }
            }
        }
        let Some((slot, o, _)) = best else { break };
        medoids[slot] = o;
        medoids.sort_unstable();
        swaps += 1;
        cost = assign(dm, &medoids).1;
        cost_history.push(cost);
    }
    let (labels, cost) = assign(dm, &medoids);
    let silhouette = if k >= 2 { silhouette_matrix(dm, &labels)? } else { 0.0 };
    Ok(KMedoidsRun { assignment: ClusterAssignment { k, labels, medoids, silhouette, cost }, cost_history, swaps })
}

pub fn k_medoids<T: AsRef<[f64]>, R: Rng + ?Sized>(
    vectors: &[T],
    k: usize,
    rng: &mut R,
    max_iter: usize,
) -> Result<ClusterAssignment, ClusterError> {
    let dm = DistanceMatrix::from_vectors(vectors)?;
    Ok(k_medoids_matrix(&dm, k, rng, max_iter)?.assignment)
}

/// Mean silhouette: per point `(b - a) / max(a, b)` with `a` the mean
/// distance within its cluster and `b` the smallest mean distance to another
/// cluster. Points alone in their cluster score 0, as do points with
/// `a = b = 0`.
pub fn silhouette_matrix(dm: &DistanceMatrix, labels: &[usize]) -> Result<f64, ClusterError> {
    let n = dm.len();
    if labels.len() != n {
        return Err(ClusterError::LabelMismatch { labels: labels.len(), points: n });
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    if sizes.iter().filter(|&&s| s > 0).count() < 2 {
        return Err(ClusterError::SingleCluster);
    }
    let mut total = 0.0;
    let mut sums = vec![0.0; k];
    for i in 0..n {
        let own = labels[i];
        if sizes[own] == 1 {
            continue;
        }
        sums.iter_mut().for_each(|s| *s = 0.0);
        for j in 0..n {
            if j != i {
                sums[labels[j]] += dm.get(i, j);
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        if denom > 0.0 {
            total += (b - a) / denom;
        }
    }
    Ok(total / n as f64)
}

pub fn silhouette<T: AsRef<[f64]>>(vectors: &[T], labels: &[usize]) -> Result<f64, ClusterError> {
    silhouette_matrix(&DistanceMatrix::from_vectors(vectors)?, labels)
}

/// For every k in `k_min..=k_max`, keeps the lowest-cost of `restarts`
/// k-medoids runs, then returns the one with the highest silhouette
/// (smaller k wins ties).
pub fn select_k_matrix<R: Rng + ?Sized>(
    dm: &DistanceMatrix,
    k_min: usize,
    k_max: usize,
    restarts: usize,
    rng: &mut R,
    max_iter: usize,
) -> Result<ClusterAssignment, ClusterError> {
    let n = dm.len();
    if k_min < 2 || k_min > k_max {
        return Err(ClusterError::InvalidKRange { k_min, k_max });
    }
    if n <= k_max {
        return Err(ClusterError::InvalidK { k: k_max, n });
    }
    let restarts = restarts.max(1);
    let mut chosen: Option<ClusterAssignment> = None;
    for k in k_min..=k_max {
        let mut best: Option<ClusterAssignment> = None;
        for _ in 0..restarts {
            let run = k_medoids_matrix(dm, k, rng, max_iter)?.assignment;
            if best.as_ref().is_none_or(|b| run.cost < b.cost) {
                best = Some(run);
            }
        }
        let best = best.expect("at least one restart");
        if chosen.as_ref().is_none_or(|c| best.silhouette > c.silhouette) {
            chosen = Some(best);
        }
    }
    Ok(chosen.expect("non-empty k range"))
}

pub fn select_k<T: AsRef<[f64]>, R: Rng + ?Sized>(
    vectors: &[T],
    k_min: usize,
    k_max: usize,
    restarts: usize,
    rng: &mut R,
    max_iter: usize,
) -> Result<ClusterAssignment, ClusterError> {
    let dm = DistanceMatrix::from_vectors(vectors)?;
    select_k_matrix(&dm, k_min, k_max, restarts, rng, max_iter)
}

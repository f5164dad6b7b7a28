use crate::sim::ProfileKind;

#[derive(Clone, Debug, PartialEq)]
pub struct ClusterPurity {
    pub label: usize,
    pub size: usize,
    pub majority: ProfileKind,
    /// Fraction of members sharing the majority profile.
    pub purity: f64,
    /// Members per profile, in [`ProfileKind::ALL`] order.
    pub composition: [usize; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct PurityReport {
    pub clusters: Vec<ClusterPurity>,
    /// Per profile: fraction of same-profile user pairs placed in the same
    /// cluster. `None` for profiles with fewer than two users.
    pub co_clustering: [Option<f64>; 3],
    /// Expected co-clustering rate of a pair under a random relabeling that
    /// keeps the cluster sizes.
    pub random_baseline: f64,
}

/// Probability that two distinct users share a cluster when cluster labels
/// are randomly permuted across users: `sum n_c (n_c - 1) / (N (N - 1))`.
pub fn random_label_baseline(labels: &[usize]) -> f64 {
    let n = labels.len();
    if n < 2 {
        return 0.0;
    }
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &l in labels {
        sizes[l] += 1;
    }
    let same: usize = sizes.iter().map(|&s| s * s.saturating_sub(1)).sum();
    same as f64 / (n * (n - 1)) as f64
}

pub fn cluster_purity(labels: &[usize], truth: &[ProfileKind]) -> PurityReport {
    assert_eq!(labels.len(), truth.len(), "labels and truths must align");
    let k = labels.iter().max().map_or(0, |m| m + 1);
    let mut composition = vec![[0usize; 3]; k];
    for (&l, p) in labels.iter().zip(truth) {
        composition[l][p.index()] += 1;
    }
    let clusters = composition
        .iter()
        .enumerate()
        .filter(|(_, c)| c.iter().sum::<usize>() > 0)
        .map(|(label, c)| {
            let size: usize = c.iter().sum();
            // first profile wins a tie for majority
            let (mi, &count) = c.iter().enumerate().fold((0, &0), |a, x| if x.1 > a.1 { x } else { a });
            ClusterPurity {
                label,
                size,
                majority: ProfileKind::ALL[mi],
                purity: count as f64 / size as f64,
                composition: *c,
            }
        })
        .collect();
    let mut co_clustering = [None; 3];
    for kind in ProfileKind::ALL {
        let users: Vec<usize> = (0..truth.len()).filter(|&u| truth[u] == kind).collect();
        let pairs = users.len() * users.len().saturating_sub(1) / 2;
        if pairs == 0 {
            continue;
        }
        let together =
            composition.iter().map(|c| c[kind.index()] * c[kind.index()].saturating_sub(1) / 2).sum::<usize>();
        co_clustering[kind.index()] = Some(together as f64 / pairs as f64);
    }
    PurityReport { clusters, co_clustering, random_baseline: random_label_baseline(labels) }
}

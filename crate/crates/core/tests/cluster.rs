mod cluster_partition {
    use cbrl_core::cluster::*;
    use cbrl_core::sim::ProfileKind;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn profiles(per: usize) -> Vec<ProfileKind> {
        ProfileKind::ALL.into_iter().flat_map(|k| std::iter::repeat_n(k, per)).collect()
    }

    #[test]
    fn grouped_three_by_33() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = profiles(33);
        let part =
            partition_users(Strategy::Grouped, 99, None, Some(&p), &ClusterSettings::default(), &mut rng).unwrap();
        assert_eq!(part.len(), 3);
        assert!(part.groups.iter().all(|g| g.len() == 33));
        for (u, &g) in part.group_of.iter().enumerate() {
            assert_eq!(g, p[u].index());
        }
    }

    #[test]
    fn separate_and_pooled() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = ClusterSettings::default();
        let sep = partition_users(Strategy::Separate, 12, None, None, &s, &mut rng).unwrap();
        assert_eq!(sep.len(), 12);
        let pooled = partition_users(Strategy::Pooled, 12, None, None, &s, &mut rng).unwrap();
        assert_eq!(pooled.len(), 1);
        assert_eq!(pooled.groups[0], (0..12).collect::<Vec<_>>());
    }

    #[test]
    fn missing_inputs_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let s = ClusterSettings::default();
        assert!(matches!(
            partition_users(Strategy::Cluster, 12, None, None, &s, &mut rng),
            Err(ClusterError::MissingInput { .. })
        ));
        assert!(matches!(
            partition_users(Strategy::Grouped, 12, None, None, &s, &mut rng),
            Err(ClusterError::MissingInput { .. })
        ));
    }

    #[test]
    fn cluster_partition_covers_users() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let traces: Vec<TraceVector> =
            (0..20).map(|i| TraceVector(vec![(i / 10) as f64 * 50.0 + rng.random::<f64>(), 0.0])).collect();
        let part =
            partition_users(Strategy::Cluster, 20, Some(&traces), None, &ClusterSettings::default(), &mut rng).unwrap();
        assert_eq!(part.len(), 2);
        assert_eq!(part.groups.iter().map(Vec::len).sum::<usize>(), 20);
        assert!(part.assignment.is_some());
    }
}

mod cluster_kmedoids {
    use cbrl_core::cluster::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pts(v: &[f64]) -> Vec<Vec<f64>> {
        v.iter().map(|&x| vec![x]).collect()
    }

    /// Exhaustive search over all medoid pairs.
    fn brute_force_k2(points: &[f64]) -> (f64, Vec<usize>) {
        let n = points.len();
        let mut best = (f64::INFINITY, vec![]);
        for a in 0..n {
            for b in a + 1..n {
                let cost: f64 = points.iter().map(|p| (p - points[a]).abs().min((p - points[b]).abs())).sum();
                if cost < best.0 {
                    best = (cost, vec![a, b]);
                }
            }
        }
        best
    }

    #[test]
    fn planted_pairs_recovered() {
        let raw = [0.0, 0.1, 10.0, 10.1];
        let (oracle_cost, _) = brute_force_k2(&raw);
        assert!((oracle_cost - 0.2).abs() < 1e-12);
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = k_medoids(&pts(&raw), 2, &mut rng, 100).unwrap();
            assert!((a.cost - oracle_cost).abs() < 1e-12);
            assert_eq!(a.labels[0], a.labels[1]);
            assert_eq!(a.labels[2], a.labels[3]);
            assert_ne!(a.labels[0], a.labels[2]);
        }
    }

    #[test]
    fn identical_points_cost_zero() {
        let v = pts(&[3.0; 6]);
        for k in 1..=6 {
            let mut rng = ChaCha8Rng::seed_from_u64(k as u64);
            let a = k_medoids(&v, k, &mut rng, 100).unwrap();
            assert_eq!(a.cost, 0.0);
            assert!(a.sizes().iter().all(|&s| s > 0), "empty cluster for k={k}");
        }
    }

    #[test]
    fn n_equals_k() {
        let v = pts(&[1.0, 5.0, 2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let a = k_medoids(&v, 3, &mut rng, 100).unwrap();
        assert_eq!(a.cost, 0.0);
        assert_eq!(a.medoids, vec![0, 1, 2]);
        assert_eq!(a.silhouette, 0.0);
    }

    #[test]
    fn k_larger_than_n_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(k_medoids(&pts(&[1.0, 2.0]), 3, &mut rng, 10), Err(ClusterError::InvalidK { .. })));
    }

    #[test]
    fn medoid_in_own_cluster() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let v: Vec<Vec<f64>> = (0..40).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let a = k_medoids(&v, 5, &mut rng, 100).unwrap();
        for (c, &m) in a.medoids.iter().enumerate() {
            assert_eq!(a.labels[m], c);
        }
    }

    /// Per-point silhouette from first principles.
    fn silhouette_oracle(points: &[f64], labels: &[usize]) -> f64 {
        let n = points.len();
        let mut total = 0.0;
        for i in 0..n {
            let same: Vec<f64> =
                (0..n).filter(|&j| j != i && labels[j] == labels[i]).map(|j| (points[i] - points[j]).abs()).collect();
            if same.is_empty() {
                continue;
            }
            let a = same.iter().sum::<f64>() / same.len() as f64;
            let mut b = f64::INFINITY;
            for c in labels.iter().copied().filter(|&c| c != labels[i]) {
                let other: Vec<f64> =
                    (0..n).filter(|&j| labels[j] == c).map(|j| (points[i] - points[j]).abs()).collect();
                b = b.min(other.iter().sum::<f64>() / other.len() as f64);
            }
            if a.max(b) > 0.0 {
                total += (b - a) / a.max(b);
            }
        }
        total / n as f64
    }

    #[test]
    fn silhouette_planted_pairs() {
        let raw = [0.0, 0.1, 10.0, 10.1];
        let labels = [0, 0, 1, 1];
        let expected = silhouette_oracle(&raw, &labels);
        // (9.95/10.05 + 9.85/9.95) / 2
        assert!((expected - 0.989_999_749_9).abs() < 1e-9);
        let s = silhouette(&pts(&raw), &labels).unwrap();
        assert!((s - expected).abs() < 1e-12);
        assert!((s - 0.9899).abs() < 1e-3);
    }

    #[test]
    fn silhouette_degenerate() {
        let v = pts(&[2.0; 6]);
        assert_eq!(silhouette(&v, &[0, 1, 0, 1, 1, 0]).unwrap(), 0.0);
        assert!(matches!(silhouette(&v, &[0; 6]), Err(ClusterError::SingleCluster)));
    }

    #[test]
    fn mislabeling_lowers_silhouette() {
        let raw = [0.0, 0.1, 0.2, 10.0, 10.1, 10.2];
        let good = silhouette(&pts(&raw), &[0, 0, 0, 1, 1, 1]).unwrap();
        let bad = silhouette(&pts(&raw), &[0, 0, 1, 1, 1, 1]).unwrap();
        assert!(bad < good);
        assert!((bad - silhouette_oracle(&raw, &[0, 0, 1, 1, 1, 1])).abs() < 1e-12);
    }

    fn blobs(centers: &[[f64; 2]], per: usize, spread: f64, rng: &mut ChaCha8Rng) -> (Vec<Vec<f64>>, Vec<usize>) {
        let mut v = Vec::new();
        let mut truth = Vec::new();
        for (c, center) in centers.iter().enumerate() {
            for _ in 0..per {
                v.push(vec![
                    center[0] + spread * (rng.random::<f64>() - 0.5),
                    center[1] + spread * (rng.random::<f64>() - 0.5),
                ]);
                truth.push(c);
            }
        }
        (v, truth)
    }

    #[test]
    fn select_k_recovers_planted_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let (v3, _) = blobs(&[[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]], 10, 1.0, &mut rng);
        assert_eq!(select_k(&v3, 2, 8, 10, &mut rng, 100).unwrap().k, 3);
        let (v2, _) = blobs(&[[0.0, 0.0], [10.0, 10.0]], 12, 1.0, &mut rng);
        assert_eq!(select_k(&v2, 2, 8, 10, &mut rng, 100).unwrap().k, 2);
    }

    #[test]
    fn select_k_on_uniform_cloud() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v: Vec<Vec<f64>> = (0..60).map(|_| vec![rng.random::<f64>(), rng.random::<f64>()]).collect();
        let a = select_k(&v, 2, 8, 5, &mut rng, 100).unwrap();
        assert!((2..=8).contains(&a.k));
        assert!(a.silhouette > -1.0 && a.silhouette < 0.6, "{}", a.silhouette);
    }

    #[test]
    fn select_k_requires_more_points_than_k() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        assert!(select_k(&pts(&[1.0, 2.0, 3.0]), 2, 3, 1, &mut rng, 10).is_err());
    }
}

mod cluster_purity {
    use cbrl_core::cluster::*;
    use cbrl_core::sim::ProfileKind;
    use rand::seq::SliceRandom;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn truth(per: usize) -> Vec<ProfileKind> {
        ProfileKind::ALL.into_iter().flat_map(|k| std::iter::repeat_n(k, per)).collect()
    }

    #[test]
    fn perfect_partition() {
        let t = truth(33);
        let labels: Vec<usize> = t.iter().map(|p| p.index()).collect();
        let r = cluster_purity(&labels, &t);
        assert!(r.clusters.iter().all(|c| c.purity == 1.0));
        assert_eq!(r.co_clustering, [Some(1.0); 3]);
    }

    #[test]
    fn one_swapped_pair() {
        let t = truth(33);
        let mut labels: Vec<usize> = t.iter().map(|p| p.index()).collect();
        labels.swap(0, 33);
        let r = cluster_purity(&labels, &t);
        assert!((r.clusters[0].purity - 32.0 / 33.0).abs() < 1e-15);
        assert!((r.clusters[1].purity - 32.0 / 33.0).abs() < 1e-15);
        assert_eq!(r.clusters[2].purity, 1.0);
    }

    #[test]
    fn relabeling_invariance() {
        let t = truth(10);
        let labels: Vec<usize> = (0..30).map(|u| (u * 7 + u / 3) % 4).collect();
        let perm = [2, 0, 3, 1];
        let relabeled: Vec<usize> = labels.iter().map(|&l| perm[l]).collect();
        let a = cluster_purity(&labels, &t);
        let b = cluster_purity(&relabeled, &t);
        assert_eq!(a.co_clustering, b.co_clustering);
        assert_eq!(a.random_baseline, b.random_baseline);
        let mut pa: Vec<f64> = a.clusters.iter().map(|c| c.purity).collect();
        let mut pb: Vec<f64> = b.clusters.iter().map(|c| c.purity).collect();
        pa.sort_by(f64::total_cmp);
        pb.sort_by(f64::total_cmp);
        assert_eq!(pa, pb);
    }

    #[test]
    fn random_labels_monte_carlo() {
        let t = truth(33);
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let mut labels: Vec<usize> = (0..99).map(|u| u % 3).collect();
        let reps = 400;
        let mut mean_purity = 0.0;
        let mut mean_co = 0.0;
        for _ in 0..reps {
            labels.shuffle(&mut rng);
            let r = cluster_purity(&labels, &t);
            mean_purity += r.clusters.iter().map(|c| c.purity).sum::<f64>() / r.clusters.len() as f64;
            mean_co += r.co_clustering.iter().map(|c| c.unwrap()).sum::<f64>() / 3.0;
        }
        mean_purity /= reps as f64;
        mean_co /= reps as f64;
        // majority of a random third of 99 sits a little above 1/3
        assert!(mean_purity > 1.0 / 3.0 && mean_purity < 0.45, "{mean_purity}");
        let baseline = random_label_baseline(&labels);
        assert!((baseline - 32.0 / 98.0).abs() < 1e-12);
        assert!((mean_co - baseline).abs() < 0.02, "{mean_co} vs {baseline}");
    }
}

mod cluster {
    use cbrl_core::cluster::*;
    use cbrl_core::rl::{Action, Experience, Observation};
    use proptest::prelude::*;

    fn zero_trace() -> Vec<Experience> {
        let o = Observation { hour: 0, weekday: 0, worked_out_today: false, fatigue: 0, last_hour: [false; 6] };
        vec![Experience { s: o, action: Action::Wait, reward: 0.0, next: o }; TRACE_STEPS]
    }

    #[test]
    fn zero_trace_vector() {
        let v = vectorize_trace(&zero_trace()).unwrap();
        assert_eq!(v.0.len(), TRACE_DIM);
        assert_eq!(TRACE_DIM, 1848);
        assert!(v.0.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn single_reward_difference() {
        let a = zero_trace();
        let mut b = zero_trace();
        b[100].reward = -0.5;
        let va = vectorize_trace(&a).unwrap();
        let vb = vectorize_trace(&b).unwrap();
        assert_eq!(va, vectorize_trace(&a).unwrap());
        assert_eq!(euclidean(&va.0, &vb.0).unwrap(), 0.5);
    }

    #[test]
    fn wrong_length_rejected() {
        let mut t = zero_trace();
        t.pop();
        assert_eq!(vectorize_trace(&t), Err(ClusterError::WrongTraceLength(167)));
    }

    #[test]
    fn euclidean_examples() {
        assert_eq!(euclidean(&[1.0, 2.0], &[1.0, 2.0]).unwrap(), 0.0);
        assert_eq!(euclidean(&[1.0, 2.0], &[1.0, 3.0]).unwrap(), 1.0);
        assert_eq!(euclidean(&[0.0, 0.0], &[3.0, 4.0]).unwrap(), 5.0);
        assert!(euclidean(&[0.0], &[0.0, 1.0]).is_err());
    }

    proptest! {
        #[test]
        fn metric_axioms(
            a in proptest::collection::vec(-10.0f64..10.0, 5),
            b in proptest::collection::vec(-10.0f64..10.0, 5),
            c in proptest::collection::vec(-10.0f64..10.0, 5),
        ) {
            let ab = euclidean(&a, &b).unwrap();
            prop_assert_eq!(ab, euclidean(&b, &a).unwrap());
            prop_assert_eq!(euclidean(&a, &a).unwrap(), 0.0);
            prop_assert!(ab > 0.0 || a == b);
            let ac = euclidean(&a, &c).unwrap();
            let cb = euclidean(&c, &b).unwrap();
            prop_assert!(ab <= ac + cb + 1e-12);
        }
    }
}

mod stats {
    use cbrl_core::stats::*;
    use proptest::prelude::*;

    /// Exact two-sided p-value by enumerating all sign assignments of the
    /// ranks `1..=n` (no ties).
    fn exact_p(n: usize, w_plus: f64) -> f64 {
        let mean = (n * (n + 1)) as f64 / 4.0;
        let dev = (w_plus - mean).abs();
        let mut extreme = 0u64;
        for mask in 0u64..(1 << n) {
            let w: usize = (0..n).filter(|i| mask >> i & 1 == 1).map(|i| i + 1).sum();
            if ((w as f64) - mean).abs() >= dev - 1e-9 {
                extreme += 1;
            }
        }
        extreme as f64 / (1u64 << n) as f64
    }

    #[test]
    fn shifted_sample_is_significant() {
        let b: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        let a: Vec<f64> = b.iter().map(|x| x + 1.0).collect();
        let r = wilcoxon_signed_rank(&a, &b).unwrap();
        assert!(r.p_value < 1e-6);
        assert!(r.z > 0.0);
        assert_eq!(r.w_minus, 0.0);
    }

    #[test]
    fn identical_samples() {
        let a = vec![1.5; 20];
        let r = wilcoxon_signed_rank(&a, &a).unwrap();
        assert_eq!(r.p_value, 1.0);
        assert_eq!(r.n, 0);
    }

    #[test]
    fn input_validation() {
        assert_eq!(wilcoxon_signed_rank(&[0.0; 10], &[0.0; 11]), Err(StatsError::LengthMismatch(10, 11)));
        assert_eq!(wilcoxon_signed_rank(&[0.0; 9], &[0.0; 9]), Err(StatsError::TooFewPairs(9)));
        let mut a = vec![0.0; 10];
        a[3] = f64::NAN;
        assert_eq!(wilcoxon_signed_rank(&a, &[0.0; 10]), Err(StatsError::NonFinite));
    }

    #[test]
    fn tied_ranks_are_averaged() {
        let (r, ties) = average_ranks(&[3.0, 1.0, 3.0, 2.0]);
        assert_eq!(r, vec![3.5, 1.0, 3.5, 2.0]);
        assert_eq!(ties, 6.0);
    }

    #[test]
    fn close_to_exact_distribution() {
        // differences with distinct magnitudes; signs chosen per pattern
        for pattern in [0b0000_0000_0001u32, 0b0000_0101_0011, 0b0110_1001_0110, 0b1111_1110_0000] {
            let n = 12;
            let b = vec![0.0; n];
            let a: Vec<f64> =
                (0..n).map(|i| if pattern >> i & 1 == 1 { (i + 1) as f64 } else { -((i + 1) as f64) }).collect();
            let r = wilcoxon_signed_rank(&a, &b).unwrap();
            let exact = exact_p(n, r.w_plus);
            assert!((r.p_value - exact).abs() < 0.02, "pattern {pattern:b}: {} vs {exact}", r.p_value);
        }
    }

    proptest! {
        #[test]
        fn antisymmetric_and_bounded(
            pairs in proptest::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 10..60)
        ) {
            let (a, b): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
            let ab = wilcoxon_signed_rank(&a, &b).unwrap();
            let ba = wilcoxon_signed_rank(&b, &a).unwrap();
            prop_assert!((0.0..=1.0).contains(&ab.p_value));
            prop_assert!((ab.p_value - ba.p_value).abs() < 1e-12);
            prop_assert!((ab.z + ba.z).abs() < 1e-12);
            prop_assert!((ab.w_plus - ba.w_minus).abs() < 1e-9);
        }
    }
}

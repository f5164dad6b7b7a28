mod sim_profile {
    use cbrl_core::sim::*;

    #[test]
    fn builtins_validate() {
        for p in UserProfile::builtins() {
            p.validate().unwrap();
        }
    }

    #[test]
    fn table_values_spot_check() {
        let w = UserProfile::workaholic();
        let work = w.spec(Activity::Work).unwrap();
        assert_eq!(work.prob_per_day, [1.0, 1.0, 1.0, 1.0, 1.0, 0.8, 0.0]);
        assert_eq!((work.min_duration, work.max_duration), (10.0, 11.0));
        let a = UserProfile::arnold();
        assert_eq!(a.spec(Activity::Work).unwrap().prob_per_day, [1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]);
        assert_eq!(a.spec(Activity::WorkOut).unwrap().early_start, 16.0);
        let r = UserProfile::retiree();
        assert_eq!(r.spec(Activity::Sleep).unwrap().late_start, 23.5);
        assert_eq!(r.planner, PlannerSpec::SPONTANEOUS);
        assert_eq!([w.fatigue_threshold, a.fatigue_threshold, r.fatigue_threshold], [2, 4, 1]);
        assert_eq!([w.second_workout_prob, a.second_workout_prob, r.second_workout_prob], [0.1, 0.5, 0.0]);
    }

    #[test]
    fn sleep_and_breakfast_yield_to_work() {
        for p in UserProfile::builtins() {
            assert!(p.has_priority_over(Activity::Sleep, Activity::Work));
            assert!(p.has_priority_over(Activity::Breakfast, Activity::Work));
            assert!(!p.has_priority_over(Activity::Work, Activity::Sleep));
        }
    }

    #[test]
    fn acceptance_rules() {
        assert!(AcceptanceRule::LunchOrIdle.allows(Some(Activity::Lunch)));
        assert!(AcceptanceRule::LunchOrIdle.allows(None));
        assert!(!AcceptanceRule::LunchOrIdle.allows(Some(Activity::Work)));
        assert!(!AcceptanceRule::IdleOnly.allows(Some(Activity::Lunch)));
        assert!(AcceptanceRule::Always.allows(Some(Activity::Sleep)));
    }

    #[test]
    fn invalid_specs_rejected() {
        let mut p = UserProfile::arnold();
        p.activities[0].early_start = 23.5;
        assert!(p.validate().is_err());
        let mut p = UserProfile::arnold();
        p.activities[1].prob_per_day[3] = 1.5;
        assert!(p.validate().is_err());
        let mut p = UserProfile::arnold();
        p.fatigue_threshold = 8;
        assert!(p.validate().is_err());
        let mut p = UserProfile::arnold();
        p.activities.retain(|a| a.name != Activity::WorkOut);
        assert!(p.validate().is_err());
    }
}

mod sim_user {
    use cbrl_core::sim::*;
    use std::sync::Arc;

    fn user(kind: ProfileKind, seed: u64) -> SimUser {
        SimUser::with_seed(0, Arc::new(UserProfile::builtin(kind)), seed)
    }

    fn plan_with(weekday: u8, entries: &[(Activity, f64, f64)]) -> DayPlan {
        DayPlan {
            weekday,
            entries: entries
                .iter()
                .map(|&(activity, start, duration)| PlannedActivity { activity, start, duration, active: true })
                .collect(),
        }
    }

    #[test]
    fn eq4_examples() {
        assert_eq!(effective_workout_duration(1.0, 4, 2), 0.5);
        assert_eq!(effective_workout_duration(1.0, 2, 2), 1.0);
        assert!((effective_workout_duration(0.5, 7, 1) - 0.188_982_236_504_613_6).abs() < 1e-12);
        assert_eq!(effective_workout_duration(0.7, 0, 0), 0.7);
    }

    #[test]
    fn completion_reward_scaling() {
        assert_eq!(workout_completion_reward(0.5), 1.0);
        assert_eq!(workout_completion_reward(1.0), 2.0);
        assert_eq!(workout_completion_reward(0.25), 0.5);
    }

    #[test]
    fn fatigue_zero_no_penalty() {
        let mut u = user(ProfileKind::Retiree, 1);
        assert_eq!(u.end_of_day_update().unwrap(), None);
        assert_eq!(u.fatigue(), 0);
    }

    #[test]
    fn double_close_is_an_error() {
        let mut u = user(ProfileKind::Retiree, 1);
        u.end_of_day_update().unwrap();
        assert!(matches!(u.end_of_day_update(), Err(SimError::DayAlreadyClosed(0))));
    }

    #[test]
    fn retiree_without_interventions_never_works_out() {
        let mut u = user(ProfileKind::Retiree, 7);
        for _ in 0..14 {
            let plan = u.plan_day();
            let out = run_day(&mut u, plan, &[]).unwrap();
            assert!(out.events.is_empty());
            assert!(out.observations.iter().all(|o| !o.did(Activity::WorkOut)));
        }
    }

    #[test]
    fn workaholic_at_work_rejects() {
        let mut u = user(ProfileKind::Workaholic, 3);
        let plan = plan_with(0, &[(Activity::Work, 8.0, 10.0), (Activity::Sleep, 23.0, 6.0)]);
        u.begin_day(plan).unwrap();
        for _ in 0..10 {
            u.step_hour(false).unwrap();
        }
        assert_eq!(u.current_activity(), Some(Activity::Work));
        let out = u.step_hour(true).unwrap();
        assert_eq!(out.response, Some(false));
        assert_eq!(out.reward, REJECTION_REWARD);
        assert!(!u.has_pending_workout());
    }

    #[test]
    fn arnold_idle_evening_accepts_at_plan_offset() {
        let mut u = user(ProfileKind::Arnold, 11);
        let plan = plan_with(0, &[(Activity::Work, 9.0, 6.0), (Activity::Sleep, 23.0, 8.0)]);
        u.begin_day(plan).unwrap();
        for _ in 0..16 {
            u.step_hour(false).unwrap();
        }
        assert_eq!(u.current_activity(), None);
        let expected = 16 * HOUR + hours_to_secs(u.agent_t_plan_min());
        assert_eq!(u.find_gap(16 * HOUR), Some(expected));
        let out = u.step_hour(true).unwrap();
        assert_eq!(out.response, Some(true));
        let accepted: Vec<_> = out.events.iter().filter(|e| e.kind == RewardKind::Acceptance).collect();
        assert_eq!(accepted.len(), 1);
        assert_eq!(accepted[0].value, 1.0);
        // The workout runs one hour from the planned start and completes; a
        // completion on an hour boundary belongs to the hour that just ended.
        let mut completions: Vec<_> =
            out.events.iter().copied().filter(|e| e.kind == RewardKind::WorkoutCompletion).collect();
        for _ in 17..24 {
            let o = u.step_hour(false).unwrap();
            completions.extend(o.events.into_iter().filter(|e| e.kind == RewardKind::WorkoutCompletion));
        }
        assert_eq!(completions.len(), 1);
        assert_eq!(completions[0].time, (expected + HOUR) as u64);
        assert!((completions[0].value - 2.0).abs() < 1e-9);
        assert_eq!(u.fatigue(), 1);
    }

    #[test]
    fn fatigue_tracks_daily_streak() {
        let mut u = user(ProfileKind::Arnold, 9);
        for day in 0..10u32 {
            let plan = u.plan_day();
            // skip day 4 entirely
            let hours: &[u8] = if day == 4 { &[] } else { &[6] };
            run_day(&mut u, plan, hours).unwrap();
            let expected = match day {
                0..=3 => day as u8 + 1,
                4 => 0,
                _ => (day - 4) as u8,
            };
            assert!(u.fatigue() <= expected, "day {day}: fatigue {}", u.fatigue());
        }
    }

    #[test]
    fn planned_work_preempts_sleep() {
        let mut u = user(ProfileKind::Workaholic, 4);
        u.record_segments(true);
        // sleep ends 6:00 of the next day, work starts at 5:00 then
        let plan = plan_with(0, &[(Activity::Sleep, 23.0, 7.0)]);
        run_day(&mut u, plan, &[]).unwrap();
        let plan = plan_with(1, &[(Activity::Work, 5.0, 2.0), (Activity::Sleep, 23.0, 7.0)]);
        u.take_segments();
        run_day(&mut u, plan, &[]).unwrap();
        let segs = u.take_segments();
        let at = |t: Secs| segs.iter().find(|s| s.from <= t && t < s.to).unwrap().activity;
        assert_eq!(at(DAY + 4 * HOUR), Some(Activity::Sleep));
        assert_eq!(at(DAY + 5 * HOUR), Some(Activity::Work));
        assert_eq!(at(DAY + 6 * HOUR + 1), Some(Activity::Work));
        assert_eq!(at(DAY + 7 * HOUR), None);
    }

    #[test]
    fn seeded_users_are_reproducible() {
        let run = || {
            let mut u = user(ProfileKind::Arnold, 99);
            let mut all = Vec::new();
            for _ in 0..5 {
                let plan = u.plan_day();
                all.push(run_day(&mut u, plan, &[10, 17]).unwrap());
            }
            all
        };
        assert_eq!(run(), run());
    }
}

mod sim_plan {
    use cbrl_core::sim::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn workaholic_sleep_start_is_fixed() {
        let p = UserProfile::workaholic();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for day in 0..70u8 {
            let plan = generate_day_plan(&p, day % 7, &mut rng);
            let sleep = plan.get(Activity::Sleep).unwrap();
            assert_eq!(sleep.start, 23.0);
            assert!((6.0..=7.0).contains(&sleep.duration));
        }
    }

    #[test]
    fn retiree_never_works() {
        let p = UserProfile::retiree();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for day in 0..700u32 {
            let plan = generate_day_plan(&p, (day % 7) as u8, &mut rng);
            assert!(!plan.get(Activity::Work).unwrap().active);
            assert!(!plan.get(Activity::WorkOut).unwrap().active);
        }
    }

    #[test]
    fn degenerate_duration() {
        let p = UserProfile::arnold();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let plan = generate_day_plan(&p, 0, &mut rng);
            assert_eq!(plan.get(Activity::Work).unwrap().duration, 8.0);
            assert_eq!(plan.get(Activity::Breakfast).unwrap().duration, 0.25);
        }
    }

    #[test]
    fn draws_stay_in_ranges() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for p in UserProfile::builtins() {
            for day in 0..200u32 {
                let wd = (day % 7) as u8;
                let plan = generate_day_plan(&p, wd, &mut rng);
                for (e, spec) in plan.entries.iter().zip(&p.activities) {
                    assert!(e.start >= spec.early_start && e.start <= spec.late_start);
                    assert!(e.duration >= spec.min_duration && e.duration <= spec.max_duration);
                    if spec.prob_per_day[wd as usize] == 0.0 {
                        assert!(!e.active);
                    }
                    if spec.prob_per_day[wd as usize] == 1.0 {
                        assert!(e.active);
                    }
                }
            }
        }
    }
}

mod sim_schedule {
    use cbrl_core::sim::*;

    const H: Secs = 3600;

    fn e(a: Activity, s: f64, t: f64) -> QueueEntry {
        QueueEntry::new(a, hours_to_secs(s), hours_to_secs(t))
    }

    #[test]
    fn clean_up_empty() {
        let mut q = Vec::new();
        assert!(clean_up_queue(&mut q, 0).is_empty());
        assert!(q.is_empty());
    }

    #[test]
    fn clean_up_expired() {
        let mut q = vec![e(Activity::Work, 8.0, 18.0)];
        let gone = clean_up_queue(&mut q, 19 * H);
        assert!(q.is_empty());
        assert_eq!(gone.len(), 1);
    }

    #[test]
    fn clean_up_keeps_order() {
        let mut q = vec![e(Activity::Work, 8.0, 18.0), e(Activity::Dinner, 18.5, 19.5)];
        clean_up_queue(&mut q, hours_to_secs(18.25));
        assert_eq!(q, vec![e(Activity::Dinner, 18.5, 19.5)]);

        let mut q = vec![e(Activity::Sleep, -1.0, 6.0), e(Activity::Breakfast, 5.0, 5.5), e(Activity::Work, 5.0, 15.0)];
        clean_up_queue(&mut q, hours_to_secs(5.5));
        assert_eq!(q.iter().map(|e| e.activity).collect::<Vec<_>>(), vec![Activity::Sleep, Activity::Work]);
    }

    #[test]
    fn end_is_exclusive() {
        let mut q = vec![e(Activity::Lunch, 12.0, 12.25)];
        clean_up_queue(&mut q, hours_to_secs(12.25) - 1);
        assert_eq!(q.len(), 1);
        clean_up_queue(&mut q, hours_to_secs(12.25));
        assert!(q.is_empty());
    }

    #[test]
    fn select_priority_switch() {
        let p = UserProfile::workaholic();
        let q = vec![e(Activity::Sleep, -1.0, 6.0), e(Activity::Work, 5.0, 15.0)];
        assert_eq!(select_from_queue(&q, Some(Activity::Sleep), &p), Some(Activity::Work));
    }

    #[test]
    fn select_idle_and_single() {
        let p = UserProfile::retiree();
        assert_eq!(select_from_queue(&[], None, &p), None);
        assert_eq!(select_from_queue(&[], Some(Activity::Lunch), &p), None);
        let q = vec![e(Activity::Lunch, 12.0, 12.5)];
        assert_eq!(select_from_queue(&q, None, &p), Some(Activity::Lunch));
    }

    #[test]
    fn select_continues_current() {
        let p = UserProfile::arnold();
        let q = vec![e(Activity::Lunch, 12.0, 12.5), e(Activity::WorkOut, 12.1, 13.0)];
        assert_eq!(select_from_queue(&q, Some(Activity::Lunch), &p), Some(Activity::Lunch));
        // current no longer queued -> earliest inserted
        let q = vec![e(Activity::Dinner, 19.0, 20.0), e(Activity::WorkOut, 19.5, 20.5)];
        assert_eq!(select_from_queue(&q, Some(Activity::Lunch), &p), Some(Activity::Dinner));
        // work never yields to sleep
        let q = vec![e(Activity::Work, 9.0, 17.0), e(Activity::Sleep, 10.0, 18.0)];
        assert_eq!(select_from_queue(&q, Some(Activity::Work), &p), Some(Activity::Work));
    }
}

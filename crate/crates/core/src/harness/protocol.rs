use rayon::prelude::*;

use crate::cluster::{
    cluster_purity, partition_users, vectorize_trace, ClusterSettings, Partition, PurityReport, Strategy, TraceVector,
    TRACE_STEPS,
};
use crate::config::{ExperimentConfig, Learner, RunId};
use crate::harness::learner::GroupLearner;
use crate::harness::warmup::{run_warmup, spawn_users, Warmup};
use crate::harness::{stream, HarnessError, Stream};
use crate::rl::{epsilon_greedy, Action, Experience};
use crate::sim::{HourOutcome, ProfileKind, RewardKind, SimUser};
use crate::stats::{wilcoxon_signed_rank, WilcoxonResult, MIN_PAIRS};

/// Counts of reward events by kind, plus interventions sent.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EventTally {
    pub sends: usize,
    pub acceptances: usize,
    pub rejections: usize,
    pub completions: usize,
    pub penalties: usize,
}

impl EventTally {
    pub(crate) fn add(&mut self, out: &HourOutcome) {
        self.sends += usize::from(out.response.is_some());
        for e in &out.events {
            match e.kind {
                RewardKind::Acceptance => self.acceptances += 1,
                RewardKind::Rejection => self.rejections += 1,
                RewardKind::WorkoutCompletion => self.completions += 1,
                RewardKind::FatiguePenalty => self.penalties += 1,
            }
        }
    }

    pub fn merge(&mut self, other: &EventTally) {
        self.sends += other.sends;
        self.acceptances += other.acceptances;
        self.rejections += other.rejections;
        self.completions += other.completions;
        self.penalties += other.penalties;
    }
}

/// Simulates one hour of `user`, sending an intervention if asked.
pub(crate) fn simulate_hour(user: &mut SimUser, send: bool) -> Result<(Experience, HourOutcome), HarnessError> {
    let s = user.observe();
    let out = user.step_hour(send)?;
    let action = if send { Action::Send } else { Action::Wait };
    Ok((Experience { s, action, reward: out.reward, next: user.observe() }, out))
}

/// Metrics of one learning day of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricsRecord {
    pub run: RunId,
    /// Learning-phase day, from 0.
    pub day: u32,
    /// Reward summed over the day, per user.
    pub user_rewards: Vec<f64>,
    /// Mean over users of the daily reward.
    pub avg_daily_reward: f64,
    /// Running mean of `avg_daily_reward` up to and including this day.
    pub cumulative_avg: f64,
    /// Mean daily reward per profile, in [`ProfileKind::ALL`] order; `None`
    /// for profiles without users.
    pub per_profile: [Option<f64>; 3],
}

fn mean(xs: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = xs.into_iter().fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Running mean of a series.
pub fn cumulative_average(daily: &[f64]) -> Vec<f64> {
    let mut sum = 0.0;
    daily
        .iter()
        .enumerate()
        .map(|(i, x)| {
            sum += x;
            sum / (i + 1) as f64
        })
        .collect()
}

/// Mean over users and days of the per-user daily reward.
pub fn average_daily_reward(records: &[MetricsRecord]) -> Option<f64> {
    mean(records.iter().flat_map(|r| r.user_rewards.iter().copied()))
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub id: RunId,
    pub partition: Partition,
    pub records: Vec<MetricsRecord>,
    /// Learning-phase experiences per user.
    pub traces: Vec<Vec<Experience>>,
    pub tally: EventTally,
    /// Composition of the discovered clusters (cluster strategy only).
    pub purity: Option<PurityReport>,
    /// Nightly LSPI fits that stopped at the iteration cap.
    pub unconverged_fits: usize,
}

impl RunOutcome {
    pub fn daily_averages(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.avg_daily_reward).collect()
    }

    pub fn average_daily_reward(&self) -> f64 {
        average_daily_reward(&self.records).unwrap_or(0.0)
    }

    /// Average daily reward over the run for one profile.
    pub fn profile_average(&self, kind: ProfileKind) -> Option<f64> {
        mean(self.records.iter().filter_map(|r| r.per_profile[kind.index()]))
    }
}

/// Runs the learning phase for one learner over a partition of the users,
/// one learner state per group.
pub fn run_learning(
    config: &ExperimentConfig,
    id: RunId,
    warmup: &Warmup,
    partition: Partition,
) -> Result<RunOutcome, HarnessError> {
    let mut users = warmup.users.clone();
    let n = users.len();
    if partition.group_of.len() != n {
        return Err(HarnessError::Invalid(format!("partition covers {} of {n} users", partition.group_of.len())));
    }
    let mut learners = Vec::with_capacity(partition.len());
    for (g, members) in partition.groups.iter().enumerate() {
        let traces: Vec<&[Experience]> = members.iter().map(|&u| warmup.traces[u].as_slice()).collect();
        learners.push(match id.learner {
            Learner::QLearning => {
                GroupLearner::tabular(&traces, config.qlearning, stream(config.seed, Stream::LearnerInit, g as u64))
            }
            Learner::Lspi => GroupLearner::linear(&traces, config.lspi)?,
        });
    }
    let mut explore: Vec<_> = (0..n).map(|u| stream(config.seed, Stream::Explore, u as u64)).collect();
    let days = config.learning_days;
    let mut traces = vec![Vec::with_capacity(days as usize * 24); n];
    let mut tally = EventTally::default();
    let mut records = Vec::with_capacity(days as usize);
    let mut cumulative = 0.0;
    let mut hour_batches: Vec<Vec<Experience>> = vec![Vec::new(); partition.len()];
    for day in 0..days {
        for user in users.iter_mut() {
            let plan = user.plan_day();
            user.begin_day(plan)?;
        }
        let mut user_rewards = vec![0.0; n];
        for _hour in 0..24 {
            let mut actions = Vec::with_capacity(n);
            for (u, user) in users.iter().enumerate() {
                let learner = &mut learners[partition.group_of[u]];
                let values = learner.values(&user.observe())?;
                actions.push(epsilon_greedy(values, learner.epsilon(), &mut explore[u]));
            }
            for (u, user) in users.iter_mut().enumerate() {
                let (e, out) = simulate_hour(user, actions[u].is_send())?;
                tally.add(&out);
                user_rewards[u] += e.reward;
                traces[u].push(e);
                hour_batches[partition.group_of[u]].push(e);
            }
            for (learner, batch) in learners.iter_mut().zip(hour_batches.iter_mut()) {
                learner.observe_hour(batch, day)?;
                batch.clear();
            }
        }
        for learner in learners.iter_mut() {
            learner.end_of_day()?;
        }
        let avg = mean(user_rewards.iter().copied()).unwrap_or(0.0);
        cumulative += avg;
        let per_profile =
            ProfileKind::ALL.map(|k| mean((0..n).filter(|&u| warmup.profiles[u] == k).map(|u| user_rewards[u])));
        records.push(MetricsRecord {
            run: id,
            day,
            user_rewards,
            avg_daily_reward: avg,
            cumulative_avg: cumulative / f64::from(day + 1),
            per_profile,
        });
    }
    let purity = partition.assignment.as_ref().map(|a| cluster_purity(&a.labels, &warmup.profiles));
    let unconverged_fits = learners.iter().map(GroupLearner::unconverged_fits).sum();
    Ok(RunOutcome { id, partition, records, traces, tally, purity, unconverged_fits })
}

/// Wilcoxon comparison of two runs' daily average rewards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PairwiseTest {
    pub a: RunId,
    pub b: RunId,
    pub mean_a: f64,
    pub mean_b: f64,
    pub result: WilcoxonResult,
}

#[derive(Debug)]
pub struct ProtocolOutcome {
    pub config: ExperimentConfig,
    pub warmup: Warmup,
    /// Clustering of the warm-up traces, shared by all cluster runs.
    pub clustering: Option<Partition>,
    /// Completed runs in the requested order.
    pub runs: Vec<RunOutcome>,
    pub failures: Vec<HarnessError>,
    pub tests: Vec<PairwiseTest>,
}

impl ProtocolOutcome {
    pub fn run(&self, id: RunId) -> Option<&RunOutcome> {
        self.runs.iter().find(|r| r.id == id)
    }
}

/// Clusters users on the last week of their traces. This is the clustering
/// the protocol uses for a given seed.
pub fn cluster_traces(
    traces: &[Vec<Experience>],
    settings: &ClusterSettings,
    seed: u64,
) -> Result<Partition, HarnessError> {
    let vectors = traces
        .iter()
        .map(|t| {
            let from = t.len().checked_sub(TRACE_STEPS).ok_or_else(|| {
                HarnessError::Invalid(format!("trace of {} steps is shorter than {TRACE_STEPS}", t.len()))
            })?;
            Ok(vectorize_trace(&t[from..])?)
        })
        .collect::<Result<Vec<TraceVector>, HarnessError>>()?;
    let mut rng = stream(seed, Stream::Clustering, 0);
    Ok(partition_users(Strategy::Cluster, vectors.len(), Some(&vectors), None, settings, &mut rng)?)
}

/// Warm-up once, then every configured run from the same post-warm-up user
/// state. Runs execute in parallel; a failing run is reported in
/// `failures` without affecting the others.
pub fn run_protocol(config: &ExperimentConfig) -> Result<ProtocolOutcome, HarnessError> {
    config.validate()?;
    let warmup = run_warmup(spawn_users(config), config.warmup_days, config.warmup_hours, config.seed)?;
    let needs_clusters = config.runs.iter().any(|r| r.strategy == Strategy::Cluster);
    let clustering =
        if needs_clusters { Some(cluster_traces(&warmup.traces, &config.clustering, config.seed)?) } else { None };
    let results: Vec<Result<RunOutcome, HarnessError>> = config
        .runs
        .par_iter()
        .map(|&id| {
            let partition = match (id.strategy, &clustering) {
                (Strategy::Cluster, Some(p)) => p.clone(),
                (s, _) => {
                    // the fixed partitions draw nothing from this generator
                    let mut rng = stream(config.seed, Stream::Clustering, 1);
                    partition_users(s, warmup.users.len(), None, Some(&warmup.profiles), &config.clustering, &mut rng)?
                }
            };
            run_learning(config, id, &warmup, partition)
        })
        .zip(config.runs.par_iter())
        .map(|(r, &id)| r.map_err(|e| HarnessError::Run { run: id, source: Box::new(e) }))
        .collect();
    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for r in results {
        match r {
            Ok(run) => runs.push(run),
            Err(e) => failures.push(e),
        }
    }
    let mut tests = Vec::new();
    if config.learning_days as usize >= MIN_PAIRS {
        for (i, a) in runs.iter().enumerate() {
            for b in &runs[i + 1..] {
                let (da, db) = (a.daily_averages(), b.daily_averages());
                let result = wilcoxon_signed_rank(&da, &db)?;
                tests.push(PairwiseTest {
                    a: a.id,
                    b: b.id,
                    mean_a: a.average_daily_reward(),
                    mean_b: b.average_daily_reward(),
                    result,
                });
            }
        }
    }
    Ok(ProtocolOutcome { config: config.clone(), warmup, clustering, runs, failures, tests })
}

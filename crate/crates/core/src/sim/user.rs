//! Simulated users: executing a day plan hour by hour, responding to
//! interventions, workout completion and fatigue.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::rl::Observation;
use crate::sim::plan::{generate_day_plan, uniform, DayPlan};
use crate::sim::profile::{Activity, UserProfile, MAX_FATIGUE};
use crate::sim::schedule::{Due, DueKind, QueueEntry, Schedule, Segment};
use crate::sim::{hours_to_secs, Secs, SimError, DAY, HOUR};

pub const ACCEPTANCE_REWARD: f64 = 1.0;
pub const REJECTION_REWARD: f64 = -0.5;
/// Completion reward per hour of exercise; a 30 minute workout earns 1.0.
pub const COMPLETION_REWARD_PER_HOUR: f64 = 2.0;
pub const FATIGUE_PENALTY_PER_LEVEL: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewardKind {
    Acceptance,
    Rejection,
    WorkoutCompletion,
    FatiguePenalty,
}

impl RewardKind {
    pub fn name(self) -> &'static str {
        match self {
            RewardKind::Acceptance => "acceptance",
            RewardKind::Rejection => "rejection",
            RewardKind::WorkoutCompletion => "workout_completion",
            RewardKind::FatiguePenalty => "fatigue_penalty",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardEvent {
    pub user: usize,
    /// Seconds since the start of the simulation.
    pub time: u64,
    /// Day and hour the event is credited to.
    pub day: u32,
    pub hour: u8,
    pub kind: RewardKind,
    pub value: f64,
}

/// Workout length after fatigue attenuation: unchanged up to the threshold,
/// divided by the square root of the fatigue level above it.
pub fn effective_workout_duration(base_duration: f64, fatigue: u8, threshold: u8) -> f64 {
    if fatigue <= threshold {
        base_duration
    } else {
        base_duration / f64::from(fatigue).sqrt()
    }
}

pub fn workout_completion_reward(duration_hours: f64) -> f64 {
    COMPLETION_REWARD_PER_HOUR * duration_hours
}

/// Result of simulating one hour.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct HourOutcome {
    /// `Some(accepted)` when an intervention was sent this hour.
    pub response: Option<bool>,
    pub reward: f64,
    pub events: Vec<RewardEvent>,
}

#[derive(Clone, Debug)]
pub struct SimUser {
    id: usize,
    profile: Arc<UserProfile>,
    agent_t_plan_min: f64,
    fatigue: u8,
    worked_out_today: bool,
    workouts_today: u32,
    day: u32,
    hour: u8,
    day_open: bool,
    closed_day: Option<u32>,
    schedule: Schedule,
    last_hour: [bool; 6],
    today: Option<DayPlan>,
    rng: ChaCha8Rng,
    segments: Option<Vec<Segment>>,
}

impl SimUser {
    /// Spawns a user. The agent's planning offset is jittered once here and
    /// the previous night's sleep is placed in the queue.
    pub fn new(id: usize, profile: Arc<UserProfile>, mut rng: ChaCha8Rng) -> Self {
        let planner = profile.planner;
        let jitter = if planner.t_plan_sd > 0.0 {
            Normal::new(0.0, planner.t_plan_sd).expect("validated sd").sample(&mut rng)
        } else {
            0.0
        };
        let agent_t_plan_min = (planner.t_plan_min + jitter).max(0.0);
        let mut schedule = Schedule::default();
        if let Some(spec) = profile.spec(Activity::Sleep) {
            let start = uniform(&mut rng, spec.early_start, spec.late_start);
            let duration = uniform(&mut rng, spec.min_duration, spec.max_duration);
            let end = hours_to_secs(start) + hours_to_secs(duration) - DAY;
            if end > 0 && spec.prob_per_day[6] > 0.0 {
                schedule.queue.push(QueueEntry::new(Activity::Sleep, hours_to_secs(start) - DAY, end));
            }
        }
        SimUser {
            id,
            profile,
            agent_t_plan_min,
            fatigue: 0,
            worked_out_today: false,
            workouts_today: 0,
            day: 0,
            hour: 0,
            day_open: false,
            closed_day: None,
            schedule,
            last_hour: [false; 6],
            today: None,
            rng,
            segments: None,
        }
    }

    /// Convenience constructor seeding the user's private generator.
    pub fn with_seed(id: usize, profile: Arc<UserProfile>, seed: u64) -> Self {
        Self::new(id, profile, ChaCha8Rng::seed_from_u64(seed))
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn profile(&self) -> &UserProfile {
        &self.profile
    }

    pub fn agent_t_plan_min(&self) -> f64 {
        self.agent_t_plan_min
    }

    pub fn fatigue(&self) -> u8 {
        self.fatigue
    }

    pub fn worked_out_today(&self) -> bool {
        self.worked_out_today
    }

    pub fn workouts_today(&self) -> u32 {
        self.workouts_today
    }

    /// Day currently simulated (or next to be begun).
    pub fn day(&self) -> u32 {
        self.day
    }

    pub fn weekday(&self) -> u8 {
        (self.day % 7) as u8
    }

    /// Next hour to simulate.
    pub fn hour(&self) -> u8 {
        self.hour
    }

    pub fn current_activity(&self) -> Option<Activity> {
        self.schedule.current
    }

    pub fn queue(&self) -> &[QueueEntry] {
        &self.schedule.queue
    }

    pub fn today(&self) -> Option<&DayPlan> {
        self.today.as_ref()
    }

    pub fn has_pending_workout(&self) -> bool {
        self.schedule.has_workout()
    }

    /// Records activity segments from now on (used for invariant checks).
    pub fn record_segments(&mut self, on: bool) {
        self.segments = on.then(Vec::new);
    }

    pub fn take_segments(&mut self) -> Vec<Segment> {
        self.segments.as_mut().map(std::mem::take).unwrap_or_default()
    }

    pub fn observe(&self) -> Observation {
        Observation {
            hour: self.hour,
            weekday: self.weekday(),
            worked_out_today: self.worked_out_today,
            fatigue: self.fatigue,
            last_hour: self.last_hour,
        }
    }

    /// Draws today's plan from the user's own generator.
    pub fn plan_day(&mut self) -> DayPlan {
        let weekday = self.weekday();
        generate_day_plan(&self.profile, weekday, &mut self.rng)
    }

    /// Installs today's plan and processes the first tick of the day.
    pub fn begin_day(&mut self, plan: DayPlan) -> Result<(), SimError> {
        if self.day_open {
            return Err(SimError::DayAlreadyOpen(self.day));
        }
        if plan.weekday != self.weekday() {
            return Err(SimError::WrongWeekday { expected: self.weekday(), got: plan.weekday });
        }
        for e in plan.entries.iter().filter(|e| e.active) {
            self.schedule.due.push(Due {
                activity: e.activity,
                start: e.start_secs(),
                kind: DueKind::Planned { end: e.end_secs() },
            });
        }
        self.today = Some(plan);
        self.day_open = true;
        self.hour = 0;
        // Completions at tick 0 were already credited to the previous day.
        let _ = self.tick(0, 0);
        Ok(())
    }

    fn workout_duration_fn(&self) -> impl Fn(f64) -> f64 + Copy {
        let fatigue = self.fatigue;
        let threshold = self.profile.fatigue_threshold;
        move |base| effective_workout_duration(base, fatigue, threshold)
    }

    fn tick(&mut self, t: Secs, hour: u8) -> Vec<RewardEvent> {
        let f = self.workout_duration_fn();
        let expired = self.schedule.process_tick(t, &self.profile, f);
        let mut events = Vec::new();
        for e in expired.iter().filter(|e| e.activity == Activity::WorkOut && e.performed > 0) {
            let hours = e.performed as f64 / HOUR as f64;
            self.fatigue = (self.fatigue + 1).min(MAX_FATIGUE);
            self.worked_out_today = true;
            self.workouts_today += 1;
            events.push(self.event(e.end, hour, RewardKind::WorkoutCompletion, workout_completion_reward(hours)));
        }
        events
    }

    fn event(&self, t: Secs, hour: u8, kind: RewardKind, value: f64) -> RewardEvent {
        let time = (i64::from(self.day) * DAY + t).max(0) as u64;
        RewardEvent { user: self.id, time, day: self.day, hour, kind, value }
    }

    /// Earliest start of an idle gap long enough for the shortest workout,
    /// starting inside the planning window and within today.
    pub fn find_gap(&self, t_send: Secs) -> Option<Secs> {
        let planner = self.profile.planner;
        let min_len = hours_to_secs(self.profile.work_out().min_duration);
        let window_start = t_send + hours_to_secs(self.agent_t_plan_min);
        let window_end = window_start + hours_to_secs(planner.t_plan_duration);
        let latest = (DAY - min_len).min(window_end);
        if window_start > latest {
            return None;
        }
        let f = self.workout_duration_fn();
        self.schedule
            .project_idle(t_send, DAY, &self.profile, f)
            .into_iter()
            .map(|(a, b)| (a.max(window_start), b))
            .find(|&(s, b)| s <= latest && b - s >= min_len)
            .map(|(s, _)| s)
    }

    /// Decides whether an intervention sent at `t_send` (seconds of day) is
    /// accepted; on acceptance a workout is scheduled at the earliest gap.
    pub fn handle_intervention(&mut self, t_send: Secs) -> bool {
        let profile = Arc::clone(&self.profile);
        if !profile.acceptance_rule.allows(self.schedule.current) {
            return false;
        }
        if let Some((from, to)) = profile.acceptance_window {
            if !(hours_to_secs(from)..hours_to_secs(to)).contains(&t_send) {
                return false;
            }
        }
        let committed = self.worked_out_today || self.workouts_today > 0 || self.schedule.has_workout();
        if committed && self.rng.random::<f64>() >= profile.second_workout_prob {
            return false;
        }
        let Some(start) = self.find_gap(t_send) else {
            return false;
        };
        let spec = profile.work_out();
        let base_hours = uniform(&mut self.rng, spec.min_duration, spec.max_duration);
        self.schedule.due.push(Due { activity: Activity::WorkOut, start, kind: DueKind::Workout { base_hours } });
        if start <= t_send {
            let f = self.workout_duration_fn();
            self.schedule.process_tick(t_send, &profile, f);
        }
        true
    }

    /// Simulates the next hour, sending an intervention at its start if asked.
    /// After hour 23 the day is closed and the user rolls over to the next day.
    pub fn step_hour(&mut self, send: bool) -> Result<HourOutcome, SimError> {
        if !self.day_open {
            return Err(SimError::DayNotOpen(self.day));
        }
        let hour = self.hour;
        let t0 = Secs::from(hour) * HOUR;
        let t_end = t0 + HOUR;
        let mut out = HourOutcome::default();
        if send {
            let accepted = self.handle_intervention(t0);
            let (kind, value) = if accepted {
                (RewardKind::Acceptance, ACCEPTANCE_REWARD)
            } else {
                (RewardKind::Rejection, REJECTION_REWARD)
            };
            out.events.push(self.event(t0, hour, kind, value));
            out.response = Some(accepted);
        }
        let mut flags = [false; 6];
        let mut t = t0;
        while t < t_end {
            let next = self.schedule.next_event(t, t_end);
            let current = self.schedule.current;
            if let Some(a) = current {
                flags[a.index()] = true;
            }
            self.schedule.credit_current(next - t);
            if let Some(segs) = self.segments.as_mut() {
                let from = i64::from(self.day) * DAY + t;
                let to = i64::from(self.day) * DAY + next;
                match segs.last_mut() {
                    Some(last) if last.activity == current && last.to == from => last.to = to,
                    _ => segs.push(Segment { activity: current, from, to }),
                }
            }
            t = next;
            let events = self.tick(t, hour);
            out.events.extend(events);
        }
        self.last_hour = flags;
        if hour == 23 {
            if let Some(penalty) = self.end_of_day_update()? {
                out.events.push(penalty);
            }
            self.schedule.roll_over(DAY);
            self.day += 1;
            self.hour = 0;
            self.day_open = false;
            self.today = None;
        } else {
            self.hour += 1;
        }
        out.reward = out.events.iter().map(|e| e.value).sum();
        Ok(out)
    }

    /// Daily fatigue bookkeeping: the streak resets after a day without a
    /// workout, and fatigue above the threshold costs a small penalty.
    pub fn end_of_day_update(&mut self) -> Result<Option<RewardEvent>, SimError> {
        if self.closed_day == Some(self.day) {
            return Err(SimError::DayAlreadyClosed(self.day));
        }
        self.closed_day = Some(self.day);
        if self.workouts_today == 0 {
            self.fatigue = 0;
        } else {
            self.fatigue = self.fatigue.min(MAX_FATIGUE);
        }
        self.worked_out_today = false;
        self.workouts_today = 0;
        let excess = self.fatigue.saturating_sub(self.profile.fatigue_threshold);
        Ok((excess > 0).then(|| {
            self.event(DAY - 1, 23, RewardKind::FatiguePenalty, -FATIGUE_PENALTY_PER_LEVEL * f64::from(excess))
        }))
    }
}

/// Everything observed while simulating one day.
#[derive(Clone, Debug, PartialEq)]
pub struct DayOutcome {
    /// Observation at the start of each hour, plus the first observation of
    /// the next day.
    pub observations: Vec<Observation>,
    pub sent: [bool; 24],
    pub hourly_rewards: [f64; 24],
    pub events: Vec<RewardEvent>,
}

/// Runs a full day with interventions sent at the given hours.
pub fn run_day(user: &mut SimUser, plan: DayPlan, intervention_hours: &[u8]) -> Result<DayOutcome, SimError> {
    user.begin_day(plan)?;
    let mut observations = Vec::with_capacity(25);
    let mut sent = [false; 24];
    let mut hourly_rewards = [0.0; 24];
    let mut events = Vec::new();
    for h in 0..24u8 {
        observations.push(user.observe());
        let send = intervention_hours.contains(&h);
        sent[h as usize] = send;
        let out = user.step_hour(send)?;
        hourly_rewards[h as usize] = out.reward;
        events.extend(out.events);
    }
    observations.push(user.observe());
    Ok(DayOutcome { observations, sent, hourly_rewards, events })
}

//! Static per-type user parameters: activity prototypes, planning horizon,
//! acceptance behaviour and fatigue settings.

use serde::{Deserialize, Serialize};

use crate::sim::SimError;

/// The six schedulable activities, in the fixed order used by observation flags.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activity {
    Sleep,
    Breakfast,
    Lunch,
    Dinner,
    Work,
    WorkOut,
}

impl Activity {
    pub const ALL: [Activity; 6] =
        [Activity::Sleep, Activity::Breakfast, Activity::Lunch, Activity::Dinner, Activity::Work, Activity::WorkOut];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Activity::Sleep => "sleep",
            Activity::Breakfast => "breakfast",
            Activity::Lunch => "lunch",
            Activity::Dinner => "dinner",
            Activity::Work => "work",
            Activity::WorkOut => "work_out",
        }
    }
}

impl std::fmt::Display for Activity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Prototype of one activity. Times are fractional hours of the day.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActivitySpec {
    pub name: Activity,
    pub early_start: f64,
    pub late_start: f64,
    pub min_duration: f64,
    pub max_duration: f64,
    /// Kept for completeness of the prototype; durations are drawn uniformly.
    #[serde(default)]
    pub sd_duration: f64,
    /// Activities that pre-empt this one when they become due.
    #[serde(default)]
    pub priority_over_this: Vec<Activity>,
    /// Probability of performing the activity, Monday..Sunday.
    pub prob_per_day: [f64; 7],
}

impl ActivitySpec {
    fn new(
        name: Activity,
        start: (f64, f64),
        duration: (f64, f64),
        priority_over_this: &[Activity],
        prob_per_day: [f64; 7],
    ) -> Self {
        ActivitySpec {
            name,
            early_start: start.0,
            late_start: start.1,
            min_duration: duration.0,
            max_duration: duration.1,
            sd_duration: 0.0,
            priority_over_this: priority_over_this.to_vec(),
            prob_per_day,
        }
    }

    pub fn validate(&self) -> Result<(), SimError> {
        let bad = |what: &str| Err(SimError::InvalidProfile(format!("{}: {what}", self.name)));
        if !(self.early_start.is_finite() && self.late_start.is_finite()) {
            return bad("start times must be finite");
        }
        if !(0.0..24.0).contains(&self.early_start) || !(0.0..24.0).contains(&self.late_start) {
            return bad("start times must lie in [0, 24)");
        }
        if self.early_start > self.late_start {
            return bad("early_start > late_start");
        }
        if !(self.min_duration > 0.0 && self.min_duration <= self.max_duration) {
            return bad("durations must satisfy 0 < min_duration <= max_duration");
        }
        if self.max_duration > 24.0 {
            return bad("max_duration exceeds a day");
        }
        if !(self.sd_duration >= 0.0) {
            return bad("sd_duration must be non-negative");
        }
        if self.prob_per_day.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return bad("probabilities must lie in [0, 1]");
        }
        Ok(())
    }
}

/// Planning horizon of a user: a prompted workout must fit in a gap starting
/// between `t_plan_min` and `t_plan_min + t_plan_duration` hours after the prompt.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlannerSpec {
    pub t_plan_min: f64,
    pub t_plan_duration: f64,
    /// Spread of `t_plan_min` across spawned agents.
    pub t_plan_sd: f64,
}

impl PlannerSpec {
    pub const CHRONIC: PlannerSpec = PlannerSpec { t_plan_min: 3.0, t_plan_duration: 21.0, t_plan_sd: 0.1 };
    pub const SPONTANEOUS: PlannerSpec = PlannerSpec { t_plan_min: 0.0, t_plan_duration: 1.0, t_plan_sd: 0.1 };
    pub const MIXED: PlannerSpec = PlannerSpec { t_plan_min: 0.0, t_plan_duration: 24.0, t_plan_sd: 0.1 };

    pub fn validate(&self) -> Result<(), SimError> {
        if !(self.t_plan_min >= 0.0 && self.t_plan_duration > 0.0 && self.t_plan_sd >= 0.0) {
            return Err(SimError::InvalidProfile(format!("invalid planner {self:?}")));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProfileKind {
    Workaholic,
    Arnold,
    Retiree,
}

impl ProfileKind {
    pub const ALL: [ProfileKind; 3] = [ProfileKind::Workaholic, ProfileKind::Arnold, ProfileKind::Retiree];

    pub fn name(self) -> &'static str {
        match self {
            ProfileKind::Workaholic => "workaholic",
            ProfileKind::Arnold => "arnold",
            ProfileKind::Retiree => "retiree",
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl std::fmt::Display for ProfileKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ProfileKind {
    type Err = SimError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ProfileKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| SimError::InvalidProfile(format!("unknown profile `{s}`")))
    }
}

/// Which current activity allows a user to accept an intervention.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcceptanceRule {
    LunchOrIdle,
    IdleOnly,
    Always,
}

impl AcceptanceRule {
    pub fn allows(self, current: Option<Activity>) -> bool {
        match self {
            AcceptanceRule::Always => true,
            AcceptanceRule::IdleOnly => current.is_none(),
            AcceptanceRule::LunchOrIdle => matches!(current, None | Some(Activity::Lunch)),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UserProfile {
    #[serde(rename = "type")]
    pub kind: ProfileKind,
    pub activities: Vec<ActivitySpec>,
    pub planner: PlannerSpec,
    pub acceptance_rule: AcceptanceRule,
    /// Hours of the day `[from, to)` in which prompts may be accepted.
    /// Unset for the built-in profiles, which rely on `acceptance_rule` only.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub acceptance_window: Option<(f64, f64)>,
    pub fatigue_threshold: u8,
    pub second_workout_prob: f64,
}

pub const MAX_FATIGUE: u8 = 7;

impl UserProfile {
    pub fn spec(&self, activity: Activity) -> Option<&ActivitySpec> {
        self.activities.iter().find(|a| a.name == activity)
    }

    /// Workout prototype. Every valid profile carries one.
    pub fn work_out(&self) -> &ActivitySpec {
        self.spec(Activity::WorkOut).expect("validated profile has a work_out activity")
    }

    pub fn has_priority_over(&self, current: Activity, candidate: Activity) -> bool {
        self.spec(current).is_some_and(|s| s.priority_over_this.contains(&candidate))
    }

    pub fn validate(&self) -> Result<(), SimError> {
        for spec in &self.activities {
            spec.validate()?;
        }
        for (i, spec) in self.activities.iter().enumerate() {
            if self.activities[..i].iter().any(|s| s.name == spec.name) {
                return Err(SimError::InvalidProfile(format!("{}: duplicate activity {}", self.kind, spec.name)));
            }
        }
        if self.spec(Activity::WorkOut).is_none() {
            return Err(SimError::InvalidProfile(format!("{}: missing work_out activity", self.kind)));
        }
        self.planner.validate()?;
        if self.fatigue_threshold > MAX_FATIGUE {
            return Err(SimError::InvalidProfile(format!("{}: fatigue_threshold > {MAX_FATIGUE}", self.kind)));
        }
        if !(0.0..=1.0).contains(&self.second_workout_prob) {
            return Err(SimError::InvalidProfile(format!("{}: second_workout_prob outside [0, 1]", self.kind)));
        }
        if let Some((from, to)) = self.acceptance_window {
            if !(0.0 <= from && from < to && to <= 24.0) {
                return Err(SimError::InvalidProfile(format!("{}: bad acceptance_window", self.kind)));
            }
        }
        Ok(())
    }

    pub fn builtin(kind: ProfileKind) -> UserProfile {
        match kind {
            ProfileKind::Workaholic => Self::workaholic(),
            ProfileKind::Arnold => Self::arnold(),
            ProfileKind::Retiree => Self::retiree(),
        }
    }

    pub fn builtins() -> Vec<UserProfile> {
        ProfileKind::ALL.into_iter().map(Self::builtin).collect()
    }

    pub fn workaholic() -> UserProfile {
        use Activity::*;
        const EVERY: [f64; 7] = [1.0; 7];
        UserProfile {
            kind: ProfileKind::Workaholic,
            activities: vec![
                ActivitySpec::new(Sleep, (23.0, 23.0), (6.0, 7.0), &[Work], EVERY),
                ActivitySpec::new(Breakfast, (7.0, 7.5), (0.25, 0.25), &[Work], EVERY),
                ActivitySpec::new(Lunch, (12.0, 12.0), (0.25, 0.25), &[], EVERY),
                ActivitySpec::new(Dinner, (18.0, 20.0), (0.5, 1.0), &[], EVERY),
                ActivitySpec::new(Work, (8.0, 9.0), (10.0, 11.0), &[], [1.0, 1.0, 1.0, 1.0, 1.0, 0.8, 0.0]),
                ActivitySpec::new(WorkOut, (19.5, 20.5), (0.5, 1.0), &[], [0.0; 7]),
            ],
            planner: PlannerSpec::CHRONIC,
            acceptance_rule: AcceptanceRule::LunchOrIdle,
            acceptance_window: None,
            fatigue_threshold: 2,
            second_workout_prob: 0.1,
        }
    }

    pub fn arnold() -> UserProfile {
        use Activity::*;
        const EVERY: [f64; 7] = [1.0; 7];
        UserProfile {
            kind: ProfileKind::Arnold,
            activities: vec![
                ActivitySpec::new(Sleep, (22.0, 23.0), (8.0, 9.0), &[Work], EVERY),
                ActivitySpec::new(Breakfast, (8.0, 9.0), (0.25, 0.25), &[Work], EVERY),
                ActivitySpec::new(Lunch, (12.0, 13.5), (0.25, 0.5), &[], EVERY),
                ActivitySpec::new(Dinner, (19.0, 20.5), (0.5, 1.0), &[], EVERY),
                ActivitySpec::new(Work, (9.0, 9.5), (8.0, 8.0), &[], [1.0, 1.0, 0.0, 1.0, 0.0, 0.0, 0.0]),
                ActivitySpec::new(WorkOut, (16.0, 21.0), (1.0, 1.0), &[], [0.0; 7]),
            ],
            planner: PlannerSpec::MIXED,
            acceptance_rule: AcceptanceRule::Always,
            acceptance_window: None,
            fatigue_threshold: 4,
            second_workout_prob: 0.5,
        }
    }

    pub fn retiree() -> UserProfile {
        use Activity::*;
        const EVERY: [f64; 7] = [1.0; 7];
        UserProfile {
            kind: ProfileKind::Retiree,
            activities: vec![
                ActivitySpec::new(Sleep, (22.0, 23.5), (8.0, 10.0), &[Work], EVERY),
                ActivitySpec::new(Breakfast, (7.0, 10.0), (0.5, 0.75), &[Work], EVERY),
                ActivitySpec::new(Lunch, (12.0, 14.0), (0.5, 0.75), &[], EVERY),
                ActivitySpec::new(Dinner, (18.0, 20.0), (0.5, 1.0), &[], EVERY),
                ActivitySpec::new(Work, (8.0, 9.0), (8.0, 8.0), &[], [0.0; 7]),
                ActivitySpec::new(WorkOut, (19.0, 21.5), (0.5, 1.0), &[], [0.0; 7]),
            ],
            planner: PlannerSpec::SPONTANEOUS,
            acceptance_rule: AcceptanceRule::IdleOnly,
            acceptance_window: None,
            fatigue_threshold: 1,
            second_workout_prob: 0.0,
        }
    }
}

//! Daily-activity user simulator.
//!
//! Time inside a day is measured in whole seconds (`Secs`), so schedules are
//! executed at one-second resolution while interventions are decided on the
//! hour.

mod plan;
mod profile;
mod schedule;
mod user;

pub use plan::{generate_day_plan, DayPlan, PlannedActivity};
pub use profile::{AcceptanceRule, Activity, ActivitySpec, PlannerSpec, ProfileKind, UserProfile, MAX_FATIGUE};
pub use schedule::{clean_up_queue, select_from_queue, QueueEntry, Segment};
pub use user::{
    effective_workout_duration, run_day, workout_completion_reward, DayOutcome, HourOutcome, RewardEvent, RewardKind,
    SimUser, ACCEPTANCE_REWARD, COMPLETION_REWARD_PER_HOUR, FATIGUE_PENALTY_PER_LEVEL, REJECTION_REWARD,
};

use thiserror::Error;

pub type Secs = i64;

pub const HOUR: Secs = 3600;
pub const DAY: Secs = 24 * HOUR;

pub fn hours_to_secs(hours: f64) -> Secs {
    (hours * HOUR as f64).round() as Secs
}

#[derive(Debug, Error, PartialEq)]
pub enum SimError {
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("day {0} already begun")]
    DayAlreadyOpen(u32),
    #[error("day {0} has not been begun")]
    DayNotOpen(u32),
    #[error("end-of-day update for day {0} applied twice")]
    DayAlreadyClosed(u32),
    #[error("plan for weekday {got} given on weekday {expected}")]
    WrongWeekday { expected: u8, got: u8 },
}

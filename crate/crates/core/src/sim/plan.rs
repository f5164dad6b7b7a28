use rand::Rng;

use crate::sim::profile::{Activity, UserProfile};
use crate::sim::{hours_to_secs, Secs};

/// One sampled activity for one day.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlannedActivity {
    pub activity: Activity,
    /// Sampled start, hours of day.
    pub start: f64,
    /// Sampled duration, hours.
    pub duration: f64,
    /// Outcome of the per-weekday Bernoulli draw.
    pub active: bool,
}

impl PlannedActivity {
    pub fn start_secs(&self) -> Secs {
        hours_to_secs(self.start)
    }

    pub fn end_secs(&self) -> Secs {
        self.start_secs() + hours_to_secs(self.duration).max(1)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DayPlan {
    pub weekday: u8,
    /// In profile activity order.
    pub entries: Vec<PlannedActivity>,
}

impl DayPlan {
    pub fn get(&self, activity: Activity) -> Option<&PlannedActivity> {
        self.entries.iter().find(|e| e.activity == activity)
    }
}

/// Uniform draw on `[lo, hi]`; collapses to `lo` for a degenerate range.
pub(crate) fn uniform<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    if hi > lo {
        rng.random_range(lo..=hi)
    } else {
        lo
    }
}

/// Samples start, duration and the active flag of every activity in the
/// profile for the given weekday (0 = Monday).
///
/// Draw order per activity is start, duration, flag; the order is part of
/// the reproducibility contract.
pub fn generate_day_plan<R: Rng + ?Sized>(profile: &UserProfile, weekday: u8, rng: &mut R) -> DayPlan {
    assert!(weekday < 7, "weekday out of range: {weekday}");
    let entries = profile
        .activities
        .iter()
        .map(|spec| {
            let start = uniform(rng, spec.early_start, spec.late_start);
            let duration = uniform(rng, spec.min_duration, spec.max_duration);
            let p = spec.prob_per_day[weekday as usize];
            // Always consume the draw so the stream does not depend on p.
            let u: f64 = rng.random();
            PlannedActivity { activity: spec.name, start, duration, active: u < p }
        })
        .collect();
    DayPlan { weekday, entries }
}

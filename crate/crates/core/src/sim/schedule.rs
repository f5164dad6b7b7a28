//! Activity queue and the tick-level state machine that turns a day plan
//! into one current activity per second.
//!
//! Ticks are processed event by event: between two consecutive events
//! (an activity becoming due or a queue entry expiring) the selection is
//! constant, so whole segments are advanced at once with the same result as
//! stepping second by second.

use crate::sim::profile::{Activity, UserProfile};
use crate::sim::{hours_to_secs, Secs};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct QueueEntry {
    pub activity: Activity,
    pub start: Secs,
    pub end: Secs,
    /// Seconds this entry has been the current activity.
    pub performed: Secs,
}

impl QueueEntry {
    pub fn new(activity: Activity, start: Secs, end: Secs) -> Self {
        QueueEntry { activity, start, end, performed: 0 }
    }
}

/// Removes entries whose end time is at or before `t`, preserving the order
/// of the rest. Returns the removed entries in queue order.
pub fn clean_up_queue(queue: &mut Vec<QueueEntry>, t: Secs) -> Vec<QueueEntry> {
    let mut expired = Vec::new();
    queue.retain(|e| {
        if e.end <= t {
            expired.push(*e);
            false
        } else {
            true
        }
    });
    expired
}

/// Picks the activity to perform given the live queue.
///
/// The current activity continues unless a queued activity is listed in its
/// priorities; without a (still queued) current activity the earliest
/// inserted entry wins.
pub fn select_from_queue(queue: &[QueueEntry], current: Option<Activity>, profile: &UserProfile) -> Option<Activity> {
    let first = queue.first()?;
    match current {
        Some(cur) if queue.iter().any(|e| e.activity == cur) => {
            queue.iter().find(|e| profile.has_priority_over(cur, e.activity)).map_or(Some(cur), |e| Some(e.activity))
        }
        _ => Some(first.activity),
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum DueKind {
    Planned {
        end: Secs,
    },
    /// Duration is fixed when the workout starts, from the fatigue level then.
    Workout {
        base_hours: f64,
    },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) struct Due {
    pub activity: Activity,
    pub start: Secs,
    pub kind: DueKind,
}

/// A maximal interval during which one activity (or none) is performed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Segment {
    pub activity: Option<Activity>,
    pub from: Secs,
    pub to: Secs,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Schedule {
    pub queue: Vec<QueueEntry>,
    pub current: Option<Activity>,
    /// Activities that fired their daily draw (and accepted workouts) but
    /// have not started yet, in insertion order.
    pub due: Vec<Due>,
}

impl Schedule {
    /// One iteration of the planning loop at tick `t`: expire, enqueue what
    /// starts now, select. Idempotent for a fixed `t`.
    pub fn process_tick(
        &mut self,
        t: Secs,
        profile: &UserProfile,
        workout_duration: impl Fn(f64) -> f64,
    ) -> Vec<QueueEntry> {
        let expired = clean_up_queue(&mut self.queue, t);
        let mut i = 0;
        while i < self.due.len() {
            if self.due[i].start <= t {
                let due = self.due.remove(i);
                let end = match due.kind {
                    DueKind::Planned { end } => end,
                    DueKind::Workout { base_hours } => due.start + hours_to_secs(workout_duration(base_hours)).max(1),
                };
                if end > t {
                    self.queue.push(QueueEntry::new(due.activity, due.start, end));
                }
            } else {
                i += 1;
            }
        }
        // A switch can expose a further priority; iterate to a fixed point.
        for _ in 0..=Activity::ALL.len() {
            let next = select_from_queue(&self.queue, self.current, profile);
            if next == self.current {
                break;
            }
            self.current = next;
        }
        expired
    }

    /// First tick after `t` at which the queue can change, capped at `limit`.
    pub fn next_event(&self, t: Secs, limit: Secs) -> Secs {
        let due = self.due.iter().map(|d| d.start).filter(|&s| s > t);
        let ends = self.queue.iter().map(|e| e.end).filter(|&e| e > t);
        due.chain(ends).fold(limit, Secs::min)
    }

    /// Credits `secs` of performance to the entry backing the current activity.
    pub fn credit_current(&mut self, secs: Secs) {
        if let Some(cur) = self.current {
            if let Some(e) = self.queue.iter_mut().find(|e| e.activity == cur) {
                e.performed += secs;
            }
        }
    }

    pub fn has_workout(&self) -> bool {
        self.due.iter().any(|d| d.activity == Activity::WorkOut)
            || self.queue.iter().any(|e| e.activity == Activity::WorkOut)
    }

    /// Shifts all times by one day back; called at midnight.
    pub fn roll_over(&mut self, day: Secs) {
        for e in &mut self.queue {
            e.start -= day;
            e.end -= day;
        }
        for d in &mut self.due {
            d.start -= day;
            if let DueKind::Planned { end } = &mut d.kind {
                *end -= day;
            }
        }
    }

    /// Runs the schedule forward from `t` (already processed) to `until`
    /// without interventions and returns the idle intervals.
    pub fn project_idle(
        &self,
        t: Secs,
        until: Secs,
        profile: &UserProfile,
        workout_duration: impl Fn(f64) -> f64 + Copy,
    ) -> Vec<(Secs, Secs)> {
        let mut sim = self.clone();
        let mut idle: Vec<(Secs, Secs)> = Vec::new();
        let mut t = t;
        while t < until {
            let next = sim.next_event(t, until);
            if sim.current.is_none() {
                match idle.last_mut() {
                    Some(last) if last.1 == t => last.1 = next,
                    _ => idle.push((t, next)),
                }
            }
            t = next;
            if t < until {
                sim.process_tick(t, profile, workout_duration);
            }
        }
        idle
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const H: Secs = 3600;

    #[test]
    fn tick_processing_is_idempotent() {
        let p = UserProfile::arnold();
        let mut s = Schedule::default();
        s.due.push(Due { activity: Activity::Lunch, start: 12 * H, kind: DueKind::Planned { end: 13 * H } });
        s.process_tick(12 * H, &p, |d| d);
        let snapshot = (s.queue.clone(), s.current);
        s.process_tick(12 * H, &p, |d| d);
        assert_eq!((s.queue.clone(), s.current), snapshot);
        assert_eq!(s.current, Some(Activity::Lunch));
    }

    #[test]
    fn projection_finds_idle_gaps() {
        let p = UserProfile::arnold();
        let mut s = Schedule::default();
        s.due.push(Due { activity: Activity::Work, start: 9 * H, kind: DueKind::Planned { end: 17 * H } });
        s.due.push(Due { activity: Activity::Dinner, start: 19 * H, kind: DueKind::Planned { end: 20 * H } });
        s.process_tick(8 * H, &p, |d| d);
        let idle = s.project_idle(8 * H, 24 * H, &p, |d| d);
        assert_eq!(idle, vec![(8 * H, 9 * H), (17 * H, 19 * H), (20 * H, 24 * H)]);
    }
}

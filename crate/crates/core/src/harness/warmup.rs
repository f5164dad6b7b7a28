use std::sync::Arc;

use rand::Rng;

use crate::config::ExperimentConfig;
use crate::harness::protocol::{simulate_hour, EventTally};
use crate::harness::{stream, HarnessError, Stream};
use crate::rl::Experience;
use crate::sim::{ProfileKind, SimUser};

/// Users of the experiment, numbered profile by profile, each with its own
/// random stream.
pub fn spawn_users(config: &ExperimentConfig) -> Vec<SimUser> {
    let mut users = Vec::with_capacity(config.n_users());
    for profile in &config.profiles {
        let profile = Arc::new(profile.clone());
        for _ in 0..config.n_per_profile {
            let id = users.len();
            users.push(SimUser::new(id, Arc::clone(&profile), stream(config.seed, Stream::User, id as u64)));
        }
    }
    users
}

#[derive(Clone, Debug)]
pub struct Warmup {
    /// Users as they stand after the warm-up; the learning phase continues
    /// from this state.
    pub users: Vec<SimUser>,
    pub profiles: Vec<ProfileKind>,
    /// Hourly experiences per user, oldest first.
    pub traces: Vec<Vec<Experience>>,
    /// The intervention hour of every user and day.
    pub send_hours: Vec<Vec<u8>>,
    pub tally: EventTally,
}

/// Runs the default policy: one intervention per user and day at an hour
/// drawn uniformly from `hours[0]..=hours[1]`.
pub fn run_warmup(mut users: Vec<SimUser>, days: u32, hours: [u8; 2], seed: u64) -> Result<Warmup, HarnessError> {
    if let Some(u) = users.iter().find(|u| u.day() != 0 || u.hour() != 0) {
        return Err(HarnessError::Invalid(format!("user {} is not fresh", u.id())));
    }
    let mut traces = vec![Vec::with_capacity(days as usize * 24); users.len()];
    let mut send_hours = vec![Vec::with_capacity(days as usize); users.len()];
    let mut tally = EventTally::default();
    for (u, user) in users.iter_mut().enumerate() {
        let mut rng = stream(seed, Stream::Warmup, user.id() as u64);
        for _ in 0..days {
            let send_at = rng.random_range(hours[0]..=hours[1]);
            send_hours[u].push(send_at);
            let plan = user.plan_day();
            user.begin_day(plan)?;
            for h in 0..24u8 {
                let (e, out) = simulate_hour(user, h == send_at)?;
                tally.add(&out);
                traces[u].push(e);
            }
        }
    }
    let profiles = users.iter().map(|u| u.profile().kind).collect();
    Ok(Warmup { users, profiles, traces, send_hours, tally })
}

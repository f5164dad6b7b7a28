use serde::{Deserialize, Serialize};

use crate::rl::RlError;
use crate::sim::{Activity, MAX_FATIGUE};

pub const FEATURE_DIM: usize = 10;

/// What the learner sees of a user at an hourly decision point.
///
/// Doubles as the exact key of the tabular learner.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Observation {
    pub hour: u8,
    pub weekday: u8,
    pub worked_out_today: bool,
    pub fatigue: u8,
    /// Activities performed at any point of the previous hour, in
    /// [`Activity::ALL`] order.
    pub last_hour: [bool; 6],
}

impl Observation {
    pub fn validate(&self) -> Result<(), RlError> {
        if self.hour > 23 || self.weekday > 6 || self.fatigue > MAX_FATIGUE {
            return Err(RlError::InvalidObservation(*self));
        }
        Ok(())
    }

    pub fn did(&self, activity: Activity) -> bool {
        self.last_hour[activity.index()]
    }
}

/// Normalized features: hour/23, weekday/6, worked-out flag, fatigue/7 and
/// the six last-hour activity flags.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FeatureVector(pub [f64; FEATURE_DIM]);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Features followed by a constant 1.
    pub fn with_bias(&self) -> [f64; FEATURE_DIM + 1] {
        let mut out = [1.0; FEATURE_DIM + 1];
        out[..FEATURE_DIM].copy_from_slice(&self.0);
        out
    }
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

pub fn featurize(obs: &Observation) -> Result<FeatureVector, RlError> {
    obs.validate()?;
    let mut f = [0.0; FEATURE_DIM];
    f[0] = f64::from(obs.hour) / 23.0;
    f[1] = f64::from(obs.weekday) / 6.0;
    f[2] = flag(obs.worked_out_today);
    f[3] = f64::from(obs.fatigue) / f64::from(MAX_FATIGUE);
    for (dst, &b) in f[4..].iter_mut().zip(&obs.last_hour) {
        *dst = flag(b);
    }
    Ok(FeatureVector(f))
}

use rand::Rng;
use serde::{Deserialize, Serialize};

/// Binary intervention decision.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    /// No intervention.
    Wait = 0,
    /// Send an intervention.
    Send = 1,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Wait, Action::Send];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Action> {
        match i {
            0 => Some(Action::Wait),
            1 => Some(Action::Send),
            _ => None,
        }
    }

    pub fn is_send(self) -> bool {
        self == Action::Send
    }
}

/// Argmax with first-wins tie breaking: `Wait` on an exact tie.
pub fn greedy(values: [f64; 2]) -> Action {
    if values[1] > values[0] {
        Action::Send
    } else {
        Action::Wait
    }
}

/// With probability `epsilon` a uniformly random action, otherwise greedy.
///
/// Always consumes one uniform draw, plus one more when exploring.
pub fn epsilon_greedy<R: Rng + ?Sized>(values: [f64; 2], epsilon: f64, rng: &mut R) -> Action {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    if rng.random::<f64>() < epsilon {
        if rng.random::<bool>() {
            Action::Send
        } else {
            Action::Wait
        }
    } else {
        greedy(values)
    }
}

//! Tabular Q-learning with backward experience replay.

use std::collections::{HashMap, VecDeque};

use rand::Rng;

use crate::rl::{Action, Experience, Observation};

pub const REPLAY_CAPACITY: usize = 250;

/// Initial Q-value: uniform on [0, 1] for `Wait`, on [-1, 0] for `Send`.
pub fn q_init<R: Rng + ?Sized>(rng: &mut R, action: Action) -> f64 {
    let u: f64 = rng.random();
    match action {
        Action::Wait => u,
        Action::Send => -u,
    }
}

/// Q-values keyed by the raw observation.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct QTable {
    values: HashMap<Observation, [f64; 2]>,
}

impl QTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, s: &Observation) -> Option<[f64; 2]> {
        self.values.get(s).copied()
    }

    pub fn set(&mut self, s: Observation, values: [f64; 2]) {
        self.values.insert(s, values);
    }

    /// Values at `s`, initializing both actions on first touch.
    pub fn entry<R: Rng + ?Sized>(&mut self, s: Observation, rng: &mut R) -> &mut [f64; 2] {
        self.values.entry(s).or_insert_with(|| [q_init(rng, Action::Wait), q_init(rng, Action::Send)])
    }

    pub fn values<R: Rng + ?Sized>(&mut self, s: Observation, rng: &mut R) -> [f64; 2] {
        *self.entry(s, rng)
    }

    /// Rows sorted by state, for export.
    pub fn rows(&self) -> Vec<(Observation, [f64; 2])> {
        let mut rows: Vec<_> = self.values.iter().map(|(k, v)| (*k, *v)).collect();
        rows.sort_by_key(|r| r.0);
        rows
    }
}

/// One temporal-difference step:
/// `Q(s,i) += alpha * (r + gamma * max_i' Q(s',i') - Q(s,i))`.
/// Returns the new `Q(s,i)`.
pub fn q_update<R: Rng + ?Sized>(table: &mut QTable, e: &Experience, alpha: f64, gamma: f64, rng: &mut R) -> f64 {
    let next = table.values(e.next, rng);
    let target = e.reward + gamma * next[0].max(next[1]);
    let q = &mut table.entry(e.s, rng)[e.action.index()];
    *q += alpha * (target - *q);
    *q
}

/// Fixed-capacity buffer of the most recent experiences, oldest evicted first.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: VecDeque<Experience>,
    capacity: usize,
}

impl Default for ReplayBuffer {
    fn default() -> Self {
        Self::new(REPLAY_CAPACITY)
    }
}

impl ReplayBuffer {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        ReplayBuffer { items: VecDeque::with_capacity(capacity), capacity }
    }

    pub fn push(&mut self, e: Experience) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(e);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    /// Oldest first.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = &Experience> {
        self.items.iter()
    }
}

/// Applies [`q_update`] to every buffered experience, newest first.
pub fn replay_backward<R: Rng + ?Sized>(
    table: &mut QTable,
    buffer: &ReplayBuffer,
    alpha: f64,
    gamma: f64,
    rng: &mut R,
) {
    for e in buffer.iter().rev() {
        q_update(table, e, alpha, gamma, rng);
    }
}

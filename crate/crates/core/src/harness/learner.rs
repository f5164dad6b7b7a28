use rand_chacha::ChaCha8Rng;

use crate::config::{LspiConfig, QLearningConfig};
use crate::rl::{
    lspi, q_update, replay_backward, Experience, LinearQ, Observation, QTable, ReplayBuffer, RlError, TransitionBatch,
};

/// Learner state of one user group.
#[derive(Clone, Debug)]
pub enum GroupLearner {
    Tabular { table: QTable, buffer: ReplayBuffer, rng: ChaCha8Rng, config: QLearningConfig },
    Linear { batch: TransitionBatch, q: LinearQ, config: LspiConfig, unconverged: usize },
}

/// Interleaves per-user traces hour by hour, users in the given order.
pub fn chronological<'a>(traces: &[&'a [Experience]]) -> Vec<&'a Experience> {
    let len = traces.iter().map(|t| t.len()).max().unwrap_or(0);
    (0..len).flat_map(|i| traces.iter().filter_map(move |t| t.get(i))).collect()
}

impl GroupLearner {
    /// Q-table initialized by one backward replay over the group's warm-up
    /// traces, with the replay buffer holding their most recent part.
    pub fn tabular(warmup: &[&[Experience]], config: QLearningConfig, mut rng: ChaCha8Rng) -> Self {
        let mut table = QTable::new();
        let mut buffer = ReplayBuffer::new(config.replay_capacity);
        let all = chronological(warmup);
        for e in all.iter().rev() {
            q_update(&mut table, e, config.alpha0, config.gamma, &mut rng);
        }
        for e in all {
            buffer.push(*e);
        }
        GroupLearner::Tabular { table, buffer, rng, config }
    }

    /// Linear Q-function fitted by LSPI to the group's warm-up traces.
    pub fn linear(warmup: &[&[Experience]], config: LspiConfig) -> Result<Self, RlError> {
        let batch = TransitionBatch::from_experiences(chronological(warmup))?;
        let out = lspi(&batch, config.gamma, config.max_iter, config.tolerance, &LinearQ::default())?;
        Ok(GroupLearner::Linear { batch, q: out.q, config, unconverged: usize::from(!out.converged) })
    }

    pub fn epsilon(&self) -> f64 {
        match self {
            GroupLearner::Tabular { config, .. } => config.epsilon,
            GroupLearner::Linear { config, .. } => config.epsilon,
        }
    }

    /// Action values at `s`. First access to a tabular state initializes it.
    pub fn values(&mut self, s: &Observation) -> Result<[f64; 2], RlError> {
        match self {
            GroupLearner::Tabular { table, rng, .. } => Ok(table.values(*s, rng)),
            GroupLearner::Linear { q, .. } => q.values(s),
        }
    }

    /// Consumes the group's experiences of one hour (in user order) on
    /// learning day `day`: tabular learners update on each and then replay
    /// the buffer backwards; linear learners store them for the nightly fit.
    pub fn observe_hour(&mut self, experiences: &[Experience], day: u32) -> Result<(), RlError> {
        match self {
            GroupLearner::Tabular { table, buffer, rng, config } => {
                let alpha = config.alpha(day);
                for e in experiences {
                    q_update(table, e, alpha, config.gamma, rng);
                    buffer.push(*e);
                }
                if !experiences.is_empty() {
                    replay_backward(table, buffer, alpha, config.gamma, rng);
                }
                Ok(())
            }
            GroupLearner::Linear { batch, .. } => experiences.iter().try_for_each(|e| batch.push(e)),
        }
    }

    /// Nightly LSPI refit on everything the group experienced so far,
    /// warm-started from the current weights. No-op for tabular learners.
    pub fn end_of_day(&mut self) -> Result<(), RlError> {
        if let GroupLearner::Linear { batch, q, config, unconverged } = self {
            let out = lspi(batch, config.gamma, config.max_iter, config.tolerance, q)?;
            *q = out.q;
            *unconverged += usize::from(!out.converged);
        }
        Ok(())
    }

    /// LSPI fits that hit the iteration cap.
    pub fn unconverged_fits(&self) -> usize {
        match self {
            GroupLearner::Linear { unconverged, .. } => *unconverged,
            GroupLearner::Tabular { .. } => 0,
        }
    }

    /// Experiences (or sample weight) the learner has been trained on.
    pub fn data_size(&self) -> f64 {
        match self {
            GroupLearner::Tabular { buffer, .. } => buffer.len() as f64,
            GroupLearner::Linear { batch, .. } => batch.total_weight(),
        }
    }
}

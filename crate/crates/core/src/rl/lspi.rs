//! Least-squares policy iteration over an action-blocked linear basis.
//!
//! The basis for `(s, a)` is 22-dimensional: two blocks of
//! `[features(s); 1]`, with only the block of action `a` non-zero.

use std::collections::HashMap;

use nalgebra::{SMatrix, SVector};

use crate::rl::features::{featurize, FeatureVector, FEATURE_DIM};
use crate::rl::policy::greedy;
use crate::rl::{Action, Experience, Observation, RlError};

pub const BLOCK_DIM: usize = FEATURE_DIM + 1;
pub const BASIS_DIM: usize = 2 * BLOCK_DIM;

/// Relative cut-off below which singular values of the LSTDQ matrix are
/// treated as zero.
const SINGULAR_CUTOFF: f64 = 1e-10;

type Mat = SMatrix<f64, BASIS_DIM, BASIS_DIM>;
type Vector = SVector<f64, BASIS_DIM>;

pub fn basis(features: &FeatureVector, action: Action) -> [f64; BASIS_DIM] {
    let mut out = [0.0; BASIS_DIM];
    let off = action.index() * BLOCK_DIM;
    out[off..off + BLOCK_DIM].copy_from_slice(&features.with_bias());
    out
}

/// Linear action-value function.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LinearQ {
    pub weights: [f64; BASIS_DIM],
}

impl Default for LinearQ {
    fn default() -> Self {
        LinearQ { weights: [0.0; BASIS_DIM] }
    }
}

impl LinearQ {
    pub fn block(&self, action: Action) -> &[f64] {
        let off = action.index() * BLOCK_DIM;
        &self.weights[off..off + BLOCK_DIM]
    }

    fn block_value(&self, x: &[f64; BLOCK_DIM], action: Action) -> f64 {
        self.block(action).iter().zip(x).map(|(w, v)| w * v).sum()
    }

    pub fn values_for(&self, features: &FeatureVector) -> [f64; 2] {
        let x = features.with_bias();
        [self.block_value(&x, Action::Wait), self.block_value(&x, Action::Send)]
    }

    pub fn values(&self, s: &Observation) -> Result<[f64; 2], RlError> {
        Ok(self.values_for(&featurize(s)?))
    }

    pub fn greedy(&self, s: &Observation) -> Result<Action, RlError> {
        Ok(greedy(self.values(s)?))
    }

    pub fn distance(&self, other: &LinearQ) -> f64 {
        self.weights.iter().zip(&other.weights).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
    }
}

#[derive(Clone, Debug)]
struct Transition {
    s: Observation,
    x: [f64; BLOCK_DIM],
    action: Action,
    next: Observation,
    x_next: [f64; BLOCK_DIM],
    weight: f64,
    reward_sum: f64,
}

/// Experiences with identical `(s, a, s')` merged into one weighted entry.
///
/// LSTDQ sums are linear in the samples, so merging is exact and keeps the
/// cost of a policy-evaluation step proportional to the number of distinct
/// transitions rather than the number of experiences.
#[derive(Clone, Debug, Default)]
pub struct TransitionBatch {
    entries: Vec<Transition>,
    index: HashMap<(Observation, Action, Observation), usize>,
    total_weight: f64,
}

impl TransitionBatch {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_experiences<'a>(exps: impl IntoIterator<Item = &'a Experience>) -> Result<Self, RlError> {
        let mut batch = Self::new();
        for e in exps {
            batch.push(e)?;
        }
        Ok(batch)
    }

    pub fn push(&mut self, e: &Experience) -> Result<(), RlError> {
        self.push_weighted(e, 1.0)
    }

    /// Adds `weight` copies of `e`.
    pub fn push_weighted(&mut self, e: &Experience, weight: f64) -> Result<(), RlError> {
        if !(weight > 0.0 && weight.is_finite()) || !e.reward.is_finite() {
            return Err(RlError::InvalidParameter(format!("bad sample weight {weight} / reward {}", e.reward)));
        }
        let key = (e.s, e.action, e.next);
        let i = match self.index.get(&key) {
            Some(&i) => i,
            None => {
                self.entries.push(Transition {
                    s: e.s,
                    x: featurize(&e.s)?.with_bias(),
                    action: e.action,
                    next: e.next,
                    x_next: featurize(&e.next)?.with_bias(),
                    weight: 0.0,
                    reward_sum: 0.0,
                });
                self.index.insert(key, self.entries.len() - 1);
                self.entries.len() - 1
            }
        };
        let t = &mut self.entries[i];
        t.weight += weight;
        t.reward_sum += weight * e.reward;
        self.total_weight += weight;
        Ok(())
    }

    /// Number of distinct transitions.
    pub fn distinct(&self) -> usize {
        self.entries.len()
    }

    /// Total sample weight (number of experiences for unit weights).
    pub fn total_weight(&self) -> f64 {
        self.total_weight
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Solves `A w = b` for the LSTDQ system, with
/// `A = sum phi(s,a) (phi(s,a) - gamma phi(s', pi(s')))^T` and
/// `b = sum phi(s,a) r`.
///
/// Directions the batch does not excite (an action never taken, a feature
/// that is constant zero) make `A` rank deficient; those components are
/// resolved to the minimum-norm solution.
pub fn lstdq(batch: &TransitionBatch, policy: impl Fn(&Observation) -> Action, gamma: f64) -> Result<LinearQ, RlError> {
    let next_actions: Vec<Action> = batch.entries.iter().map(|t| policy(&t.next)).collect();
    solve_lstdq(batch, &next_actions, gamma)
}

fn solve_lstdq(batch: &TransitionBatch, next_actions: &[Action], gamma: f64) -> Result<LinearQ, RlError> {
    if !(0.0..1.0).contains(&gamma) {
        return Err(RlError::InvalidParameter(format!("gamma must lie in [0, 1), got {gamma}")));
    }
    if batch.is_empty() {
        return Err(RlError::EmptyBatch);
    }
    let mut a = [[0.0f64; BASIS_DIM]; BASIS_DIM];
    let mut b = [0.0f64; BASIS_DIM];
    for (t, &next_action) in batch.entries.iter().zip(next_actions) {
        let row = t.action.index() * BLOCK_DIM;
        let col_next = next_action.index() * BLOCK_DIM;
        for i in 0..BLOCK_DIM {
            let wx = t.weight * t.x[i];
            if wx == 0.0 {
                continue;
            }
            let r = &mut a[row + i];
            for j in 0..BLOCK_DIM {
                r[row + j] += wx * t.x[j];
                r[col_next + j] -= gamma * wx * t.x_next[j];
            }
            b[row + i] += t.x[i] * t.reward_sum;
        }
    }
    let a = Mat::from_fn(|i, j| a[i][j]);
    let b = Vector::from_column_slice(&b);
    let svd = a
        .try_svd(true, true, f64::EPSILON, 10_000)
        .ok_or_else(|| RlError::SolverFailed("SVD did not converge".into()))?;
    let max_sv = svd.singular_values.max();
    if !(max_sv > 0.0 && max_sv.is_finite()) {
        return Err(RlError::SolverFailed(format!("degenerate LSTDQ matrix (largest singular value {max_sv})")));
    }
    let w = svd.solve(&b, SINGULAR_CUTOFF * max_sv).map_err(|e| RlError::SolverFailed(e.to_string()))?;
    if w.iter().any(|v| !v.is_finite()) {
        return Err(RlError::SolverFailed("non-finite weights".into()));
    }
    let mut weights = [0.0; BASIS_DIM];
    weights.copy_from_slice(w.as_slice());
    Ok(LinearQ { weights })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LspiOutcome {
    pub q: LinearQ,
    /// Number of policy-evaluation solves performed.
    pub iterations: usize,
    pub converged: bool,
}

/// Alternates LSTDQ evaluation of the greedy policy of the current weights
/// with greedy improvement, starting from `initial`, until the weight change
/// is below `epsilon` or `max_iter` evaluations have run.
pub fn lspi(
    batch: &TransitionBatch,
    gamma: f64,
    max_iter: usize,
    epsilon: f64,
    initial: &LinearQ,
) -> Result<LspiOutcome, RlError> {
    if max_iter == 0 {
        return Err(RlError::InvalidParameter("max_iter must be positive".into()));
    }
    let mut q = *initial;
    for iteration in 1..=max_iter {
        let next_actions: Vec<Action> = batch
            .entries
            .iter()
            .map(|t| {
                let x = &t.x_next;
                greedy([q.block_value(x, Action::Wait), q.block_value(x, Action::Send)])
            })
            .collect();
        let next = solve_lstdq(batch, &next_actions, gamma)
            .map_err(|e| RlError::SolverFailed(format!("LSPI iteration {iteration}: {e}")))?;
        let change = next.distance(&q);
        q = next;
        if change < epsilon {
            return Ok(LspiOutcome { q, iterations: iteration, converged: true });
        }
    }
    Ok(LspiOutcome { q, iterations: max_iter, converged: false })
}

/// Distinct observations in the batch, for policy inspection.
pub fn batch_states(batch: &TransitionBatch) -> Vec<Observation> {
    let mut states: Vec<Observation> = batch.entries.iter().flat_map(|t| [t.s, t.next]).collect();
    states.sort();
    states.dedup();
    states
}

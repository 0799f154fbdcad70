//! Policy representations.
//!
//! * [`DeterministicPolicy`]: one policy action per state. This is what the
//!   designer optimizes; it can never select the non-policy action.
//! * [`PartialPolicy`]: a deterministic policy with holes, the node type of
//!   the branch and bound search.
//! * [`StochasticPolicy`]: the behavior the operator actually executes once
//!   state aliasing is taken into account. Rows range over the policy
//!   actions plus the non-policy action (stored last) and sum to one.

use rand::Rng;

use crate::model::{ActionId, ModelError, StateId, PROB_TOL};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct DeterministicPolicy {
    actions: Vec<ActionId>,
}

impl DeterministicPolicy {
    pub fn new(actions: Vec<ActionId>, n_actions: usize) -> Result<Self, ModelError> {
        if let Some(a) = actions.iter().find(|a| a.0 >= n_actions) {
            return Err(ModelError::ActionOutOfRange { id: a.0, n_actions });
        }
        Ok(Self { actions })
    }

    /// The same action everywhere.
    pub fn uniform(n_states: usize, action: ActionId) -> Self {
        Self {
            actions: vec![action; n_states],
        }
    }

    pub fn random<R: Rng>(n_states: usize, n_actions: usize, rng: &mut R) -> Self {
        let actions = (0..n_states)
            .map(|_| ActionId(rng.gen_range(0..n_actions)))
            .collect();
        Self { actions }
    }

    pub fn action(&self, s: StateId) -> ActionId {
        self.actions[s.0]
    }

    pub fn set(&mut self, s: StateId, a: ActionId) {
        self.actions[s.0] = a;
    }

    /// Clone with a single state's action replaced.
    pub fn with(&self, s: StateId, a: ActionId) -> Self {
        let mut next = self.clone();
        next.set(s, a);
        next
    }

    pub fn n_states(&self) -> usize {
        self.actions.len()
    }

    pub fn actions(&self) -> &[ActionId] {
        &self.actions
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PartialPolicy {
    slots: Vec<Option<ActionId>>,
}

impl PartialPolicy {
    pub fn empty(n_states: usize) -> Self {
        Self {
            slots: vec![None; n_states],
        }
    }

    pub fn from_slots(slots: Vec<Option<ActionId>>) -> Self {
        Self { slots }
    }

    pub fn action(&self, s: StateId) -> Option<ActionId> {
        self.slots[s.0]
    }

    pub fn decide(&mut self, s: StateId, a: ActionId) {
        self.slots[s.0] = Some(a);
    }

    /// Clone with one more state decided.
    pub fn with(&self, s: StateId, a: ActionId) -> Self {
        let mut next = self.clone();
        next.decide(s, a);
        next
    }

    pub fn n_states(&self) -> usize {
        self.slots.len()
    }

    pub fn decided_count(&self) -> usize {
        self.slots.iter().filter(|slot| slot.is_some()).count()
    }

    pub fn is_total(&self) -> bool {
        self.slots.iter().all(|slot| slot.is_some())
    }

    /// Converts to a deterministic policy, `None` if any state is undecided.
    pub fn to_total(&self) -> Option<DeterministicPolicy> {
        let actions = self.slots.iter().copied().collect::<Option<Vec<_>>>()?;
        Some(DeterministicPolicy { actions })
    }
}

/// Execution-level behavior: per state, a distribution over the policy
/// actions plus the non-policy action (last column).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticPolicy<F> {
    probs: Vec<Vec<F>>,
    n_actions: usize,
}

impl<F: Scalar> StochasticPolicy<F> {
    /// `probs[s]` must have `n_actions + 1` entries summing to one within
    /// [`PROB_TOL`].
    pub fn new(probs: Vec<Vec<F>>, n_actions: usize) -> Result<Self, ModelError> {
        for (s, row) in probs.iter().enumerate() {
            if row.len() != n_actions + 1 {
                return Err(ModelError::ShapeMismatch {
                    field: "stochastic policy row",
                    expected: n_actions + 1,
                    got: row.len(),
                });
            }
            let sum: f64 = row.iter().map(|p| p.as_f64()).sum();
            let residual = (sum - 1.0).abs();
            if residual.is_nan() || residual > PROB_TOL {
                return Err(ModelError::PolicyRowSum { state: s, sum });
            }
        }
        Ok(Self { probs, n_actions })
    }

    pub fn n_states(&self) -> usize {
        self.probs.len()
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    /// Row over `n_actions + 1` columns, non-policy action last.
    pub fn row(&self, s: StateId) -> &[F] {
        &self.probs[s.0]
    }

    pub fn prob(&self, s: StateId, a: ActionId) -> F {
        self.probs[s.0][a.0]
    }

    /// Probability that the operator takes the non-policy action in `s`.
    pub fn np_prob(&self, s: StateId) -> F {
        self.probs[s.0][self.n_actions]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_policy_rejects_out_of_range() {
        let err = DeterministicPolicy::new(vec![ActionId(2)], 2).unwrap_err();
        assert_eq!(
            err,
            ModelError::ActionOutOfRange {
                id: 2,
                n_actions: 2
            }
        );
    }

    #[test]
    fn partial_policy_totality() {
        let mut p = PartialPolicy::empty(3);
        assert!(!p.is_total());
        assert!(p.to_total().is_none());
        p.decide(StateId(0), ActionId(1));
        p.decide(StateId(1), ActionId(0));
        p.decide(StateId(2), ActionId(1));
        assert!(p.is_total());
        let total = p.to_total().unwrap();
        assert_eq!(total.action(StateId(2)), ActionId(1));
    }

    #[test]
    fn stochastic_rows_must_sum_to_one() {
        let ok = StochasticPolicy::new(vec![vec![0.5, 0.2, 0.3]], 2);
        assert!(ok.is_ok());
        let bad = StochasticPolicy::new(vec![vec![0.5, 0.2, 0.2]], 2);
        assert!(matches!(
            bad,
            Err(ModelError::PolicyRowSum { state: 0, .. })
        ));
        let short = StochasticPolicy::new(vec![vec![0.5, 0.5]], 2);
        assert!(matches!(short, Err(ModelError::ShapeMismatch { .. })));
    }

    #[test]
    fn np_prob_reads_last_column() {
        let sp = StochasticPolicy::new(vec![vec![0.1, 0.2, 0.7]], 2).unwrap();
        assert_eq!(sp.np_prob(StateId(0)), 0.7);
        assert_eq!(sp.prob(StateId(0), ActionId(1)), 0.2);
    }
}

//! From designed policy to executed behavior.
//!
//! A deterministic policy `pi` is carried out by an operator who may misread
//! the state. In true state `s` the executed behavior is:
//!
//! * delay: with probability
//!   `d(s) = psi(s) * sum_{events e of s} w(e) * conflict(e, pi)`
//!   the operator takes the non-policy action, where `conflict` is 1 when
//!   some alternate in the event prescribes a different action than the best
//!   guess does;
//! * otherwise a guess `g ~ p_c(. | s)` is drawn and `pi(g)` is executed, so
//!   `P(a | s) = (1 - d(s)) * sum_{g : pi(g) = a} p_c(g | s)`.
//!
//! [`fixed_probability_bounds`] extends this to partial policies: per state
//! it reports probability mass already pinned down by the decided states, no
//! matter how the rest of the policy is completed. Every completion's
//! executed behavior dominates these lower bounds, which is what makes the
//! branch and bound relaxation sound.

use crate::model::{HasaMdp, StateId};
use crate::policy::{DeterministicPolicy, PartialPolicy, StochasticPolicy};
use crate::scalar::Scalar;

/// Probability that the operator stalls into the non-policy action in `s`.
/// Lies in `[0, psi(s)]`; zero when `psi(s) = 0` or when the policy is
/// constant across every event of `s`.
pub fn delay_probability<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
    s: StateId,
) -> F {
    let mut conflicting = F::zero();
    for ev in model.uncertainty().events_for(s) {
        let best_action = policy.action(ev.best_guess);
        let conflicts = ev
            .alternates
            .iter()
            .any(|&alt| policy.action(alt) != best_action);
        if conflicts {
            conflicting += ev.weight;
        }
    }
    model.patience(s) * conflicting
}

pub fn delay_vector<F: Scalar>(model: &HasaMdp<F>, policy: &DeterministicPolicy) -> Vec<F> {
    (0..model.n_states())
        .map(|s| delay_probability(model, policy, StateId(s)))
        .collect()
}

/// Executed behavior of `policy` under state aliasing. Rows cover the policy
/// actions plus the non-policy action (last) and sum to one.
pub fn induce_stochastic<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
) -> StochasticPolicy<F> {
    let n = model.n_states();
    let m = model.n_actions();
    let mut rows = Vec::with_capacity(n);
    for s in 0..n {
        let d = delay_probability(model, policy, StateId(s));
        let mut row = vec![F::zero(); m + 1];
        row[m] = d;
        let scale = F::one() - d;
        for (g, &pc) in model.classification_row(StateId(s)).iter().enumerate() {
            row[policy.action(StateId(g)).0] += scale * pc;
        }
        rows.push(row);
    }
    StochasticPolicy::new(rows, m)
        .expect("induced rows sum to one for a model whose classification rows do")
}

/// Per-state execution probabilities pinned down by a partial policy.
///
/// For every completion of the partial policy, the executed behavior in `s`
/// satisfies `P(a_np | s) in [np_lower, max_delay]` and
/// `P(a | s) >= action_lower[a]`. `residual` is the mass not yet committed,
/// `1 - np_lower - sum_a action_lower[a]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedProbabilityBounds<F> {
    pub np_lower: Vec<F>,
    pub max_delay: Vec<F>,
    /// `action_lower[s][a]` over policy actions.
    pub action_lower: Vec<Vec<F>>,
    pub residual: Vec<F>,
}

impl<F> FixedProbabilityBounds<F> {
    pub fn n_states(&self) -> usize {
        self.np_lower.len()
    }
}

pub fn fixed_probability_bounds<F: Scalar>(
    model: &HasaMdp<F>,
    partial: &PartialPolicy,
) -> FixedProbabilityBounds<F> {
    let n = model.n_states();
    let m = model.n_actions();
    let mut np_lower = Vec::with_capacity(n);
    let mut max_delay = Vec::with_capacity(n);
    let mut action_lower = Vec::with_capacity(n);
    let mut residual = Vec::with_capacity(n);

    for s in 0..n {
        let psi = model.patience(StateId(s));
        let mut certain_conflict_mass = F::zero();
        let mut possibly_conflicting_mass = F::zero();
        for ev in model.uncertainty().events_for(StateId(s)) {
            let best = partial.action(ev.best_guess);
            let mut provably_free = true;
            let mut all_decided = best.is_some();
            let mut any_conflict = false;
            for &alt in &ev.alternates {
                if alt == ev.best_guess {
                    continue;
                }
                match (best, partial.action(alt)) {
                    (Some(b), Some(a)) => {
                        if a != b {
                            any_conflict = true;
                            provably_free = false;
                        }
                    }
                    _ => {
                        all_decided = false;
                        provably_free = false;
                    }
                }
            }
            if all_decided && any_conflict {
                certain_conflict_mass += ev.weight;
            }
            if !provably_free {
                possibly_conflicting_mass += ev.weight;
            }
        }
        let np_lo = psi * certain_conflict_mass;
        let delay_hi = psi * possibly_conflicting_mass;

        let scale = F::one() - delay_hi;
        let mut lowers = vec![F::zero(); m];
        for (g, &pc) in model.classification_row(StateId(s)).iter().enumerate() {
            if let Some(a) = partial.action(StateId(g)) {
                lowers[a.0] += scale * pc;
            }
        }

        let committed = np_lo + lowers.iter().copied().sum::<F>();
        residual.push((F::one() - committed).max(F::zero()));
        np_lower.push(np_lo);
        max_delay.push(delay_hi);
        action_lower.push(lowers);
    }

    FixedProbabilityBounds {
        np_lower,
        max_delay,
        action_lower,
        residual,
    }
}

//! Problem instances: a finite MDP plus a model of operator confusion.
//!
//! A [`HasaMdp`] bundles the usual MDP data (transitions, rewards, discount,
//! initial distribution) with three extra pieces describing how a human
//! operator misreads the state while executing a policy:
//!
//! * a classification table `p_c(guess | true)`, each row a distribution
//!   over guessed states given the true one,
//! * weighted uncertainty events: sets of states the operator hesitates
//!   between, grouped by true state with weights that sum to one,
//! * a per-state patience factor `psi`, the probability that hesitation
//!   between conflicting prescriptions turns into the reserved non-policy
//!   action instead of a guess.
//!
//! The non-policy action is a distinguished extra action: it has its own
//! transition and reward rows (stored last in each state block) but is never
//! available to a policy. Policies choose among the `n_actions()` ordinary
//! actions only.
//!
//! Construction checks shapes and identifier references and canonicalizes
//! the uncertainty events (weights normalized per true state). Numeric laws
//! such as row-stochasticity are deliberately not enforced at construction;
//! [`HasaMdp::validate`] reports them as typed [`Violation`]s.

use std::fmt;

use thiserror::Error;

use crate::scalar::Scalar;

/// Absolute tolerance for the probability laws checked by `validate`.
pub const PROB_TOL: f64 = 1e-9;

// ─────────────────────────────── identifiers ──────────────────────────────

/// Index of a state in the model's state list.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub usize);

/// Index of a policy action. The non-policy action has no `ActionId`; it is
/// addressed separately since policies may never select it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ActionId(pub usize);

impl fmt::Display for StateId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for ActionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

// ─────────────────────────────── uncertainty ──────────────────────────────

/// One hesitation pattern: while truly in `true_state` the operator wavers
/// between `best_guess` and the `alternates`. An alternate set equal to
/// `{best_guess}` encodes confidence (no hesitation at all).
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyEvent<F> {
    pub true_state: StateId,
    pub best_guess: StateId,
    pub alternates: Vec<StateId>,
    pub weight: F,
}

/// Uncertainty events grouped by true state, weights normalized so that each
/// state's events sum to one. States with no events receive a confident
/// self-event of weight one.
#[derive(Debug, Clone, PartialEq)]
pub struct UncertaintyModel<F> {
    events: Vec<UncertaintyEvent<F>>,
    by_state: Vec<std::ops::Range<usize>>,
}

impl<F: Scalar> UncertaintyModel<F> {
    /// Canonicalizes raw events: validates references, strips the best guess
    /// from alternate sets that mention other states, merges duplicates,
    /// drops zero-weight events, and normalizes weights per true state.
    pub fn from_events(
        n_states: usize,
        events: Vec<UncertaintyEvent<F>>,
    ) -> Result<Self, ModelError> {
        let mut canon: Vec<UncertaintyEvent<F>> = Vec::with_capacity(events.len() + n_states);
        for (index, mut ev) in events.into_iter().enumerate() {
            if ev.true_state.0 >= n_states {
                return Err(ModelError::StateOutOfRange {
                    field: "uncertainty_events.true",
                    id: ev.true_state.0,
                    n_states,
                });
            }
            if ev.best_guess.0 >= n_states {
                return Err(ModelError::StateOutOfRange {
                    field: "uncertainty_events.best",
                    id: ev.best_guess.0,
                    n_states,
                });
            }
            if ev.alternates.is_empty() {
                return Err(ModelError::EmptyAlternates { index });
            }
            if let Some(alt) = ev.alternates.iter().find(|alt| alt.0 >= n_states) {
                return Err(ModelError::StateOutOfRange {
                    field: "uncertainty_events.alternates",
                    id: alt.0,
                    n_states,
                });
            }
            let w = ev.weight.as_f64();
            if !w.is_finite() || w < 0.0 {
                return Err(ModelError::BadEventWeight { index, weight: w });
            }
            if w == 0.0 {
                continue;
            }
            ev.alternates.sort_unstable();
            ev.alternates.dedup();
            if ev.alternates.len() > 1 {
                ev.alternates.retain(|&alt| alt != ev.best_guess);
            }
            canon.push(ev);
        }

        canon.sort_by(|a, b| {
            (a.true_state, a.best_guess, &a.alternates).cmp(&(
                b.true_state,
                b.best_guess,
                &b.alternates,
            ))
        });
        canon.dedup_by(|dup, kept| {
            let same = dup.true_state == kept.true_state
                && dup.best_guess == kept.best_guess
                && dup.alternates == kept.alternates;
            if same {
                kept.weight += dup.weight;
            }
            same
        });

        let mut grouped: Vec<UncertaintyEvent<F>> = Vec::with_capacity(canon.len() + n_states);
        let mut by_state = Vec::with_capacity(n_states);
        let mut cursor = 0usize;
        for s in 0..n_states {
            let start = grouped.len();
            let mut total = F::zero();
            while cursor < canon.len() && canon[cursor].true_state.0 == s {
                total += canon[cursor].weight;
                grouped.push(canon[cursor].clone());
                cursor += 1;
            }
            if start == grouped.len() {
                grouped.push(UncertaintyEvent {
                    true_state: StateId(s),
                    best_guess: StateId(s),
                    alternates: vec![StateId(s)],
                    weight: F::one(),
                });
            } else {
                for ev in &mut grouped[start..] {
                    ev.weight /= total;
                }
            }
            by_state.push(start..grouped.len());
        }

        Ok(Self {
            events: grouped,
            by_state,
        })
    }

    pub fn n_states(&self) -> usize {
        self.by_state.len()
    }

    pub fn events(&self) -> &[UncertaintyEvent<F>] {
        &self.events
    }

    /// Events whose true state is `s`.
    pub fn events_for(&self, s: StateId) -> &[UncertaintyEvent<F>] {
        &self.events[self.by_state[s.0].clone()]
    }
}

// ──────────────────────────────── the model ───────────────────────────────

/// Raw ingredients for a [`HasaMdp`]. Transition and reward blocks carry one
/// extra action row per state, the non-policy action, stored last.
#[derive(Debug, Clone)]
pub struct HasaMdpParts<F> {
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub non_policy_action: String,
    /// `transition[s][a][s2]`, `a` ranging over policy actions then the
    /// non-policy action.
    pub transition: Vec<Vec<Vec<F>>>,
    /// `reward[s][a]`, same action layout as `transition`.
    pub reward: Vec<Vec<F>>,
    pub discount: F,
    pub initial_dist: Vec<F>,
    /// `classification[true][guess]`.
    pub classification: Vec<Vec<F>>,
    pub uncertainty_events: Vec<UncertaintyEvent<F>>,
    pub patience: Vec<F>,
}

/// An immutable problem instance. See the module docs for the pieces.
#[derive(Debug, Clone, PartialEq)]
pub struct HasaMdp<F> {
    states: Vec<String>,
    actions: Vec<String>,
    non_policy_action: String,
    transition: Vec<F>,
    reward: Vec<F>,
    discount: F,
    initial_dist: Vec<F>,
    classification: Vec<F>,
    uncertainty: UncertaintyModel<F>,
    patience: Vec<F>,
}

#[derive(Debug, Error, PartialEq)]
pub enum ModelError {
    #[error("model needs at least one state")]
    EmptyStates,
    #[error("model needs at least one policy action")]
    EmptyActions,
    #[error("duplicate state name {0:?}")]
    DuplicateState(String),
    #[error("duplicate action name {0:?}")]
    DuplicateAction(String),
    #[error("non-policy action {0:?} also appears in the policy action list")]
    NonPolicyActionClash(String),
    #[error("{field} has wrong shape: expected {expected} entries, got {got}")]
    ShapeMismatch {
        field: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("{field} references state {id} but the model has {n_states} states")]
    StateOutOfRange {
        field: &'static str,
        id: usize,
        n_states: usize,
    },
    #[error("action index {id} out of range for {n_actions} policy actions")]
    ActionOutOfRange { id: usize, n_actions: usize },
    #[error("uncertainty event {index} has an empty alternate set")]
    EmptyAlternates { index: usize },
    #[error("uncertainty event {index} has weight {weight} (must be finite and non-negative)")]
    BadEventWeight { index: usize, weight: f64 },
    #[error("policy row for state {state} sums to {sum}, expected 1 within {PROB_TOL:e}")]
    PolicyRowSum { state: usize, sum: f64 },
}

impl<F: Scalar> HasaMdp<F> {
    pub fn new(parts: HasaMdpParts<F>) -> Result<Self, ModelError> {
        let HasaMdpParts {
            states,
            actions,
            non_policy_action,
            transition,
            reward,
            discount,
            initial_dist,
            classification,
            uncertainty_events,
            patience,
        } = parts;

        if states.is_empty() {
            return Err(ModelError::EmptyStates);
        }
        if actions.is_empty() {
            return Err(ModelError::EmptyActions);
        }
        for (i, name) in states.iter().enumerate() {
            if states[..i].contains(name) {
                return Err(ModelError::DuplicateState(name.clone()));
            }
        }
        for (i, name) in actions.iter().enumerate() {
            if actions[..i].contains(name) {
                return Err(ModelError::DuplicateAction(name.clone()));
            }
        }
        if actions.contains(&non_policy_action) {
            return Err(ModelError::NonPolicyActionClash(non_policy_action));
        }

        let n = states.len();
        let m = actions.len();
        let cols = m + 1;

        let check = |field: &'static str, expected: usize, got: usize| {
            if expected == got {
                Ok(())
            } else {
                Err(ModelError::ShapeMismatch {
                    field,
                    expected,
                    got,
                })
            }
        };

        check("transition", n, transition.len())?;
        let mut flat_t = Vec::with_capacity(n * cols * n);
        for block in &transition {
            check("transition[s]", cols, block.len())?;
            for row in block {
                check("transition[s][a]", n, row.len())?;
                flat_t.extend_from_slice(row);
            }
        }

        check("reward", n, reward.len())?;
        let mut flat_r = Vec::with_capacity(n * cols);
        for row in &reward {
            check("reward[s]", cols, row.len())?;
            flat_r.extend_from_slice(row);
        }

        check("initial_dist", n, initial_dist.len())?;
        check("patience", n, patience.len())?;

        check("classification", n, classification.len())?;
        let mut flat_c = Vec::with_capacity(n * n);
        for row in &classification {
            check("classification[true]", n, row.len())?;
            flat_c.extend_from_slice(row);
        }

        let uncertainty = UncertaintyModel::from_events(n, uncertainty_events)?;

        Ok(Self {
            states,
            actions,
            non_policy_action,
            transition: flat_t,
            reward: flat_r,
            discount,
            initial_dist,
            classification: flat_c,
            uncertainty,
            patience,
        })
    }

    pub fn n_states(&self) -> usize {
        self.states.len()
    }

    /// Number of policy actions. The non-policy action is extra: transition
    /// and reward blocks have `n_actions() + 1` rows per state.
    pub fn n_actions(&self) -> usize {
        self.actions.len()
    }

    /// Column index of the non-policy action inside a state's block.
    pub fn np_col(&self) -> usize {
        self.actions.len()
    }

    pub fn state_names(&self) -> &[String] {
        &self.states
    }

    pub fn action_names(&self) -> &[String] {
        &self.actions
    }

    pub fn non_policy_action(&self) -> &str {
        &self.non_policy_action
    }

    pub fn state_index(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(StateId)
    }

    pub fn action_index(&self, name: &str) -> Option<ActionId> {
        self.actions.iter().position(|a| a == name).map(ActionId)
    }

    pub fn discount(&self) -> F {
        self.discount
    }

    pub fn initial_dist(&self) -> &[F] {
        &self.initial_dist
    }

    pub fn initial_prob(&self, s: StateId) -> F {
        self.initial_dist[s.0]
    }

    /// Transition row for a policy action.
    pub fn transition_row(&self, s: StateId, a: ActionId) -> &[F] {
        debug_assert!(a.0 < self.n_actions());
        self.row(s.0, a.0)
    }

    /// Transition row for the non-policy action.
    pub fn np_transition_row(&self, s: StateId) -> &[F] {
        self.row(s.0, self.np_col())
    }

    /// Transition row by raw column index, `0..=n_actions()`.
    pub(crate) fn row(&self, s: usize, col: usize) -> &[F] {
        let n = self.n_states();
        let base = (s * (self.np_col() + 1) + col) * n;
        &self.transition[base..base + n]
    }

    pub fn reward(&self, s: StateId, a: ActionId) -> F {
        debug_assert!(a.0 < self.n_actions());
        self.reward_col(s.0, a.0)
    }

    pub fn np_reward(&self, s: StateId) -> F {
        self.reward_col(s.0, self.np_col())
    }

    pub(crate) fn reward_col(&self, s: usize, col: usize) -> F {
        self.reward[s * (self.np_col() + 1) + col]
    }

    /// `p_c(guess | true)`, the row being a distribution over guesses.
    pub fn classification_row(&self, true_state: StateId) -> &[F] {
        let n = self.n_states();
        &self.classification[true_state.0 * n..(true_state.0 + 1) * n]
    }

    pub fn classification_prob(&self, true_state: StateId, guess: StateId) -> F {
        self.classification[true_state.0 * self.n_states() + guess.0]
    }

    pub fn uncertainty(&self) -> &UncertaintyModel<F> {
        &self.uncertainty
    }

    pub fn patience(&self, s: StateId) -> F {
        self.patience[s.0]
    }

    pub fn patience_vector(&self) -> &[F] {
        &self.patience
    }

    /// Checks every probability law the numeric layers rely on. An empty
    /// report means the model is safe to solve.
    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let tol = PROB_TOL;
        let n = self.n_states();
        let cols = self.np_col() + 1;

        let gamma = self.discount.as_f64();
        if !(0.0..1.0).contains(&gamma) {
            violations.push(Violation::DiscountOutOfRange { value: gamma });
        }

        for s in 0..n {
            for col in 0..cols {
                let mut sum = 0.0;
                for (s2, &p) in self.row(s, col).iter().enumerate() {
                    let p = p.as_f64();
                    sum += p;
                    if !(-tol..=1.0 + tol).contains(&p) {
                        violations.push(Violation::EntryOutOfRange {
                            field: "transition",
                            state: s,
                            index: s2,
                            value: p,
                        });
                    }
                }
                let residual = (sum - 1.0).abs();
                if residual.is_nan() || residual > tol {
                    violations.push(Violation::TransitionRowSum {
                        state: s,
                        action_col: col,
                        residual,
                    });
                }
                let r = self.reward_col(s, col).as_f64();
                if !r.is_finite() {
                    violations.push(Violation::NonFiniteReward {
                        state: s,
                        action_col: col,
                    });
                }
            }
        }

        let mut init_sum = 0.0;
        for (s, &p) in self.initial_dist.iter().enumerate() {
            let p = p.as_f64();
            init_sum += p;
            if !(-tol..=1.0 + tol).contains(&p) {
                violations.push(Violation::EntryOutOfRange {
                    field: "initial_dist",
                    state: s,
                    index: s,
                    value: p,
                });
            }
        }
        let init_residual = (init_sum - 1.0).abs();
        if init_residual.is_nan() || init_residual > tol {
            violations.push(Violation::InitialDistSum {
                residual: init_residual,
            });
        }

        for t in 0..n {
            let mut sum = 0.0;
            for (g, &p) in self.classification_row(StateId(t)).iter().enumerate() {
                let p = p.as_f64();
                sum += p;
                if !(-tol..=1.0 + tol).contains(&p) {
                    violations.push(Violation::EntryOutOfRange {
                        field: "classification",
                        state: t,
                        index: g,
                        value: p,
                    });
                }
            }
            let residual = (sum - 1.0).abs();
            if residual.is_nan() || residual > tol {
                violations.push(Violation::ClassificationRowSum { state: t, residual });
            }
        }

        for s in 0..n {
            let events = self.uncertainty.events_for(StateId(s));
            let sum: f64 = events.iter().map(|ev| ev.weight.as_f64()).sum();
            let residual = (sum - 1.0).abs();
            if residual.is_nan() || residual > tol {
                violations.push(Violation::UncertaintyWeightSum { state: s, residual });
            }
            for (e, ev) in events.iter().enumerate() {
                if ev.alternates.len() > 1 && ev.alternates.contains(&ev.best_guess) {
                    violations.push(Violation::AlternateContainsBest { state: s, event: e });
                }
            }
        }

        for (s, &psi) in self.patience.iter().enumerate() {
            let psi = psi.as_f64();
            if !(-tol..=1.0 + tol).contains(&psi) {
                violations.push(Violation::PatienceOutOfRange {
                    state: s,
                    value: psi,
                });
            }
        }

        ValidationReport { violations }
    }
}

// ──────────────────────────────── validation ──────────────────────────────

/// A single broken probability law, self-describing via `Display`.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("transition row (state {state}, action column {action_col}) is off by {residual:e}")]
    TransitionRowSum {
        state: usize,
        action_col: usize,
        residual: f64,
    },
    #[error("initial_dist sums off by {residual:e}")]
    InitialDistSum { residual: f64 },
    #[error("classification row for state {state} is off by {residual:e}")]
    ClassificationRowSum { state: usize, residual: f64 },
    #[error("uncertainty weights for state {state} sum off by {residual:e}")]
    UncertaintyWeightSum { state: usize, residual: f64 },
    #[error("{field}[{state}][{index}] = {value} lies outside [0, 1]")]
    EntryOutOfRange {
        field: &'static str,
        state: usize,
        index: usize,
        value: f64,
    },
    #[error("discount {value} lies outside [0, 1)")]
    DiscountOutOfRange { value: f64 },
    #[error("patience for state {state} is {value}, outside [0, 1]")]
    PatienceOutOfRange { state: usize, value: f64 },
    #[error("reward (state {state}, action column {action_col}) is not finite")]
    NonFiniteReward { state: usize, action_col: usize },
    #[error(
        "uncertainty event {event} for state {state} lists the best guess among its alternates"
    )]
    AlternateContainsBest { state: usize, event: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            write!(f, "model is valid")
        } else {
            writeln!(f, "model has {} violation(s):", self.violations.len())?;
            for v in &self.violations {
                writeln!(f, "  - {v}")?;
            }
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_state_parts() -> HasaMdpParts<f64> {
        HasaMdpParts {
            states: vec!["s0".into(), "s1".into()],
            actions: vec!["a".into(), "b".into()],
            non_policy_action: "wait".into(),
            transition: vec![
                vec![vec![0.5, 0.5], vec![1.0, 0.0], vec![1.0, 0.0]],
                vec![vec![0.0, 1.0], vec![0.3, 0.7], vec![0.0, 1.0]],
            ],
            reward: vec![vec![1.0, 0.0, -0.1], vec![0.5, 2.0, -0.1]],
            discount: 0.9,
            initial_dist: vec![0.25, 0.75],
            classification: vec![vec![0.8, 0.2], vec![0.1, 0.9]],
            uncertainty_events: vec![
                UncertaintyEvent {
                    true_state: StateId(0),
                    best_guess: StateId(0),
                    alternates: vec![StateId(1)],
                    weight: 3.0,
                },
                UncertaintyEvent {
                    true_state: StateId(0),
                    best_guess: StateId(0),
                    alternates: vec![StateId(0)],
                    weight: 1.0,
                },
            ],
            patience: vec![0.5, 1.0],
        }
    }

    #[test]
    fn builds_and_validates_clean() {
        let model = HasaMdp::new(two_state_parts()).unwrap();
        assert_eq!(model.n_states(), 2);
        assert_eq!(model.n_actions(), 2);
        assert_eq!(model.np_col(), 2);
        let report = model.validate();
        assert!(report.is_ok(), "{report}");
    }

    #[test]
    fn event_weights_normalize_per_state() {
        let model = HasaMdp::new(two_state_parts()).unwrap();
        let evs = model.uncertainty().events_for(StateId(0));
        assert_eq!(evs.len(), 2);
        let total: f64 = evs.iter().map(|e| e.weight).sum();
        assert!((total - 1.0).abs() < 1e-15);
        // 3:1 ratio survives normalization.
        let pair = evs
            .iter()
            .find(|e| e.alternates == vec![StateId(1)])
            .unwrap();
        assert!((pair.weight - 0.75).abs() < 1e-15);
    }

    #[test]
    fn uncovered_state_gets_confident_self_event() {
        let model = HasaMdp::new(two_state_parts()).unwrap();
        let evs = model.uncertainty().events_for(StateId(1));
        assert_eq!(evs.len(), 1);
        assert_eq!(evs[0].best_guess, StateId(1));
        assert_eq!(evs[0].alternates, vec![StateId(1)]);
        assert_eq!(evs[0].weight, 1.0);
    }

    #[test]
    fn best_guess_stripped_from_larger_alternate_sets() {
        let mut parts = two_state_parts();
        parts.uncertainty_events = vec![UncertaintyEvent {
            true_state: StateId(0),
            best_guess: StateId(0),
            alternates: vec![StateId(0), StateId(1)],
            weight: 1.0,
        }];
        let model = HasaMdp::new(parts).unwrap();
        let evs = model.uncertainty().events_for(StateId(0));
        assert_eq!(evs[0].alternates, vec![StateId(1)]);
    }

    #[test]
    fn duplicate_events_merge() {
        let mut parts = two_state_parts();
        parts.uncertainty_events = vec![
            UncertaintyEvent {
                true_state: StateId(0),
                best_guess: StateId(0),
                alternates: vec![StateId(1)],
                weight: 1.0,
            },
            UncertaintyEvent {
                true_state: StateId(0),
                best_guess: StateId(0),
                alternates: vec![StateId(1)],
                weight: 2.0,
            },
        ];
        let model = HasaMdp::new(parts).unwrap();
        let evs = model.uncertainty().events_for(StateId(0));
        assert_eq!(evs.len(), 1);
        assert_eq!(evs[0].weight, 1.0);
    }

    #[test]
    fn empty_alternates_rejected() {
        let mut parts = two_state_parts();
        parts.uncertainty_events[0].alternates.clear();
        assert_eq!(
            HasaMdp::new(parts).unwrap_err(),
            ModelError::EmptyAlternates { index: 0 }
        );
    }

    #[test]
    fn non_policy_action_must_not_be_a_policy_action() {
        let mut parts = two_state_parts();
        parts.non_policy_action = "b".into();
        assert_eq!(
            HasaMdp::new(parts).unwrap_err(),
            ModelError::NonPolicyActionClash("b".into())
        );
    }

    #[test]
    fn shape_mismatch_names_the_field() {
        let mut parts = two_state_parts();
        parts.reward[0].pop();
        match HasaMdp::new(parts).unwrap_err() {
            ModelError::ShapeMismatch {
                field,
                expected,
                got,
            } => {
                assert_eq!(field, "reward[s]");
                assert_eq!((expected, got), (3, 2));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn validate_flags_bad_rows() {
        let mut parts = two_state_parts();
        parts.transition[0][1][0] = 0.9; // row now sums to 0.9
        parts.discount = 1.0;
        parts.patience[1] = 1.5;
        let model = HasaMdp::new(parts).unwrap();
        let report = model.validate();
        assert!(!report.is_ok());
        assert!(report.violations.iter().any(|v| matches!(
            v,
            Violation::TransitionRowSum {
                state: 0,
                action_col: 1,
                ..
            }
        )));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::DiscountOutOfRange { .. })));
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, Violation::PatienceOutOfRange { state: 1, .. })));
    }

    #[test]
    fn validate_passes_within_tolerance() {
        let mut parts = two_state_parts();
        parts.transition[0][0][0] = 0.5 + 4e-10;
        let model = HasaMdp::new(parts).unwrap();
        assert!(model.validate().is_ok());
    }

    #[test]
    fn name_lookups() {
        let model = HasaMdp::new(two_state_parts()).unwrap();
        assert_eq!(model.state_index("s1"), Some(StateId(1)));
        assert_eq!(model.action_index("b"), Some(ActionId(1)));
        assert_eq!(model.state_index("nope"), None);
        assert_eq!(model.non_policy_action(), "wait");
    }
}

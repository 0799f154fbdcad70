//! Exact policy evaluation and the partially constrained relaxation.
//!
//! Once aliasing turns a designed policy into executed behavior, the model
//! collapses to a Markov reward process and its value vector solves the
//! linear system `(I - gamma * P) v = r`. [`mrp_value`] solves it directly
//! (LU plus iterative refinement); [`policy_value`] weights the result by
//! the initial distribution, which is the objective every solver in this
//! crate optimizes.
//!
//! For a partial policy the executed behavior is not fully determined.
//! [`PcMdp`] is the optimistic relaxation built from
//! [`fixed_probability_bounds`](crate::aliasing::fixed_probability_bounds):
//! per state, the probability mass pinned down by decided states follows the
//! model, and only the uncommitted residual may be steered toward any single
//! candidate action (the non-policy action included). Value iterating this
//! relaxation and adding the tail correction `eps * gamma / (1 - gamma)`
//! yields a true upper bound on every completion's value.

use thiserror::Error;

use crate::aliasing::{fixed_probability_bounds, induce_stochastic, FixedProbabilityBounds};
use crate::linalg::{mat_vec, LuFactors};
use crate::model::{HasaMdp, StateId};
use crate::policy::{DeterministicPolicy, PartialPolicy, StochasticPolicy};
use crate::scalar::Scalar;

#[derive(Debug, Error, PartialEq)]
pub enum ValueError {
    #[error("policy evaluation system is singular to working precision")]
    SingularSystem,
    #[error("policy evaluation residual {residual:e} exceeds tolerance {tol:e}")]
    ResidualTooLarge { residual: f64, tol: f64 },
}

/// Value vector of the Markov reward process induced by executing `stoch`.
///
/// Solves `(I - gamma * P) v = r` where `P` and `r` mix the model's rows by
/// the execution probabilities. The defect `(I - gamma * P) v - r` is
/// polished by iterative refinement to below `1e-8` in sup norm (relaxed
/// proportionally for scalars coarser than `f64` or rewards far above unit
/// scale), otherwise an error is returned.
pub fn mrp_value<F: Scalar>(
    model: &HasaMdp<F>,
    stoch: &StochasticPolicy<F>,
) -> Result<Vec<F>, ValueError> {
    let n = model.n_states();
    let cols = model.np_col() + 1;
    let gamma = model.discount();

    let mut a = vec![F::zero(); n * n];
    let mut r = vec![F::zero(); n];
    for s in 0..n {
        let mix = &stoch.row(StateId(s))[..cols];
        let mut reward = F::zero();
        for (col, &w) in mix.iter().enumerate() {
            if w == F::zero() {
                continue;
            }
            reward += w * model.reward_col(s, col);
            for (s2, &t) in model.row(s, col).iter().enumerate() {
                a[s * n + s2] -= gamma * w * t;
            }
        }
        a[s * n + s] += F::one();
        r[s] = reward;
    }

    let lu = LuFactors::factor(a.clone(), n).map_err(|_| ValueError::SingularSystem)?;
    let mut v = lu.solve(&r);

    let scale = r
        .iter()
        .chain(v.iter())
        .fold(F::one(), |acc, x| acc.max(x.abs()));
    let tol = F::of(1e-8).max(F::epsilon() * F::of(100.0) * scale);

    let mut residual_norm = F::infinity();
    for _ in 0..5 {
        let av = mat_vec(&a, n, &v);
        let defect: Vec<F> = r.iter().zip(&av).map(|(&ri, &avi)| ri - avi).collect();
        residual_norm = defect.iter().fold(F::zero(), |acc, d| acc.max(d.abs()));
        if residual_norm <= tol {
            return Ok(v);
        }
        let dx = lu.solve(&defect);
        for (vi, di) in v.iter_mut().zip(&dx) {
            *vi += *di;
        }
    }
    Err(ValueError::ResidualTooLarge {
        residual: residual_norm.as_f64(),
        tol: tol.as_f64(),
    })
}

/// Per-state value of executing `policy` under aliasing.
pub fn policy_state_values<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
) -> Result<Vec<F>, ValueError> {
    mrp_value(model, &induce_stochastic(model, policy))
}

/// Initial-distribution-weighted value of `values`.
pub fn weighted_value<F: Scalar>(model: &HasaMdp<F>, values: &[F]) -> F {
    model
        .initial_dist()
        .iter()
        .zip(values)
        .map(|(&p, &v)| p * v)
        .sum()
}

/// The scalar objective: expected value of executing `policy` from the
/// initial distribution.
pub fn policy_value<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
) -> Result<F, ValueError> {
    Ok(weighted_value(model, &policy_state_values(model, policy)?))
}

// ──────────────────────── partially constrained MDP ───────────────────────

/// Optimistic relaxation of a partial policy. Each state owns one effective
/// transition row and reward per candidate action: the committed mixture
/// plus the free residual steered entirely toward that candidate.
/// Candidates range over the policy actions and then the non-policy action.
#[derive(Debug, Clone, PartialEq)]
pub struct PcMdp<F> {
    n_states: usize,
    n_candidates: usize,
    transition: Vec<F>,
    reward: Vec<F>,
    discount: F,
}

impl<F: Scalar> PcMdp<F> {
    pub fn n_states(&self) -> usize {
        self.n_states
    }

    /// Policy actions plus the non-policy action.
    pub fn n_candidates(&self) -> usize {
        self.n_candidates
    }

    pub fn discount(&self) -> F {
        self.discount
    }

    pub fn transition_row(&self, s: usize, candidate: usize) -> &[F] {
        let base = (s * self.n_candidates + candidate) * self.n_states;
        &self.transition[base..base + self.n_states]
    }

    pub fn reward(&self, s: usize, candidate: usize) -> F {
        self.reward[s * self.n_candidates + candidate]
    }

    pub fn from_bounds(model: &HasaMdp<F>, bounds: &FixedProbabilityBounds<F>) -> Self {
        let n = model.n_states();
        let m = model.n_actions();
        let cands = m + 1;
        let mut transition = vec![F::zero(); n * cands * n];
        let mut reward = vec![F::zero(); n * cands];

        for s in 0..n {
            let mut fixed_row = vec![F::zero(); n];
            let mut fixed_reward = F::zero();
            for a in 0..m {
                let w = bounds.action_lower[s][a];
                if w == F::zero() {
                    continue;
                }
                fixed_reward += w * model.reward_col(s, a);
                for (s2, &t) in model.row(s, a).iter().enumerate() {
                    fixed_row[s2] += w * t;
                }
            }
            let w_np = bounds.np_lower[s];
            if w_np > F::zero() {
                fixed_reward += w_np * model.reward_col(s, m);
                for (s2, &t) in model.row(s, m).iter().enumerate() {
                    fixed_row[s2] += w_np * t;
                }
            }

            let free = bounds.residual[s];
            for c in 0..cands {
                let base = (s * cands + c) * n;
                for (s2, &t) in model.row(s, c).iter().enumerate() {
                    transition[base + s2] = fixed_row[s2] + free * t;
                }
                reward[s * cands + c] = fixed_reward + free * model.reward_col(s, c);
            }
        }

        Self {
            n_states: n,
            n_candidates: cands,
            transition,
            reward,
            discount: model.discount(),
        }
    }
}

/// Relaxation of `partial` on `model`; see [`PcMdp`].
pub fn build_pc_mdp<F: Scalar>(model: &HasaMdp<F>, partial: &PartialPolicy) -> PcMdp<F> {
    PcMdp::from_bounds(model, &fixed_probability_bounds(model, partial))
}

/// Value iteration on the relaxation, from the zero vector.
///
/// Returns per-state upper bounds and the number of sweeps performed. After
/// the last sweep with sup-norm step `eps`, each state's bound is
/// `v(s) + eps * gamma / (1 - gamma)`, which dominates the relaxation's
/// optimum and hence the value of every completion of the partial policy.
pub fn vi_upper_bound<F: Scalar>(
    pc: &PcMdp<F>,
    max_iters: usize,
    epsilon_target: F,
) -> (Vec<F>, usize) {
    vi_upper_bound_from(
        pc,
        vec![F::zero(); pc.n_states()],
        max_iters,
        epsilon_target,
    )
}

/// Same as [`vi_upper_bound`] but warm-started from `v0` (the final bound is
/// valid regardless of the starting vector; a good start just converges in
/// fewer sweeps).
pub fn vi_upper_bound_from<F: Scalar>(
    pc: &PcMdp<F>,
    v0: Vec<F>,
    max_iters: usize,
    epsilon_target: F,
) -> (Vec<F>, usize) {
    assert!(max_iters >= 1, "value iteration needs at least one sweep");
    let n = pc.n_states();
    let gamma = pc.discount();
    let mut v = v0;
    let mut next = vec![F::zero(); n];
    let mut eps = F::infinity();
    let mut iters = 0;

    while iters < max_iters {
        for (s, slot) in next.iter_mut().enumerate() {
            let mut best = F::neg_infinity();
            for c in 0..pc.n_candidates {
                let mut q = pc.reward(s, c);
                let row = pc.transition_row(s, c);
                let mut acc = F::zero();
                for (s2, &t) in row.iter().enumerate() {
                    acc += t * v[s2];
                }
                q += gamma * acc;
                if q > best {
                    best = q;
                }
            }
            *slot = best;
        }
        eps = v
            .iter()
            .zip(&next)
            .fold(F::zero(), |acc, (&a, &b)| acc.max((a - b).abs()));
        std::mem::swap(&mut v, &mut next);
        iters += 1;
        if eps <= epsilon_target {
            break;
        }
    }

    let correction = eps * gamma / (F::one() - gamma);
    for vi in &mut v {
        *vi += correction;
    }
    (v, iters)
}

/// Initial-distribution-weighted upper bound for a partial policy.
pub fn partial_policy_bound<F: Scalar>(
    model: &HasaMdp<F>,
    partial: &PartialPolicy,
    max_iters: usize,
    epsilon_target: F,
) -> F {
    let pc = build_pc_mdp(model, partial);
    let (bounds, _) = vi_upper_bound(&pc, max_iters, epsilon_target);
    weighted_value(model, &bounds)
}

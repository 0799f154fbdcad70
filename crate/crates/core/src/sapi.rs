//! State-aliased policy improvement: hill climbing over deterministic
//! policies with exact evaluation at every step.
//!
//! Classic policy iteration is unsound here because switching one state's
//! action changes the executed behavior in other states (their guesses may
//! now conflict). SAPI therefore re-evaluates candidate policies exactly:
//! from the current policy, try every single-state substitution, move to the
//! best strictly improving one, and stop at a local optimum. Values strictly
//! increase, so the climb terminates. Random restarts escape poor basins;
//! each restart has its own RNG stream, making run `i` identical no matter
//! how many restarts surround it.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::model::{ActionId, HasaMdp, StateId};
use crate::policy::DeterministicPolicy;
use crate::scalar::Scalar;
use crate::valuation::{policy_value, ValueError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SapiMode {
    /// Scan all single-state substitutions, take the single best one.
    #[default]
    GlobalGreedy,
    /// Visit states in shuffled order, greedily fixing each state's action
    /// in place before moving on.
    PerStateGreedy,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SapiOptions<F> {
    pub mode: SapiMode,
    /// A substitution must beat the current value by more than this to be
    /// taken; blocks floating point cycling.
    pub improvement_threshold: F,
    /// Seeds the state visiting order of [`SapiMode::PerStateGreedy`].
    pub order_seed: u64,
}

impl<F: Scalar> Default for SapiOptions<F> {
    fn default() -> Self {
        Self {
            mode: SapiMode::GlobalGreedy,
            improvement_threshold: F::of(1e-12),
            order_seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SapiResult<F> {
    pub policy: DeterministicPolicy,
    pub value: F,
    /// Value after each accepted step, starting with the initial policy's
    /// value; strictly increasing.
    pub trace: Vec<F>,
    /// Accepted substitutions, `trace.len() - 1`.
    pub steps: usize,
    /// Which restart produced this result (0 for single runs).
    pub restart_index: usize,
}

/// Best single-state substitution of `pi`, with ties broken toward the
/// lowest (state, action) pair. `None` only for models with one action.
fn best_substitution<F: Scalar>(
    model: &HasaMdp<F>,
    pi: &DeterministicPolicy,
) -> Result<Option<(F, StateId, ActionId)>, ValueError> {
    let mut best: Option<(F, StateId, ActionId)> = None;
    for s in 0..model.n_states() {
        for a in 0..model.n_actions() {
            if ActionId(a) == pi.action(StateId(s)) {
                continue;
            }
            let v = policy_value(model, &pi.with(StateId(s), ActionId(a)))?;
            if best.as_ref().is_none_or(|(bv, _, _)| v > *bv) {
                best = Some((v, StateId(s), ActionId(a)));
            }
        }
    }
    Ok(best)
}

/// Climbs from `initial` to a single-substitution local optimum.
pub fn sapi_run<F: Scalar>(
    model: &HasaMdp<F>,
    initial: DeterministicPolicy,
    opts: &SapiOptions<F>,
) -> Result<SapiResult<F>, ValueError> {
    let mut order_rng = ChaCha8Rng::seed_from_u64(opts.order_seed);
    sapi_run_with_rng(model, initial, opts, &mut order_rng)
}

fn sapi_run_with_rng<F: Scalar>(
    model: &HasaMdp<F>,
    initial: DeterministicPolicy,
    opts: &SapiOptions<F>,
    order_rng: &mut ChaCha8Rng,
) -> Result<SapiResult<F>, ValueError> {
    let mut pi = initial;
    let mut value = policy_value(model, &pi)?;
    let mut trace = vec![value];

    match opts.mode {
        SapiMode::GlobalGreedy => loop {
            match best_substitution(model, &pi)? {
                Some((v, s, a)) if v > value + opts.improvement_threshold => {
                    pi.set(s, a);
                    value = v;
                    trace.push(v);
                }
                _ => break,
            }
        },
        SapiMode::PerStateGreedy => {
            use rand::seq::SliceRandom;
            let mut order: Vec<usize> = (0..model.n_states()).collect();
            loop {
                order.shuffle(order_rng);
                let mut improved = false;
                for &s in &order {
                    let mut best: Option<(F, ActionId)> = None;
                    for a in 0..model.n_actions() {
                        if ActionId(a) == pi.action(StateId(s)) {
                            continue;
                        }
                        let v = policy_value(model, &pi.with(StateId(s), ActionId(a)))?;
                        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
                            best = Some((v, ActionId(a)));
                        }
                    }
                    if let Some((v, a)) = best {
                        if v > value + opts.improvement_threshold {
                            pi.set(StateId(s), a);
                            value = v;
                            trace.push(v);
                            improved = true;
                        }
                    }
                }
                if !improved {
                    break;
                }
            }
        }
    }

    let steps = trace.len() - 1;
    Ok(SapiResult {
        policy: pi,
        value,
        trace,
        steps,
        restart_index: 0,
    })
}

/// Climbs from a random initial policy drawn from `seed`.
pub fn sapi_run_seeded<F: Scalar>(
    model: &HasaMdp<F>,
    seed: u64,
    opts: &SapiOptions<F>,
) -> Result<SapiResult<F>, ValueError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let initial = DeterministicPolicy::random(model.n_states(), model.n_actions(), &mut rng);
    sapi_run_with_rng(model, initial, opts, &mut rng)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SapiOutcome<F> {
    /// The best run; ties go to the lowest restart index.
    pub best: SapiResult<F>,
    /// Every restart's result, indexed by restart.
    pub runs: Vec<SapiResult<F>>,
}

/// Runs `n_restarts` independent climbs (in parallel) and keeps them all.
/// Restart `i` draws its initial policy and visiting order from stream `i`
/// of `seed`, so individual runs are reproducible in isolation.
pub fn sapi_restarts<F: Scalar>(
    model: &HasaMdp<F>,
    n_restarts: usize,
    seed: u64,
    opts: &SapiOptions<F>,
) -> Result<SapiOutcome<F>, ValueError> {
    assert!(n_restarts >= 1, "need at least one restart");
    let mut runs: Vec<SapiResult<F>> = (0..n_restarts)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let initial =
                DeterministicPolicy::random(model.n_states(), model.n_actions(), &mut rng);
            let mut result = sapi_run_with_rng(model, initial, opts, &mut rng)?;
            result.restart_index = i;
            Ok(result)
        })
        .collect::<Result<_, ValueError>>()?;

    let mut best = runs[0].clone();
    for run in &runs[1..] {
        if run.value > best.value {
            best = run.clone();
        }
    }
    runs.sort_by_key(|r| r.restart_index);
    Ok(SapiOutcome { best, runs })
}

//! Reference implementations the optimizers are checked against.
//!
//! * [`enumerate_optimal`]: brute-force search over every deterministic
//!   policy, guarded by a cap on `|A|^|S|`. Slow but unarguable.
//! * [`simulate_policy`]: Monte Carlo rollout of the operator behavior,
//!   sampled the causal way (hesitation event, patience coin, guess) rather
//!   than from precomputed execution probabilities, so it independently
//!   cross-checks the closed-form pipeline.
//! * [`random_model`]: seeded generator of small valid instances for
//!   property and acceptance tests.

use rand::distributions::{Distribution, Uniform};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::model::{HasaMdp, HasaMdpParts, StateId, UncertaintyEvent};
use crate::policy::{DeterministicPolicy, PartialPolicy};
use crate::scalar::Scalar;
use crate::valuation::{policy_value, ValueError};

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("policy space holds {space} assignments, over the cap of {cap}")]
    PolicySpaceExceedsCap { space: u128, cap: u64 },
    #[error(transparent)]
    Value(#[from] ValueError),
}

// ────────────────────────── exhaustive enumeration ────────────────────────

#[derive(Debug, Clone, PartialEq)]
pub struct EnumerationResult<F> {
    pub policy: DeterministicPolicy,
    pub value: F,
    /// Number of policies evaluated, `n_actions ^ n_states`.
    pub evaluated: u64,
}

/// Evaluates every deterministic policy and returns the best one. Ties go to
/// the lexicographically smallest action assignment. Refuses to run when
/// `n_actions ^ n_states` exceeds `cap`.
pub fn enumerate_optimal<F: Scalar>(
    model: &HasaMdp<F>,
    cap: u64,
) -> Result<EnumerationResult<F>, OracleError> {
    let n = model.n_states();
    let m = model.n_actions();
    let space = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if space > cap as u128 {
        return Err(OracleError::PolicySpaceExceedsCap { space, cap });
    }

    let mut assignment = vec![0usize; n];
    let mut best: Option<(F, DeterministicPolicy)> = None;
    let mut evaluated = 0u64;
    loop {
        let policy = DeterministicPolicy::new(
            assignment
                .iter()
                .map(|&a| crate::model::ActionId(a))
                .collect(),
            m,
        )
        .expect("odometer stays in range");
        let value = policy_value(model, &policy)?;
        evaluated += 1;
        // Strict improvement keeps the lexicographically smallest argmax,
        // since assignments are visited in lexicographic order.
        if best.as_ref().is_none_or(|(bv, _)| value > *bv) {
            best = Some((value, policy));
        }

        let mut i = n;
        loop {
            if i == 0 {
                let (value, policy) = best.expect("at least one policy was evaluated");
                return Ok(EnumerationResult {
                    policy,
                    value,
                    evaluated,
                });
            }
            i -= 1;
            assignment[i] += 1;
            if assignment[i] < m {
                break;
            }
            assignment[i] = 0;
        }
    }
}

// ───────────────────────────── Monte Carlo ────────────────────────────────

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimEstimate<F> {
    pub mean: F,
    pub std_error: F,
    pub episodes: usize,
    pub horizon: usize,
    pub seed: u64,
}

/// Draws an index from unnormalized cumulative weights.
fn pick(cum: &[f64], u: f64) -> usize {
    let total = *cum.last().expect("non-empty weight table");
    let target = u * total;
    let idx = cum.partition_point(|&c| c <= target);
    idx.min(cum.len() - 1)
}

/// Samples the executed action column (`n_actions` meaning the non-policy
/// action) the way the operator produces it: draw a hesitation event; on
/// conflict stall with probability `psi(s)`; otherwise act on a
/// classification guess.
pub fn sample_executed_column<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
    s: StateId,
    rng: &mut impl Rng,
) -> usize {
    let events = model.uncertainty().events_for(s);
    let mut acc = 0.0;
    let cum: Vec<f64> = events
        .iter()
        .map(|ev| {
            acc += ev.weight.as_f64();
            acc
        })
        .collect();
    let ev = &events[pick(&cum, rng.gen::<f64>())];
    let best_action = policy.action(ev.best_guess);
    let conflicts = ev
        .alternates
        .iter()
        .any(|&alt| policy.action(alt) != best_action);
    if conflicts && rng.gen::<f64>() < model.patience(s).as_f64() {
        return model.np_col();
    }
    let mut acc = 0.0;
    let cum_pc: Vec<f64> = model
        .classification_row(s)
        .iter()
        .map(|p| {
            acc += p.as_f64();
            acc
        })
        .collect();
    let guess = pick(&cum_pc, rng.gen::<f64>());
    policy.action(StateId(guess)).0
}

struct SimTables {
    cum_events: Vec<Vec<f64>>,
    event_conflicts: Vec<Vec<bool>>,
    cum_pc: Vec<Vec<f64>>,
    /// Indexed `[s * (n_actions + 1) + col]`.
    cum_t: Vec<Vec<f64>>,
    cum_init: Vec<f64>,
    patience: Vec<f64>,
    reward: Vec<Vec<f64>>,
}

impl SimTables {
    fn build<F: Scalar>(model: &HasaMdp<F>, policy: &DeterministicPolicy) -> Self {
        let n = model.n_states();
        let cols = model.np_col() + 1;
        let cumsum = |xs: &mut dyn Iterator<Item = f64>| -> Vec<f64> {
            let mut acc = 0.0;
            xs.map(|x| {
                acc += x;
                acc
            })
            .collect()
        };
        let mut cum_events = Vec::with_capacity(n);
        let mut event_conflicts = Vec::with_capacity(n);
        let mut cum_pc = Vec::with_capacity(n);
        let mut cum_t = Vec::with_capacity(n * cols);
        let mut reward = Vec::with_capacity(n);
        for s in 0..n {
            let sid = StateId(s);
            let events = model.uncertainty().events_for(sid);
            cum_events.push(cumsum(&mut events.iter().map(|e| e.weight.as_f64())));
            event_conflicts.push(
                events
                    .iter()
                    .map(|ev| {
                        let best = policy.action(ev.best_guess);
                        ev.alternates.iter().any(|&alt| policy.action(alt) != best)
                    })
                    .collect(),
            );
            cum_pc.push(cumsum(
                &mut model.classification_row(sid).iter().map(|p| p.as_f64()),
            ));
            for col in 0..cols {
                cum_t.push(cumsum(&mut model.row(s, col).iter().map(|p| p.as_f64())));
            }
            reward.push((0..cols).map(|c| model.reward_col(s, c).as_f64()).collect());
        }
        let cum_init = cumsum(&mut model.initial_dist().iter().map(|p| p.as_f64()));
        SimTables {
            cum_events,
            event_conflicts,
            cum_pc,
            cum_t,
            cum_init,
            patience: (0..n)
                .map(|s| model.patience(StateId(s)).as_f64())
                .collect(),
            reward,
        }
    }
}

/// Monte Carlo estimate of the executed policy value. Episodes are truncated
/// at `horizon` steps, which biases the mean low by at most
/// `gamma^horizon * r_max / (1 - gamma)`; pick the horizon accordingly (see
/// [`suggested_horizon`]). Each episode runs on its own deterministic RNG
/// stream, so results are reproducible for a given seed regardless of
/// thread count.
pub fn simulate_policy<F: Scalar>(
    model: &HasaMdp<F>,
    policy: &DeterministicPolicy,
    episodes: usize,
    horizon: usize,
    seed: u64,
) -> SimEstimate<F> {
    assert!(episodes >= 1, "need at least one episode");
    assert!(horizon >= 1, "need at least one step");
    let tables = SimTables::build(model, policy);
    let cols = model.np_col() + 1;
    let gamma = model.discount().as_f64();
    let actions: Vec<usize> = policy.actions().iter().map(|a| a.0).collect();

    let returns: Vec<f64> = (0..episodes)
        .into_par_iter()
        .map(|ep| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(ep as u64);
            let mut s = pick(&tables.cum_init, rng.gen::<f64>());
            let mut ret = 0.0;
            let mut disc = 1.0;
            for _ in 0..horizon {
                let col = {
                    let ev = pick(&tables.cum_events[s], rng.gen::<f64>());
                    if tables.event_conflicts[s][ev] && rng.gen::<f64>() < tables.patience[s] {
                        cols - 1
                    } else {
                        actions[pick(&tables.cum_pc[s], rng.gen::<f64>())]
                    }
                };
                ret += disc * tables.reward[s][col];
                disc *= gamma;
                s = pick(&tables.cum_t[s * cols + col], rng.gen::<f64>());
            }
            ret
        })
        .collect();

    let nf = episodes as f64;
    let mean = returns.iter().sum::<f64>() / nf;
    let var = if episodes > 1 {
        returns.iter().map(|r| (r - mean).powi(2)).sum::<f64>() / (nf - 1.0)
    } else {
        0.0
    };
    SimEstimate {
        mean: F::of(mean),
        std_error: F::of((var / nf).sqrt()),
        episodes,
        horizon,
        seed,
    }
}

/// Shortest horizon whose truncation bias is below `tol` for this model's
/// discount and reward magnitude. Clamped to `[1, 100_000]`.
pub fn suggested_horizon<F: Scalar>(model: &HasaMdp<F>, tol: f64) -> usize {
    let gamma = model.discount().as_f64();
    let cols = model.np_col() + 1;
    let mut r_max = 0.0f64;
    for s in 0..model.n_states() {
        for c in 0..cols {
            r_max = r_max.max(model.reward_col(s, c).as_f64().abs());
        }
    }
    if gamma <= 0.0 || r_max == 0.0 {
        return 1;
    }
    let tail_at = |h: f64| gamma.powf(h) * r_max / (1.0 - gamma);
    if tail_at(1.0) <= tol {
        return 1;
    }
    let h = (tol * (1.0 - gamma) / r_max).ln() / gamma.ln();
    (h.ceil() as usize).clamp(1, 100_000)
}

// ─────────────────────────── random instances ─────────────────────────────

fn dirichlet(rng: &mut impl Rng, n: usize) -> Vec<f64> {
    // Normalized unit exponentials, i.e. a flat Dirichlet draw.
    let uniform = Uniform::new(f64::MIN_POSITIVE, 1.0f64);
    let mut xs: Vec<f64> = (0..n).map(|_| -uniform.sample(rng).ln()).collect();
    let total: f64 = xs.iter().sum();
    for x in &mut xs {
        *x /= total;
    }
    xs
}

/// A seeded, always-valid random instance. Used as fodder for property
/// tests; roughly a third of the states get hesitation events toward other
/// states, the rest stay confident.
pub fn random_model<F: Scalar>(seed: u64, n_states: usize, n_actions: usize) -> HasaMdp<F> {
    assert!(n_states >= 1 && n_actions >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = n_states;
    let m = n_actions;

    let to_f = |xs: Vec<f64>| xs.into_iter().map(F::of).collect::<Vec<F>>();

    let transition: Vec<Vec<Vec<F>>> = (0..n)
        .map(|_| (0..=m).map(|_| to_f(dirichlet(&mut rng, n))).collect())
        .collect();
    let reward: Vec<Vec<F>> = (0..n)
        .map(|_| (0..=m).map(|_| F::of(rng.gen_range(-1.0..1.0))).collect())
        .collect();
    let classification: Vec<Vec<F>> = (0..n).map(|_| to_f(dirichlet(&mut rng, n))).collect();
    let initial_dist = to_f(dirichlet(&mut rng, n));
    let patience: Vec<F> = (0..n).map(|_| F::of(rng.gen_range(0.0..=1.0))).collect();
    let discount = F::of(rng.gen_range(0.3..0.9));

    let mut uncertainty_events = Vec::new();
    for s in 0..n {
        if rng.gen_bool(0.3) {
            continue; // confident state
        }
        for _ in 0..rng.gen_range(1..=3usize) {
            let best = StateId(rng.gen_range(0..n));
            let alternates: Vec<StateId> = (0..rng.gen_range(1..=2usize))
                .map(|_| StateId(rng.gen_range(0..n)))
                .collect();
            uncertainty_events.push(UncertaintyEvent {
                true_state: StateId(s),
                best_guess: best,
                alternates,
                weight: F::of(rng.gen_range(0.1..1.0)),
            });
        }
    }

    HasaMdp::new(HasaMdpParts {
        states: (0..n).map(|s| format!("s{s}")).collect(),
        actions: (0..m).map(|a| format!("a{a}")).collect(),
        non_policy_action: "np".into(),
        transition,
        reward,
        discount,
        initial_dist,
        classification,
        uncertainty_events,
        patience,
    })
    .expect("generated parts are well shaped")
}

/// Random partial policy deciding each state independently with probability
/// `decide_prob`.
pub fn random_partial(
    n_states: usize,
    n_actions: usize,
    decide_prob: f64,
    rng: &mut impl Rng,
) -> PartialPolicy {
    let mut partial = PartialPolicy::empty(n_states);
    for s in 0..n_states {
        if rng.gen_bool(decide_prob) {
            partial.decide(
                StateId(s),
                crate::model::ActionId(rng.gen_range(0..n_actions)),
            );
        }
    }
    partial
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aliasing::induce_stochastic;
    use crate::model::ActionId;

    #[test]
    fn random_models_validate() {
        for seed in 0..30 {
            let model: HasaMdp<f64> =
                random_model(seed, 1 + (seed as usize % 5), 1 + (seed as usize % 3));
            let report = model.validate();
            assert!(report.is_ok(), "seed {seed}: {report}");
        }
    }

    #[test]
    fn enumeration_counts_the_whole_space() {
        let model: HasaMdp<f64> = random_model(3, 3, 2);
        let result = enumerate_optimal(&model, 1_000_000).unwrap();
        assert_eq!(result.evaluated, 8);
        // The optimum dominates a couple of arbitrary policies.
        for policy in [
            DeterministicPolicy::uniform(3, ActionId(0)),
            DeterministicPolicy::uniform(3, ActionId(1)),
        ] {
            assert!(result.value >= policy_value(&model, &policy).unwrap() - 1e-12);
        }
    }

    #[test]
    fn enumeration_refuses_oversized_spaces() {
        let model: HasaMdp<f64> = random_model(4, 5, 4);
        let err = enumerate_optimal(&model, 1000).unwrap_err();
        assert_eq!(
            err,
            OracleError::PolicySpaceExceedsCap {
                space: 1024,
                cap: 1000
            }
        );
    }

    #[test]
    fn simulation_is_deterministic_per_seed() {
        let model: HasaMdp<f64> = random_model(11, 4, 2);
        let pi = DeterministicPolicy::uniform(4, ActionId(1));
        let a = simulate_policy(&model, &pi, 500, 30, 9);
        let b = simulate_policy(&model, &pi, 500, 30, 9);
        assert_eq!(a, b);
        let c = simulate_policy(&model, &pi, 500, 30, 10);
        assert_ne!(a.mean, c.mean);
    }

    #[test]
    fn executed_column_frequencies_match_the_closed_form() {
        let model: HasaMdp<f64> = random_model(21, 4, 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let pi = DeterministicPolicy::random(4, 3, &mut rng);
        let sp = induce_stochastic(&model, &pi);
        let draws = 200_000;
        for s in 0..4 {
            let mut counts = [0usize; 4];
            for _ in 0..draws {
                counts[sample_executed_column(&model, &pi, StateId(s), &mut rng)] += 1;
            }
            for (col, (&p, &count)) in sp.row(StateId(s)).iter().zip(&counts).enumerate() {
                let freq = count as f64 / draws as f64;
                let se = (p * (1.0 - p) / draws as f64).sqrt();
                assert!(
                    (freq - p).abs() <= 5.0 * se + 1e-4,
                    "state {s} column {col}: freq {freq} vs p {p}"
                );
            }
        }
    }

    #[test]
    fn horizon_shrinks_with_looser_tolerance() {
        let model: HasaMdp<f64> = random_model(2, 3, 2);
        let tight = suggested_horizon(&model, 1e-8);
        let loose = suggested_horizon(&model, 1e-2);
        assert!(tight >= loose);
        assert!(loose >= 1);
    }
}

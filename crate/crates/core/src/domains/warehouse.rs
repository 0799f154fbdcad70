//! Warehouse packing with an empirically shaped confusion table.
//!
//! Orders come in three sizes, each either needing gift wrap or not, giving
//! six states ordered `large, large_wrap, medium, medium_wrap, small,
//! small_wrap`. The six pack actions mirror the states. Packing a box at
//! least as large as the order completes it and a fresh order arrives from
//! `order_dist`; undersizing leaves a residual order one size smaller (its
//! wrap requirement resolved 50/50 when the original needed wrap). Slip
//! replaces the executed pack by a uniform one with probability `slip`; the
//! non-policy action holds the current order.
//!
//! The exact match pays 1; completing with the wrong box pays 1 minus
//! seeded noise drawn from `[0, reward_noise_range]`; undersizing pays
//! `undersize_reward` minus the same kind of noise. The classification
//! table fixes, per true state, how often operators guess each size
//! (columns of the published study table), split evenly across the wrap
//! variants; hesitation events are all unordered pairs weighted by average
//! classification mass.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require, DomainError};
use crate::model::{HasaMdp, HasaMdpParts, StateId, UncertaintyEvent};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct WarehouseConfig<F> {
    pub discount: F,
    /// Maximum noise subtracted from suboptimal pack rewards.
    pub reward_noise_range: F,
    pub slip: F,
    /// Patience, constant across states.
    pub patience: F,
    pub non_policy_reward: F,
    /// Base reward for packing a box too small.
    pub undersize_reward: F,
    /// Distribution of incoming orders over the six states.
    pub order_dist: [F; 6],
    pub seed: u64,
}

impl<F: Scalar> Default for WarehouseConfig<F> {
    fn default() -> Self {
        Self {
            discount: F::of(0.7),
            reward_noise_range: F::zero(),
            slip: F::of(0.05),
            patience: F::one(),
            non_policy_reward: F::of(-0.1),
            undersize_reward: F::of(0.5),
            order_dist: [F::of(1.0 / 6.0); 6],
            seed: 0,
        }
    }
}

/// How often operators guess each size per true size (fractions of the
/// published classification study, columns normalized over guesses). Index
/// `[true_size][guessed_size]` with sizes `large, medium, small`.
const SIZE_CONFUSION: [[f64; 3]; 3] = [
    [0.3268, 0.1634, 0.0098],
    [0.1250, 0.2500, 0.1250],
    [0.0098, 0.1634, 0.3268],
];

const STATE_NAMES: [&str; 6] = [
    "large",
    "large_wrap",
    "medium",
    "medium_wrap",
    "small",
    "small_wrap",
];

const ACTION_NAMES: [&str; 6] = [
    "pack_large",
    "pack_large_wrap",
    "pack_medium",
    "pack_medium_wrap",
    "pack_small",
    "pack_small_wrap",
];

/// Size rank: large 2, medium 1, small 0.
fn size_of(index: usize) -> usize {
    2 - index / 2
}

fn wraps(index: usize) -> bool {
    index % 2 == 1
}

fn state_of(size: usize, wrap: bool) -> usize {
    (2 - size) * 2 + usize::from(wrap)
}

pub fn make_warehouse<F: Scalar>(config: &WarehouseConfig<F>) -> Result<HasaMdp<F>, DomainError> {
    let gamma = config.discount.as_f64();
    require(
        (0.0..1.0).contains(&gamma),
        "discount",
        "must lie in [0, 1)",
    )?;
    let slip = config.slip.as_f64();
    require((0.0..=1.0).contains(&slip), "slip", "must lie in [0, 1]")?;
    let rnr = config.reward_noise_range.as_f64();
    require(
        rnr >= 0.0 && rnr.is_finite(),
        "reward_noise_range",
        "must be finite and >= 0",
    )?;
    let psi = config.patience.as_f64();
    require((0.0..=1.0).contains(&psi), "patience", "must lie in [0, 1]")?;
    let dist_sum: f64 = config.order_dist.iter().map(|p| p.as_f64()).sum();
    require(
        (dist_sum - 1.0).abs() <= 1e-9 && config.order_dist.iter().all(|p| p.as_f64() >= 0.0),
        "order_dist",
        format!("must be a distribution (sums to {dist_sum})"),
    )?;
    require(
        config.non_policy_reward.as_f64().is_finite()
            && config.undersize_reward.as_f64().is_finite(),
        "non_policy_reward",
        "rewards must be finite",
    )?;

    let n = 6;

    // Base outcome of packing box `a` for order `s`, before slip.
    let base_row = |s: usize, a: usize| -> Vec<F> {
        let order_size = size_of(s);
        let box_size = size_of(a);
        let mut row = vec![F::zero(); n];
        if box_size >= order_size {
            row.copy_from_slice(&config.order_dist);
        } else {
            let residual = order_size - 1;
            if wraps(s) {
                row[state_of(residual, true)] = F::of(0.5);
                row[state_of(residual, false)] = F::of(0.5);
            } else {
                row[state_of(residual, false)] = F::one();
            }
        }
        row
    };

    let keep = F::one() - config.slip;
    let sixth = config.slip / F::of(6.0);
    let mut transition = vec![vec![vec![F::zero(); n]; n + 1]; n];
    for (s, block) in transition.iter_mut().enumerate() {
        let bases: Vec<Vec<F>> = (0..n).map(|b| base_row(s, b)).collect();
        for a in 0..n {
            for s2 in 0..n {
                let mut p = keep * bases[a][s2];
                for base in &bases {
                    p += sixth * base[s2];
                }
                block[a][s2] = p;
            }
        }
        block[n][s] = F::one();
    }

    // Rewards: the exact match is clean, everything else loses seeded noise
    // in [0, reward_noise_range]; draws run state-major, action-minor.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reward = vec![vec![F::zero(); n + 1]; n];
    for (s, row) in reward.iter_mut().enumerate() {
        for (a, slot) in row.iter_mut().enumerate().take(n) {
            if a == s {
                *slot = F::one();
                continue;
            }
            let noise = F::of(rng.gen::<f64>()) * config.reward_noise_range;
            let base = if size_of(a) >= size_of(s) {
                F::one()
            } else {
                config.undersize_reward
            };
            *slot = base - noise;
        }
        row[n] = config.non_policy_reward;
    }

    // Classification: size confusion split evenly over the wrap variants.
    let mut classification = Vec::with_capacity(n);
    for t in 0..n {
        let row: Vec<F> = (0..n)
            .map(|g| F::of(SIZE_CONFUSION[2 - size_of(t)][2 - size_of(g)]))
            .collect();
        classification.push(row);
    }

    // Hesitation events: all unordered pairs, weighted by average
    // classification mass, better-classified member as best guess.
    let mut uncertainty_events = Vec::new();
    for (t, row) in classification.iter().enumerate() {
        for i in 0..n {
            for j in i + 1..n {
                let w = (row[i].as_f64() + row[j].as_f64()) / 2.0;
                let (best, alt) = if row[j].as_f64() > row[i].as_f64() {
                    (j, i)
                } else {
                    (i, j)
                };
                uncertainty_events.push(UncertaintyEvent {
                    true_state: StateId(t),
                    best_guess: StateId(best),
                    alternates: vec![StateId(alt)],
                    weight: F::of(w),
                });
            }
        }
    }

    let parts = HasaMdpParts {
        states: STATE_NAMES.iter().map(|s| s.to_string()).collect(),
        actions: ACTION_NAMES.iter().map(|a| a.to_string()).collect(),
        non_policy_action: "wait".into(),
        transition,
        reward,
        discount: config.discount,
        initial_dist: config.order_dist.to_vec(),
        classification,
        uncertainty_events,
        patience: vec![config.patience; n],
    };
    Ok(HasaMdp::new(parts).expect("warehouse parts are well shaped"))
}

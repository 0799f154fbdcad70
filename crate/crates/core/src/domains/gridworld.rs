//! Navigation gridworld with distance-driven state confusion.
//!
//! Cells are indexed row-major (`y * width + x`, `y` growing downward) and
//! the goal sits at the bottom-right corner. Moves are deterministic up to
//! slip: with probability `slip` the executed move is replaced by one of the
//! four moves uniformly. Off-grid moves stay in place; the goal is absorbing
//! with zero reward, every other cell pays `goal_reward` times the
//! probability of landing on the goal, plus seeded uniform noise of width
//! `reward_noise_range` (exactly zero when the range is zero).
//!
//! Confusion falls off with Manhattan distance: for true cell `t`,
//! `p_c(g | t)` is proportional to `1 / (d(t, g) + [t = g])^m` with decay
//! exponent `m`. Hesitation events are all unordered pairs of distinct
//! cells, the pair `{i, j}` weighted by `(p_c(i | t) + p_c(j | t)) / 2` and
//! normalized per true cell; the pair's better-classified member is the
//! best guess.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{require, DomainError};
use crate::model::{HasaMdp, HasaMdpParts, StateId, UncertaintyEvent};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct GridworldConfig<F> {
    pub width: usize,
    pub height: usize,
    /// Classification decay exponent; larger means sharper perception.
    pub decay_exponent: f64,
    pub discount: F,
    /// Full width of the zero-mean uniform reward noise.
    pub reward_noise_range: F,
    pub slip: F,
    /// Patience, constant across cells.
    pub patience: F,
    pub goal_reward: F,
    pub non_policy_reward: F,
    /// Drops hesitation pairs whose raw weight falls below this, before
    /// normalization. Zero keeps every pair; useful on large grids where
    /// the quadratic pair count dominates memory and solve time.
    pub pair_weight_floor: f64,
    pub seed: u64,
}

impl<F: Scalar> GridworldConfig<F> {
    pub fn new(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            decay_exponent: 5.0,
            discount: F::of(0.7),
            reward_noise_range: F::zero(),
            slip: F::of(0.05),
            patience: F::one(),
            goal_reward: F::of(100.0),
            non_policy_reward: F::of(-0.1),
            pair_weight_floor: 0.0,
            seed: 0,
        }
    }
}

/// The four moves, in action order: up, down, left, right.
const MOVES: [(isize, isize); 4] = [(0, -1), (0, 1), (-1, 0), (1, 0)];

pub fn make_gridworld<F: Scalar>(config: &GridworldConfig<F>) -> Result<HasaMdp<F>, DomainError> {
    let GridworldConfig { width, height, .. } = *config;
    require(width >= 1, "width", "must be at least 1")?;
    require(height >= 1, "height", "must be at least 1")?;
    require(
        config.decay_exponent >= 1.0 && config.decay_exponent.is_finite(),
        "decay_exponent",
        "must be finite and at least 1",
    )?;
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
    require(
        config.pair_weight_floor >= 0.0,
        "pair_weight_floor",
        "must be >= 0",
    )?;
    require(
        config.goal_reward.as_f64().is_finite() && config.non_policy_reward.as_f64().is_finite(),
        "goal_reward",
        "rewards must be finite",
    )?;

    let n = width * height;
    let goal = n - 1;
    let cell = |x: usize, y: usize| y * width + x;
    let coords = |s: usize| (s % width, s / width);

    let target = |s: usize, mv: usize| -> usize {
        let (x, y) = coords(s);
        let (dx, dy) = MOVES[mv];
        let nx = x as isize + dx;
        let ny = y as isize + dy;
        if nx < 0 || ny < 0 || nx >= width as isize || ny >= height as isize {
            s
        } else {
            cell(nx as usize, ny as usize)
        }
    };

    // Transitions: slip mixes the four base moves; the non-policy action
    // holds position; the goal absorbs everything.
    let slip_f = config.slip;
    let keep = F::one() - slip_f;
    let quarter = slip_f / F::of(4.0);
    let mut transition = vec![vec![vec![F::zero(); n]; 5]; n];
    for s in 0..n {
        if s == goal {
            for row in &mut transition[s] {
                row[goal] = F::one();
            }
            continue;
        }
        for a in 0..4 {
            transition[s][a][target(s, a)] += keep;
            for b in 0..4 {
                transition[s][a][target(s, b)] += quarter;
            }
        }
        transition[s][4][s] = F::one();
    }

    // Rewards. Noise draws follow a fixed (state-major, action-minor) order
    // over non-goal cells so that sweeps over the range reuse one pattern.
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut reward = vec![vec![F::zero(); 5]; n];
    for s in 0..n {
        if s == goal {
            continue;
        }
        for a in 0..4 {
            let noise = F::of(rng.gen::<f64>() - 0.5) * config.reward_noise_range;
            reward[s][a] = config.goal_reward * transition[s][a][goal] + noise;
        }
        reward[s][4] = config.non_policy_reward;
    }

    // Classification by Manhattan distance.
    let distance = |a: usize, b: usize| -> f64 {
        let (ax, ay) = coords(a);
        let (bx, by) = coords(b);
        (ax.abs_diff(bx) + ay.abs_diff(by)) as f64
    };
    let mut classification = Vec::with_capacity(n);
    let mut raw_rows = Vec::with_capacity(n);
    for t in 0..n {
        let raw: Vec<f64> = (0..n)
            .map(|g| {
                let d = distance(t, g) + if t == g { 1.0 } else { 0.0 };
                d.powf(-config.decay_exponent)
            })
            .collect();
        let total: f64 = raw.iter().sum();
        classification.push(raw.iter().map(|w| F::of(w / total)).collect::<Vec<F>>());
        raw_rows.push(raw);
    }

    // Hesitation events: every unordered pair of distinct cells, weighted by
    // the pair's average classification mass under the true cell.
    let mut uncertainty_events = Vec::new();
    for (t, row) in classification.iter().enumerate() {
        for i in 0..n {
            for j in i + 1..n {
                let w = (row[i].as_f64() + row[j].as_f64()) / 2.0;
                if w <= config.pair_weight_floor {
                    continue;
                }
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
        states: (0..n)
            .map(|s| {
                let (x, y) = coords(s);
                format!("cell_{x}_{y}")
            })
            .collect(),
        actions: vec!["up".into(), "down".into(), "left".into(), "right".into()],
        non_policy_action: "wait".into(),
        transition,
        reward,
        discount: config.discount,
        initial_dist: vec![F::of(1.0 / n as f64); n],
        classification,
        uncertainty_events,
        patience: vec![config.patience; n],
    };
    Ok(HasaMdp::new(parts).expect("gridworld parts are well shaped"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ActionId;

    fn config(w: usize, h: usize) -> GridworldConfig<f64> {
        GridworldConfig::new(w, h)
    }

    #[test]
    fn models_validate() {
        for (w, h) in [(1, 1), (1, 3), (3, 3), (4, 2)] {
            let model = make_gridworld(&config(w, h)).unwrap();
            let report = model.validate();
            assert!(report.is_ok(), "{w}x{h}: {report}");
            assert_eq!(model.n_states(), w * h);
            assert_eq!(model.n_actions(), 4);
        }
    }

    #[test]
    fn center_of_a_line_is_confused_equally() {
        // 1x3 line, decay 5: the center cell has distance 1 to both ends,
        // so its own weight 1/(0+1)^5 ties the neighbors' 1/1^5.
        let model = make_gridworld(&config(3, 1)).unwrap();
        let row = model.classification_row(StateId(1));
        for (g, &p) in row.iter().enumerate() {
            assert!((p - 1.0 / 3.0).abs() < 1e-12, "guess {g}: {p}");
        }
    }

    #[test]
    fn adjacent_pair_splits_evenly_at_decay_one() {
        let mut cfg = config(2, 1);
        cfg.decay_exponent = 1.0;
        let model = make_gridworld(&cfg).unwrap();
        let row = model.classification_row(StateId(0));
        assert!((row[0] - 0.5).abs() < 1e-12);
        assert!((row[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn sharper_decay_concentrates_on_the_true_cell() {
        let mut soft = config(3, 3);
        soft.decay_exponent = 1.0;
        let mut sharp = config(3, 3);
        sharp.decay_exponent = 8.0;
        let p_soft = make_gridworld(&soft)
            .unwrap()
            .classification_prob(StateId(4), StateId(4));
        let p_sharp = make_gridworld(&sharp)
            .unwrap()
            .classification_prob(StateId(4), StateId(4));
        assert!(p_sharp > p_soft);
    }

    #[test]
    fn goal_is_absorbing_and_pays_nothing() {
        let model = make_gridworld(&config(3, 3)).unwrap();
        let goal = StateId(8);
        for a in 0..4 {
            assert_eq!(model.transition_row(goal, ActionId(a))[8], 1.0);
            assert_eq!(model.reward(goal, ActionId(a)), 0.0);
        }
        assert_eq!(model.np_transition_row(goal)[8], 1.0);
        assert_eq!(model.np_reward(goal), 0.0);
    }

    #[test]
    fn stepping_onto_the_goal_pays_the_goal_reward() {
        let mut cfg = config(3, 3);
        cfg.slip = 0.0;
        let model = make_gridworld(&cfg).unwrap();
        // Cell (1,2) is left of the goal (2,2); "right" is action 3.
        let s = model.state_index("cell_1_2").unwrap();
        assert_eq!(model.reward(s, ActionId(3)), 100.0);
        // Moving away pays nothing (noise is off by default).
        assert_eq!(model.reward(s, ActionId(2)), 0.0);
        // Off-grid moves hold position.
        let corner = model.state_index("cell_0_0").unwrap();
        assert_eq!(model.transition_row(corner, ActionId(0))[corner.0], 1.0);
    }

    #[test]
    fn slip_dilutes_the_goal_step() {
        let mut cfg = config(3, 3);
        cfg.slip = 0.05;
        let model = make_gridworld(&cfg).unwrap();
        let s = model.state_index("cell_1_2").unwrap();
        // (1 - slip) + slip / 4 of the mass reaches the goal.
        assert!((model.reward(s, ActionId(3)) - 96.25).abs() < 1e-12);
    }

    #[test]
    fn noise_is_zero_mean_bounded_and_seed_stable() {
        let mut base = config(3, 3);
        base.slip = 0.0;
        let clean = make_gridworld(&base).unwrap();
        let mut noisy_cfg = base.clone();
        noisy_cfg.reward_noise_range = 2.0;
        let noisy = make_gridworld(&noisy_cfg).unwrap();
        let mut scaled_cfg = base.clone();
        scaled_cfg.reward_noise_range = 4.0;
        let scaled = make_gridworld(&scaled_cfg).unwrap();
        for s in 0..9 {
            if s == 8 {
                continue;
            }
            for a in 0..4 {
                let delta =
                    noisy.reward(StateId(s), ActionId(a)) - clean.reward(StateId(s), ActionId(a));
                assert!(
                    delta.abs() <= 1.0 + 1e-12,
                    "noise outside half-range: {delta}"
                );
                let delta4 =
                    scaled.reward(StateId(s), ActionId(a)) - clean.reward(StateId(s), ActionId(a));
                // Same seed, same pattern, scaled by the range.
                assert!((delta4 - 2.0 * delta).abs() < 1e-12);
            }
        }
        // A different seed reshuffles the noise.
        let mut reseeded_cfg = noisy_cfg.clone();
        reseeded_cfg.seed = 1;
        let reseeded = make_gridworld(&reseeded_cfg).unwrap();
        assert_ne!(noisy, reseeded);
    }

    #[test]
    fn hesitation_pairs_cover_all_distinct_cells() {
        let model = make_gridworld(&config(2, 2)).unwrap();
        for t in 0..4 {
            let events = model.uncertainty().events_for(StateId(t));
            assert_eq!(events.len(), 6); // C(4, 2)
            let total: f64 = events.iter().map(|e| e.weight).sum();
            assert!((total - 1.0).abs() < 1e-12);
            for ev in events {
                assert_eq!(ev.alternates.len(), 1);
                assert_ne!(ev.alternates[0], ev.best_guess);
                // The best guess is at least as classified as the alternate.
                let row = model.classification_row(StateId(t));
                assert!(row[ev.best_guess.0] >= row[ev.alternates[0].0]);
            }
        }
    }

    #[test]
    fn pair_floor_prunes_remote_pairs() {
        let mut cfg = config(3, 3);
        cfg.pair_weight_floor = 0.05;
        let full = make_gridworld(&config(3, 3)).unwrap();
        let floored = make_gridworld(&cfg).unwrap();
        let full_count = full.uncertainty().events().len();
        let floored_count = floored.uncertainty().events().len();
        assert!(floored_count < full_count);
        // Weights still normalize.
        assert!(floored.validate().is_ok());
    }

    #[test]
    fn construction_is_deterministic() {
        let a = make_gridworld(&config(4, 3)).unwrap();
        let b = make_gridworld(&config(4, 3)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bad_configs_are_rejected() {
        let mut cfg = config(0, 3);
        assert!(matches!(
            make_gridworld(&cfg),
            Err(DomainError::InvalidConfig { field: "width", .. })
        ));
        cfg = config(2, 2);
        cfg.discount = 1.0;
        assert!(matches!(
            make_gridworld(&cfg),
            Err(DomainError::InvalidConfig {
                field: "discount",
                ..
            })
        ));
        cfg = config(2, 2);
        cfg.slip = 1.5;
        assert!(matches!(
            make_gridworld(&cfg),
            Err(DomainError::InvalidConfig { field: "slip", .. })
        ));
        cfg = config(2, 2);
        cfg.decay_exponent = 0.5;
        assert!(matches!(
            make_gridworld(&cfg),
            Err(DomainError::InvalidConfig {
                field: "decay_exponent",
                ..
            })
        ));
    }
}

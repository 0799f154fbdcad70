//! Exact solver: branch and bound over partial policies.
//!
//! The search tree assigns actions to states in a fixed order (most
//! value-relevant states first, see [`order_states`]). Each node holds a
//! partial policy and an optimistic value from the partially constrained
//! relaxation ([`build_pc_mdp`] + [`vi_upper_bound_from`]); a node is pruned
//! when its bound cannot beat the incumbent. Leaves are evaluated exactly.
//! The incumbent starts from SAPI restarts, so the search only has to prove
//! optimality (or find the rare better policy).
//!
//! Determinism: children are expanded in descending one-step preference
//! order, the best-first frontier breaks bound ties by insertion sequence,
//! and the parallel mode only parallelizes child bound evaluation, leaving
//! all decisions on the sequential path.

use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use rayon::prelude::*;

use crate::model::{ActionId, HasaMdp, StateId};
use crate::policy::{DeterministicPolicy, PartialPolicy};
use crate::sapi::{sapi_restarts, SapiOptions};
use crate::scalar::Scalar;
use crate::valuation::{
    build_pc_mdp, policy_value, vi_upper_bound_from, weighted_value, ValueError,
};

/// States sorted by how much immediate weighted reward flows through them:
/// `score(s) = p_i(s) * sum_{s'} p_c(s | s') * max_a r(s', a)`, descending,
/// ties broken by state index. Deciding high-score states first tightens
/// bounds fastest.
pub fn order_states<F: Scalar>(model: &HasaMdp<F>) -> Vec<StateId> {
    let n = model.n_states();
    let cols = model.np_col() + 1;
    let max_r: Vec<F> = (0..n)
        .map(|s| {
            (0..cols)
                .map(|c| model.reward_col(s, c))
                .fold(F::neg_infinity(), F::max)
        })
        .collect();
    let mut scored: Vec<(f64, usize)> = (0..n)
        .map(|s| {
            let mut flow = F::zero();
            for (s2, &r) in max_r.iter().enumerate() {
                flow += model.classification_prob(StateId(s2), StateId(s)) * r;
            }
            ((model.initial_prob(StateId(s)) * flow).as_f64(), s)
        })
        .collect();
    scored.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));
    scored.into_iter().map(|(_, s)| StateId(s)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SearchOrder {
    /// Expand the frontier node with the largest bound first.
    #[default]
    BestFirst,
    /// Stack discipline; lighter frontier, usually more nodes.
    DepthFirst,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbConfig<F> {
    /// Sweep limit per node bound computation.
    pub vi_max_iters: usize,
    /// Early-exit threshold on the sup-norm VI step.
    pub epsilon_target: F,
    /// A node survives only if its bound exceeds incumbent + this.
    pub prune_tolerance: F,
    pub search_order: SearchOrder,
    /// SAPI restarts used to seed the incumbent; 0 starts from nothing.
    pub incumbent_restarts: usize,
    pub seed: u64,
    /// Evaluate sibling bounds on the rayon pool. Results are identical to
    /// the sequential mode.
    pub parallel: bool,
    /// Stop opening nodes once this many have been counted and return the
    /// incumbent; `None` searches to completion. An instance whose hesitation
    /// couples every state to every other tightens its relaxation only near
    /// the bottom of the tree, so a budget keeps such runs finite.
    pub node_budget: Option<usize>,
}

impl<F: Scalar> Default for BnbConfig<F> {
    fn default() -> Self {
        Self {
            vi_max_iters: 1000,
            epsilon_target: F::of(1e-10),
            prune_tolerance: F::of(1e-12),
            search_order: SearchOrder::BestFirst,
            incumbent_restarts: 10,
            seed: 0,
            parallel: false,
            node_budget: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BnbResult<F> {
    pub policy: DeterministicPolicy,
    pub value: F,
    /// Nodes whose bound or exact leaf value was computed, pruned ones
    /// included. The root is free and not counted.
    pub nodes_opened: usize,
    pub wall_time: Duration,
    /// False when the node budget ran out first; `value` is then only the
    /// best policy found, not a proven optimum.
    pub complete: bool,
    /// Largest bound still waiting on the frontier after a budget stop; the
    /// optimum is at most `max(value, frontier_bound)`. `None` when the
    /// search completed.
    pub frontier_bound: Option<F>,
}

/// A search node: a partial policy over the first `depth` states of the
/// branching order and its optimistic value.
#[derive(Debug, Clone, PartialEq)]
pub struct BnbNode<F> {
    pub partial: PartialPolicy,
    pub depth: usize,
    /// Initial-distribution-weighted relaxation bound; infinite at the root.
    pub bound: F,
}

struct Frontier<F> {
    entry: BnbNode<F>,
    /// Per-state bound vector, warm start for the children's VI.
    values: Vec<F>,
    seq: u64,
}

impl<F: Scalar> PartialEq for Frontier<F> {
    fn eq(&self, other: &Self) -> bool {
        self.seq == other.seq
    }
}
impl<F: Scalar> Eq for Frontier<F> {}
impl<F: Scalar> PartialOrd for Frontier<F> {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl<F: Scalar> Ord for Frontier<F> {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Max-heap: larger bound first, then earlier insertion.
        self.entry
            .bound
            .as_f64()
            .total_cmp(&other.entry.bound.as_f64())
            .then(other.seq.cmp(&self.seq))
    }
}

pub fn branch_and_bound<F: Scalar>(
    model: &HasaMdp<F>,
    config: &BnbConfig<F>,
) -> Result<BnbResult<F>, ValueError> {
    let start = Instant::now();
    let n = model.n_states();
    let m = model.n_actions();
    let order = order_states(model);

    let mut incumbent: Option<(F, DeterministicPolicy)> = if config.incumbent_restarts > 0 {
        let outcome = sapi_restarts(
            model,
            config.incumbent_restarts,
            config.seed,
            &SapiOptions::default(),
        )?;
        Some((outcome.best.value, outcome.best.policy))
    } else {
        None
    };

    let mut heap: BinaryHeap<Frontier<F>> = BinaryHeap::new();
    let mut stack: Vec<Frontier<F>> = Vec::new();
    let push = |frontier: &mut BinaryHeap<Frontier<F>>,
                stack: &mut Vec<Frontier<F>>,
                node: Frontier<F>,
                order_kind: SearchOrder| match order_kind {
        SearchOrder::BestFirst => frontier.push(node),
        SearchOrder::DepthFirst => stack.push(node),
    };

    let mut seq = 0u64;
    let root = Frontier {
        entry: BnbNode {
            partial: PartialPolicy::empty(n),
            depth: 0,
            bound: F::infinity(),
        },
        values: vec![F::zero(); n],
        seq,
    };
    push(&mut heap, &mut stack, root, config.search_order);
    let mut nodes_opened = 0usize;
    let mut frontier_bound: Option<F> = None;

    loop {
        if config
            .node_budget
            .is_some_and(|budget| nodes_opened >= budget)
        {
            // An empty frontier here means the search finished exactly at
            // the budget, so no bound is left behind.
            frontier_bound = match config.search_order {
                SearchOrder::BestFirst => heap.iter().map(|f| f.entry.bound).reduce(F::max),
                SearchOrder::DepthFirst => stack.iter().map(|f| f.entry.bound).reduce(F::max),
            };
            break;
        }
        let node = match config.search_order {
            SearchOrder::BestFirst => heap.pop(),
            SearchOrder::DepthFirst => stack.pop(),
        };
        let Some(Frontier { entry, values, .. }) = node else {
            break;
        };
        if let Some((inc, _)) = &incumbent {
            if entry.bound <= *inc + config.prune_tolerance {
                continue; // incumbent improved since this node was pushed
            }
        }

        let s = order[entry.depth];
        // One-step preference from the parent relaxation decides the
        // expansion order of the children.
        let parent_pc = build_pc_mdp(model, &entry.partial);
        let gamma = model.discount();
        let mut prefs: Vec<(f64, usize)> = (0..m)
            .map(|a| {
                let mut q = parent_pc.reward(s.0, a);
                let mut acc = F::zero();
                for (s2, &t) in parent_pc.transition_row(s.0, a).iter().enumerate() {
                    acc += t * values[s2];
                }
                q += gamma * acc;
                (q.as_f64(), a)
            })
            .collect();
        prefs.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));

        if entry.depth + 1 == n {
            // Children are complete policies; evaluate them exactly.
            for &(_, a) in &prefs {
                let total = entry
                    .partial
                    .with(s, ActionId(a))
                    .to_total()
                    .expect("last undecided state was just decided");
                let v = policy_value(model, &total)?;
                nodes_opened += 1;
                if incumbent.as_ref().is_none_or(|(inc, _)| v > *inc) {
                    incumbent = Some((v, total));
                }
            }
            continue;
        }

        let eval_child = |a: usize| -> Result<(usize, F, Vec<F>), ValueError> {
            let child = entry.partial.with(s, ActionId(a));
            let pc = build_pc_mdp(model, &child);
            let (bounds, _) = vi_upper_bound_from(
                &pc,
                values.clone(),
                config.vi_max_iters,
                config.epsilon_target,
            );
            let bound = weighted_value(model, &bounds);
            Ok((a, bound, bounds))
        };

        let evals: Vec<(usize, F, Vec<F>)> = if config.parallel {
            prefs
                .par_iter()
                .map(|&(_, a)| eval_child(a))
                .collect::<Result<_, _>>()?
        } else {
            prefs
                .iter()
                .map(|&(_, a)| eval_child(a))
                .collect::<Result<_, _>>()?
        };
        nodes_opened += evals.len();

        for (a, bound, bounds) in evals {
            if let Some((inc, _)) = &incumbent {
                if bound <= *inc + config.prune_tolerance {
                    continue;
                }
            }
            seq += 1;
            push(
                &mut heap,
                &mut stack,
                Frontier {
                    entry: BnbNode {
                        partial: entry.partial.with(s, ActionId(a)),
                        depth: entry.depth + 1,
                        bound,
                    },
                    values: bounds,
                    seq,
                },
                config.search_order,
            );
        }
    }

    // Only a budget stop without restarts can leave no incumbent; fall back
    // to a constant policy so the result still carries a real value.
    let (value, policy) = match incumbent {
        Some(pair) => pair,
        None => {
            let fallback = DeterministicPolicy::uniform(n, ActionId(0));
            (policy_value(model, &fallback)?, fallback)
        }
    };
    Ok(BnbResult {
        policy,
        value,
        nodes_opened,
        wall_time: start.elapsed(),
        complete: frontier_bound.is_none(),
        frontier_bound,
    })
}

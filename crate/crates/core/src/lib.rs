//! Solver toolkit for MDPs whose policies are executed by a human operator
//! who can confuse one state for another.
//!
//! The central object is [`HasaMdp`]: a finite MDP extended with a
//! classification table, weighted hesitation events, a patience factor, and
//! a reserved non-policy action the operator falls back to when hesitation
//! turns into a conflict. A designed deterministic policy induces executed
//! stochastic behavior ([`aliasing`]), which is evaluated exactly as a
//! Markov reward process ([`valuation`]) and optimized either by hill
//! climbing ([`sapi`]) or exactly by branch and bound over partial policies
//! ([`bnb`]). Benchmark domains, data calibration, JSON documents, and
//! brute-force/Monte Carlo oracles round out the toolkit.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below pin the common choices.

pub mod aliasing;
pub mod bnb;
pub mod calibration;
pub mod document;
pub mod domains;
mod linalg;
pub mod model;
pub mod oracle;
pub mod policy;
pub mod sapi;
pub mod scalar;
pub mod valuation;

pub use aliasing::{
    delay_probability, delay_vector, fixed_probability_bounds, induce_stochastic,
    FixedProbabilityBounds,
};
pub use bnb::{branch_and_bound, order_states, BnbConfig, BnbNode, BnbResult, SearchOrder};
pub use calibration::{
    estimate_classification, estimate_psi, estimate_psi_by_state, estimate_psi_pooled,
    estimate_uncertainty, parse_guess_records, parse_retry_records, CalibrationError, GuessRecord,
    RetryRecord,
};
pub use document::{
    document_to_model, model_to_document, parse_model, serialize_model, DocumentError,
    ModelDocument, UncertaintyEventDoc, SCHEMA_VERSION,
};
pub use domains::{make_gridworld, make_warehouse, DomainError, GridworldConfig, WarehouseConfig};
pub use model::{
    ActionId, HasaMdp, HasaMdpParts, ModelError, StateId, UncertaintyEvent, UncertaintyModel,
    ValidationReport, Violation, PROB_TOL,
};
pub use oracle::{
    enumerate_optimal, random_model, random_partial, sample_executed_column, simulate_policy,
    suggested_horizon, EnumerationResult, OracleError, SimEstimate,
};
pub use policy::{DeterministicPolicy, PartialPolicy, StochasticPolicy};
pub use sapi::{
    sapi_restarts, sapi_run, sapi_run_seeded, SapiMode, SapiOptions, SapiOutcome, SapiResult,
};
pub use scalar::Scalar;
pub use valuation::{
    build_pc_mdp, mrp_value, partial_policy_bound, policy_state_values, policy_value,
    vi_upper_bound, vi_upper_bound_from, weighted_value, PcMdp, ValueError,
};

// ── f64-backed aliases (the usual precision) ──────────────────────────────

pub type HasaMdp64 = HasaMdp<f64>;
pub type HasaMdpParts64 = HasaMdpParts<f64>;
pub type UncertaintyModel64 = UncertaintyModel<f64>;
pub type StochasticPolicy64 = StochasticPolicy<f64>;
pub type FixedProbabilityBounds64 = FixedProbabilityBounds<f64>;
pub type PcMdp64 = PcMdp<f64>;
pub type SapiOptions64 = SapiOptions<f64>;
pub type SapiResult64 = SapiResult<f64>;
pub type BnbConfig64 = BnbConfig<f64>;
pub type BnbResult64 = BnbResult<f64>;
pub type SimEstimate64 = SimEstimate<f64>;
pub type GridworldConfig64 = GridworldConfig<f64>;
pub type WarehouseConfig64 = WarehouseConfig<f64>;

// ── f32-backed aliases ─────────────────────────────────────────────────────

pub type HasaMdp32 = HasaMdp<f32>;
pub type HasaMdpParts32 = HasaMdpParts<f32>;
pub type UncertaintyModel32 = UncertaintyModel<f32>;
pub type StochasticPolicy32 = StochasticPolicy<f32>;
pub type FixedProbabilityBounds32 = FixedProbabilityBounds<f32>;
pub type PcMdp32 = PcMdp<f32>;
pub type SapiOptions32 = SapiOptions<f32>;
pub type SapiResult32 = SapiResult<f32>;
pub type BnbConfig32 = BnbConfig<f32>;
pub type BnbResult32 = BnbResult<f32>;
pub type SimEstimate32 = SimEstimate<f32>;
pub type GridworldConfig32 = GridworldConfig<f32>;
pub type WarehouseConfig32 = WarehouseConfig<f32>;

//! Batch front end for the state-aliased MDP toolkit.
//!
//! Subcommands cover the whole pipeline: generating benchmark domains
//! (`gen-domain`), solving a model with restarted hill climbing
//! (`solve-sapi`), branch and bound (`solve-bnb`), or exhaustive enumeration
//! (`solve-enum`), evaluating and simulating fixed policies (`eval`,
//! `simulate`), estimating model parameters from interaction logs
//! (`calibrate`), and reproducing the benchmark sweeps as CSV tables
//! (`experiment`).
//!
//! Reports print floats at twelve significant digits, so with a fixed seed
//! the output is byte-identical across runs; wall-clock timing appears only
//! in the branch and bound report and the experiment summary CSV. Exit
//! codes: 0 on success, 1 on runtime or validation failures, 2 on flag
//! misuse.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hasa_mdp::{
    branch_and_bound, delay_vector, enumerate_optimal, estimate_classification,
    estimate_psi_by_state, estimate_psi_pooled, estimate_uncertainty, make_gridworld,
    make_warehouse, parse_guess_records, parse_model, parse_retry_records, policy_state_values,
    sapi_restarts, serialize_model, simulate_policy, suggested_horizon, weighted_value, BnbConfig,
    CalibrationError, DeterministicPolicy, DocumentError, DomainError, GridworldConfig,
    GridworldConfig64, HasaMdp64, OracleError, SapiMode, SapiOptions, SearchOrder, StateId,
    UncertaintyEventDoc, ValidationReport, ValueError, WarehouseConfig, WarehouseConfig64,
    SCHEMA_VERSION,
};
use serde::{Deserialize, Serialize};
use thiserror::Error;

// ── errors ─────────────────────────────────────────────────────────────────

#[derive(Debug, Error)]
enum CliError {
    #[error("cannot read {}: {source}", path.display())]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    BadDocument {
        path: PathBuf,
        source: DocumentError,
    },
    #[error("{}: {report}", path.display())]
    InvalidModel {
        path: PathBuf,
        report: ValidationReport,
    },
    #[error("{}: {reason}", path.display())]
    BadPolicy { path: PathBuf, reason: String },
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error(transparent)]
    Calibration(#[from] CalibrationError),
    #[error(transparent)]
    Value(#[from] ValueError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error("{0}")]
    Usage(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            _ => 1,
        }
    }
}

// ── command line grammar ───────────────────────────────────────────────────

#[derive(Parser)]
#[command(
    name = "hasa",
    version,
    about = "Solver toolkit for MDPs whose policies are executed through a noisy human classifier"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark domain as a model document.
    GenDomain {
        #[command(subcommand)]
        domain: DomainCommand,
    },
    /// Hill-climb with random restarts and report the best policy found.
    SolveSapi(SolveSapiArgs),
    /// Solve to global optimality by branch and bound.
    SolveBnb(SolveBnbArgs),
    /// Solve tiny models by evaluating every deterministic policy.
    SolveEnum(SolveEnumArgs),
    /// Evaluate a fixed policy: start-weighted value, per-state values, delays.
    Eval(EvalArgs),
    /// Monte Carlo estimate of a policy's value, as an independent check.
    Simulate(SimulateArgs),
    /// Estimate classification, hesitation, and patience from logged records.
    Calibrate(CalibrateArgs),
    /// Sweep one config knob, solving at every value, and write CSV tables.
    Experiment {
        #[command(subcommand)]
        domain: ExperimentCommand,
    },
}

#[derive(Subcommand)]
enum DomainCommand {
    /// Square-grid navigation read off a display with distance-decay errors.
    Grid {
        #[command(flatten)]
        grid: GridArgs,
        /// Write the model document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Box-packing line whose order sizes are confused by the picker.
    Warehouse {
        #[command(flatten)]
        warehouse: WarehouseArgs,
        /// Write the model document here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum ExperimentCommand {
    /// Sweep over the grid navigation domain.
    Grid {
        #[command(flatten)]
        grid: GridArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
    /// Sweep over the box-packing domain.
    Warehouse {
        #[command(flatten)]
        warehouse: WarehouseArgs,
        #[command(flatten)]
        sweep: SweepArgs,
    },
}

#[derive(Args, Clone)]
struct GridArgs {
    /// Grid width in cells.
    #[arg(long)]
    w: usize,
    /// Grid height in cells.
    #[arg(long)]
    h: usize,
    /// Perception decay exponent; larger reads the display more reliably.
    #[arg(long, default_value_t = 5.0)]
    m: f64,
    /// Discount factor.
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
    /// Full width of the zero-mean uniform reward noise.
    #[arg(long, default_value_t = 0.0)]
    rnr: f64,
    /// Chance that a move slips to a uniformly random direction.
    #[arg(long, default_value_t = 0.05)]
    slip: f64,
    /// Patience, constant across cells.
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Reward for stepping onto the goal cell.
    #[arg(long, default_value_t = 100.0)]
    goal_reward: f64,
    /// Reward of the reserved wait action.
    #[arg(long, default_value_t = -0.1)]
    np_reward: f64,
    /// Drop hesitation pairs below this raw weight; 0 keeps every pair.
    #[arg(long, default_value_t = 0.0)]
    pair_floor: f64,
    /// Seeds the reward noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl GridArgs {
    fn config(&self) -> GridworldConfig64 {
        let mut config: GridworldConfig64 = GridworldConfig::new(self.w, self.h);
        config.decay_exponent = self.m;
        config.discount = self.gamma;
        config.reward_noise_range = self.rnr;
        config.slip = self.slip;
        config.patience = self.psi;
        config.goal_reward = self.goal_reward;
        config.non_policy_reward = self.np_reward;
        config.pair_weight_floor = self.pair_floor;
        config.seed = self.seed;
        config
    }
}

#[derive(Args, Clone)]
struct WarehouseArgs {
    /// Discount factor.
    #[arg(long, default_value_t = 0.7)]
    gamma: f64,
    /// Maximum noise subtracted from suboptimal pack rewards.
    #[arg(long, default_value_t = 0.0)]
    rnr: f64,
    /// Chance that a pack lands in a uniformly random state.
    #[arg(long, default_value_t = 0.05)]
    slip: f64,
    /// Patience, constant across states.
    #[arg(long, default_value_t = 1.0)]
    psi: f64,
    /// Reward of the reserved wait action.
    #[arg(long, default_value_t = -0.1)]
    np_reward: f64,
    /// Base reward for packing a box one size too small.
    #[arg(long, default_value_t = 0.5)]
    undersize_reward: f64,
    /// Comma-separated order distribution over the six states.
    #[arg(long, value_delimiter = ',')]
    order_dist: Option<Vec<f64>>,
    /// Seeds the reward noise.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl WarehouseArgs {
    fn config(&self) -> Result<WarehouseConfig64, CliError> {
        let mut config = WarehouseConfig::<f64> {
            discount: self.gamma,
            reward_noise_range: self.rnr,
            slip: self.slip,
            patience: self.psi,
            non_policy_reward: self.np_reward,
            undersize_reward: self.undersize_reward,
            seed: self.seed,
            ..WarehouseConfig::default()
        };
        if let Some(dist) = &self.order_dist {
            if dist.len() != 6 {
                return Err(CliError::Usage(format!(
                    "--order-dist needs exactly 6 values, got {}",
                    dist.len()
                )));
            }
            config.order_dist.copy_from_slice(dist);
        }
        Ok(config)
    }
}

#[derive(Args)]
struct SolveSapiArgs {
    /// Model document to solve.
    #[arg(long)]
    model: PathBuf,
    /// Independent restarts; the best result wins.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Seeds initial policies and visiting orders.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Substitution strategy per climbing step.
    #[arg(long, value_enum, default_value_t = ModeArg::Global)]
    mode: ModeArg,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveBnbArgs {
    /// Model document to solve.
    #[arg(long)]
    model: PathBuf,
    /// Value iteration sweep limit per node bound.
    #[arg(long, default_value_t = 1000)]
    vi_iters: usize,
    /// Early-exit threshold on the sup-norm value iteration step.
    #[arg(long, default_value_t = 1e-10)]
    epsilon_target: f64,
    /// A node survives only if its bound exceeds the incumbent by more.
    #[arg(long, default_value_t = 1e-12)]
    prune_tol: f64,
    /// Frontier discipline.
    #[arg(long, value_enum, default_value_t = OrderArg::BestFirst)]
    order: OrderArg,
    /// Evaluate sibling bounds on the thread pool; results are identical.
    #[arg(long)]
    parallel: bool,
    /// Hill-climbing restarts that seed the incumbent; 0 starts cold.
    #[arg(long, default_value_t = 10)]
    restarts: usize,
    /// Seeds the incumbent hill climbing.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Give up after opening this many nodes and report the best found.
    #[arg(long)]
    node_budget: Option<usize>,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SolveEnumArgs {
    /// Model document to solve.
    #[arg(long)]
    model: PathBuf,
    /// Refuse to enumerate more policies than this.
    #[arg(long, default_value_t = 1_000_000)]
    cap: u64,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    /// Model document.
    #[arg(long)]
    model: PathBuf,
    /// Policy document, or any solve report containing a policy.
    #[arg(long)]
    policy: PathBuf,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Model document.
    #[arg(long)]
    model: PathBuf,
    /// Policy document, or any solve report containing a policy.
    #[arg(long)]
    policy: PathBuf,
    /// Episodes to sample.
    #[arg(long, default_value_t = 10_000)]
    episodes: usize,
    /// Steps per episode; defaults to the discount-derived truncation point.
    #[arg(long)]
    horizon: Option<usize>,
    /// Seeds the episode streams.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CalibrateArgs {
    /// Guess log: one `true,best,alt1;alt2` record per line.
    #[arg(long)]
    records: PathBuf,
    /// Retry log: one `true,count` record per line; enables patience output.
    #[arg(long)]
    retries: Option<PathBuf>,
    /// Comma-separated state names fixing row and column order.
    #[arg(long, value_delimiter = ',', required = true)]
    states: Vec<String>,
    /// Add-one smoothing for the classification rows.
    #[arg(long)]
    smoothing: bool,
    /// Also write a JSON report here.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct SweepArgs {
    /// Which config knob the sweep varies; the domain's own flag is ignored.
    #[arg(long, value_enum)]
    sweep: SweepVar,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Hill-climbing runs per sweep value.
    #[arg(long, default_value_t = 30)]
    runs: usize,
    /// Skip branch and bound; normalized values stay empty.
    #[arg(long)]
    no_bnb: bool,
    /// Per-setting node budget for branch and bound.
    #[arg(long)]
    node_budget: Option<usize>,
    /// Directory receiving sapi_values.csv and bnb_summary.csv.
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Best single-state substitution over the whole policy.
    Global,
    /// Greedy per-state fixes in a shuffled order.
    PerState,
}

impl ModeArg {
    fn label(self) -> &'static str {
        match self {
            ModeArg::Global => "global",
            ModeArg::PerState => "per-state",
        }
    }
}

impl From<ModeArg> for SapiMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Global => SapiMode::GlobalGreedy,
            ModeArg::PerState => SapiMode::PerStateGreedy,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderArg {
    /// Expand the frontier node with the largest bound first.
    BestFirst,
    /// Stack discipline; smaller frontier, usually more nodes.
    DepthFirst,
}

impl From<OrderArg> for SearchOrder {
    fn from(order: OrderArg) -> Self {
        match order {
            OrderArg::BestFirst => SearchOrder::BestFirst,
            OrderArg::DepthFirst => SearchOrder::DepthFirst,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SweepVar {
    /// Discount factor.
    Gamma,
    /// Reward noise range.
    Rnr,
}

impl SweepVar {
    fn label(self) -> &'static str {
        match self {
            SweepVar::Gamma => "gamma",
            SweepVar::Rnr => "rnr",
        }
    }
}

// ── report documents ───────────────────────────────────────────────────────

#[derive(Serialize, Deserialize)]
struct AssignmentEntry {
    state: String,
    action: String,
}

#[derive(Serialize, Deserialize)]
struct PolicyBody {
    assignment: Vec<AssignmentEntry>,
}

#[derive(Serialize)]
struct SapiReport {
    schema_version: u32,
    solver: &'static str,
    value: f64,
    restarts: usize,
    seed: u64,
    mode: &'static str,
    best_restart: usize,
    steps: usize,
    policy: PolicyBody,
}

#[derive(Serialize)]
struct BnbReport {
    schema_version: u32,
    solver: &'static str,
    value: f64,
    nodes_opened: usize,
    complete: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    frontier_bound: Option<f64>,
    wall_time_s: f64,
    seed: u64,
    policy: PolicyBody,
}

#[derive(Serialize)]
struct EnumReport {
    schema_version: u32,
    solver: &'static str,
    value: f64,
    policies_evaluated: u64,
    policy: PolicyBody,
}

#[derive(Serialize)]
struct StateValueEntry {
    state: String,
    value: f64,
    delay: f64,
}

#[derive(Serialize)]
struct EvalReport {
    schema_version: u32,
    value: f64,
    per_state: Vec<StateValueEntry>,
    policy: PolicyBody,
}

#[derive(Serialize)]
struct SimReport {
    schema_version: u32,
    mean: f64,
    std_error: f64,
    episodes: usize,
    horizon: usize,
    seed: u64,
    closed_form_value: f64,
}

#[derive(Serialize)]
struct CalibrationReport {
    schema_version: u32,
    states: Vec<String>,
    classification: Vec<Vec<f64>>,
    uncertainty_events: Vec<UncertaintyEventDoc>,
    #[serde(skip_serializing_if = "Option::is_none")]
    patience: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pooled_patience: Option<f64>,
}

// ── shared helpers ─────────────────────────────────────────────────────────

/// Twelve significant digits; the fixed width keeps reports byte-stable.
fn fmt_float(x: f64) -> String {
    format!("{x:.11e}")
}

fn read_file(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    fs::write(path, text).map_err(|source| CliError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, report: &T) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(report).expect("reports always serialize");
    text.push('\n');
    write_file(path, &text)
}

/// Parses and validates a model document; any violation refuses the run.
fn load_model(path: &Path) -> Result<HasaMdp64, CliError> {
    let text = read_file(path)?;
    let model = parse_model(&text).map_err(|source| CliError::BadDocument {
        path: path.to_path_buf(),
        source,
    })?;
    let report = model.validate();
    if !report.is_ok() {
        return Err(CliError::InvalidModel {
            path: path.to_path_buf(),
            report,
        });
    }
    Ok(model)
}

/// Accepts either a standalone policy document (`schema_version` +
/// `assignment`) or any solve report carrying a `policy` field.
fn load_policy(path: &Path, model: &HasaMdp64) -> Result<DeterministicPolicy, CliError> {
    let bad = |reason: String| CliError::BadPolicy {
        path: path.to_path_buf(),
        reason,
    };
    let text = read_file(path)?;
    let root: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| bad(format!("invalid JSON: {e}")))?;

    let body = if root.get("assignment").is_some() {
        let version = root
            .get("schema_version")
            .and_then(serde_json::Value::as_u64)
            .ok_or_else(|| bad("missing schema_version".into()))?;
        if version != u64::from(SCHEMA_VERSION) {
            return Err(bad(format!(
                "unsupported schema version {version}, expected {SCHEMA_VERSION}"
            )));
        }
        root.get("assignment").cloned().expect("checked above")
    } else if let Some(report) = root.get("policy") {
        report
            .get("assignment")
            .cloned()
            .ok_or_else(|| bad("policy field has no assignment".into()))?
    } else {
        return Err(bad("no policy assignment found".into()));
    };

    let entries: Vec<AssignmentEntry> =
        serde_json::from_value(body).map_err(|e| bad(format!("malformed assignment: {e}")))?;
    let mut slots: Vec<Option<hasa_mdp::ActionId>> = vec![None; model.n_states()];
    for entry in &entries {
        let s = model
            .state_index(&entry.state)
            .ok_or_else(|| bad(format!("unknown state {:?}", entry.state)))?;
        if entry.action == model.non_policy_action() {
            return Err(bad(format!(
                "the reserved action {:?} cannot be assigned",
                entry.action
            )));
        }
        let a = model
            .action_index(&entry.action)
            .ok_or_else(|| bad(format!("unknown action {:?}", entry.action)))?;
        if slots[s.0].is_some() {
            return Err(bad(format!("state {:?} assigned twice", entry.state)));
        }
        slots[s.0] = Some(a);
    }
    let actions = slots
        .into_iter()
        .enumerate()
        .map(|(s, slot)| {
            slot.ok_or_else(|| bad(format!("state {:?} has no action", model.state_names()[s])))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(DeterministicPolicy::new(actions, model.n_actions()).expect("indices already checked"))
}

fn policy_body(model: &HasaMdp64, policy: &DeterministicPolicy) -> PolicyBody {
    let assignment = (0..model.n_states())
        .map(|s| AssignmentEntry {
            state: model.state_names()[s].clone(),
            action: model.action_names()[policy.action(StateId(s)).0].clone(),
        })
        .collect();
    PolicyBody { assignment }
}

fn print_policy(model: &HasaMdp64, policy: &DeterministicPolicy) {
    let width = model
        .state_names()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0);
    println!("policy:");
    for s in 0..model.n_states() {
        println!(
            "  {:<width$} -> {}",
            model.state_names()[s],
            model.action_names()[policy.action(StateId(s)).0],
        );
    }
}

fn print_model_header(path: &Path, model: &HasaMdp64) {
    println!("model: {}", path.display());
    println!(
        "states: {}  actions: {}  discount: {}",
        model.n_states(),
        model.n_actions(),
        fmt_float(model.discount()),
    );
}

fn require(ok: bool, message: &str) -> Result<(), CliError> {
    if ok {
        Ok(())
    } else {
        Err(CliError::Usage(message.into()))
    }
}

// ── subcommand bodies ──────────────────────────────────────────────────────

fn run_gen_domain(domain: DomainCommand) -> Result<(), CliError> {
    let (model, out) = match domain {
        DomainCommand::Grid { grid, out } => (make_gridworld(&grid.config())?, out),
        DomainCommand::Warehouse { warehouse, out } => (make_warehouse(&warehouse.config()?)?, out),
    };
    let report = model.validate();
    assert!(report.is_ok(), "generated model must validate: {report}");
    let text = serialize_model(&model);
    match out {
        Some(path) => {
            write_file(&path, &text)?;
            println!(
                "wrote {} ({} states, {} actions)",
                path.display(),
                model.n_states(),
                model.n_actions(),
            );
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run_solve_sapi(args: SolveSapiArgs) -> Result<(), CliError> {
    require(args.restarts >= 1, "--restarts must be at least 1")?;
    let model = load_model(&args.model)?;
    let opts = SapiOptions {
        mode: args.mode.into(),
        ..SapiOptions::default()
    };
    let outcome = sapi_restarts(&model, args.restarts, args.seed, &opts)?;

    print_model_header(&args.model, &model);
    println!(
        "solver: sapi  restarts: {}  seed: {}  mode: {}",
        args.restarts,
        args.seed,
        args.mode.label(),
    );
    println!("runs:");
    for run in &outcome.runs {
        println!(
            "  restart {:>3}: steps {:>3}  value {}",
            run.restart_index,
            run.steps,
            fmt_float(run.value),
        );
    }
    let best = &outcome.best;
    println!(
        "best restart: {}  steps: {}",
        best.restart_index, best.steps
    );
    println!("value: {}", fmt_float(best.value));
    print_policy(&model, &best.policy);

    if let Some(path) = &args.out {
        write_json(
            path,
            &SapiReport {
                schema_version: SCHEMA_VERSION,
                solver: "sapi",
                value: best.value,
                restarts: args.restarts,
                seed: args.seed,
                mode: args.mode.label(),
                best_restart: best.restart_index,
                steps: best.steps,
                policy: policy_body(&model, &best.policy),
            },
        )?;
    }
    Ok(())
}

fn run_solve_bnb(args: SolveBnbArgs) -> Result<(), CliError> {
    require(args.vi_iters >= 1, "--vi-iters must be at least 1")?;
    let model = load_model(&args.model)?;
    let config = BnbConfig {
        vi_max_iters: args.vi_iters,
        epsilon_target: args.epsilon_target,
        prune_tolerance: args.prune_tol,
        search_order: args.order.into(),
        incumbent_restarts: args.restarts,
        seed: args.seed,
        parallel: args.parallel,
        node_budget: args.node_budget,
    };
    let result = branch_and_bound(&model, &config)?;

    print_model_header(&args.model, &model);
    println!(
        "solver: bnb  order: {}  restarts: {}  seed: {}",
        match args.order {
            OrderArg::BestFirst => "best-first",
            OrderArg::DepthFirst => "depth-first",
        },
        args.restarts,
        args.seed,
    );
    println!("nodes opened: {}", result.nodes_opened);
    match result.frontier_bound {
        None => println!("value: {}", fmt_float(result.value)),
        Some(ceiling) => {
            println!(
                "incomplete: node budget exhausted; best found {}  optimum at most {}",
                fmt_float(result.value),
                fmt_float(ceiling.max(result.value)),
            );
            println!("value: {}", fmt_float(result.value));
        }
    }
    print_policy(&model, &result.policy);
    // Timing last, so everything above stays byte-stable across runs.
    println!("wall time: {:.3}s", result.wall_time.as_secs_f64());

    if let Some(path) = &args.out {
        write_json(
            path,
            &BnbReport {
                schema_version: SCHEMA_VERSION,
                solver: "bnb",
                value: result.value,
                nodes_opened: result.nodes_opened,
                complete: result.complete,
                frontier_bound: result.frontier_bound,
                wall_time_s: result.wall_time.as_secs_f64(),
                seed: args.seed,
                policy: policy_body(&model, &result.policy),
            },
        )?;
    }
    Ok(())
}

fn run_solve_enum(args: SolveEnumArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let result = enumerate_optimal(&model, args.cap)?;

    print_model_header(&args.model, &model);
    println!("solver: enum  policies evaluated: {}", result.evaluated);
    println!("value: {}", fmt_float(result.value));
    print_policy(&model, &result.policy);

    if let Some(path) = &args.out {
        write_json(
            path,
            &EnumReport {
                schema_version: SCHEMA_VERSION,
                solver: "enum",
                value: result.value,
                policies_evaluated: result.evaluated,
                policy: policy_body(&model, &result.policy),
            },
        )?;
    }
    Ok(())
}

fn run_eval(args: EvalArgs) -> Result<(), CliError> {
    let model = load_model(&args.model)?;
    let policy = load_policy(&args.policy, &model)?;
    let values = policy_state_values(&model, &policy)?;
    let value = weighted_value(&model, &values);
    let delays = delay_vector(&model, &policy);

    print_model_header(&args.model, &model);
    println!("policy: {}", args.policy.display());
    println!("value: {}", fmt_float(value));
    println!("per state:");
    let width = model
        .state_names()
        .iter()
        .map(String::len)
        .max()
        .unwrap_or(0);
    for s in 0..model.n_states() {
        println!(
            "  {:<width$}  value {}  delay {}",
            model.state_names()[s],
            fmt_float(values[s]),
            fmt_float(delays[s]),
        );
    }

    if let Some(path) = &args.out {
        let per_state = (0..model.n_states())
            .map(|s| StateValueEntry {
                state: model.state_names()[s].clone(),
                value: values[s],
                delay: delays[s],
            })
            .collect();
        write_json(
            path,
            &EvalReport {
                schema_version: SCHEMA_VERSION,
                value,
                per_state,
                policy: policy_body(&model, &policy),
            },
        )?;
    }
    Ok(())
}

fn run_simulate(args: SimulateArgs) -> Result<(), CliError> {
    require(args.episodes >= 1, "--episodes must be at least 1")?;
    require(args.horizon != Some(0), "--horizon must be at least 1")?;
    let model = load_model(&args.model)?;
    let policy = load_policy(&args.policy, &model)?;
    let horizon = args
        .horizon
        .unwrap_or_else(|| suggested_horizon(&model, 1e-6));
    let estimate = simulate_policy(&model, &policy, args.episodes, horizon, args.seed);
    let closed = weighted_value(&model, &policy_state_values(&model, &policy)?);

    print_model_header(&args.model, &model);
    println!("policy: {}", args.policy.display());
    println!(
        "episodes: {}  horizon: {}  seed: {}",
        estimate.episodes, estimate.horizon, estimate.seed,
    );
    println!(
        "mean: {}  std error: {}",
        fmt_float(estimate.mean),
        fmt_float(estimate.std_error)
    );
    let diff = (estimate.mean - closed).abs();
    let sigmas = if estimate.std_error > 0.0 {
        diff / estimate.std_error
    } else if diff == 0.0 {
        0.0
    } else {
        f64::INFINITY
    };
    println!(
        "closed form: {}  |difference|: {} ({:.2} std errors)",
        fmt_float(closed),
        fmt_float(diff),
        sigmas,
    );

    if let Some(path) = &args.out {
        write_json(
            path,
            &SimReport {
                schema_version: SCHEMA_VERSION,
                mean: estimate.mean,
                std_error: estimate.std_error,
                episodes: estimate.episodes,
                horizon: estimate.horizon,
                seed: estimate.seed,
                closed_form_value: closed,
            },
        )?;
    }
    Ok(())
}

fn run_calibrate(args: CalibrateArgs) -> Result<(), CliError> {
    let mut unique = args.states.clone();
    unique.sort();
    unique.dedup();
    require(
        unique.len() == args.states.len(),
        "--states must not repeat names",
    )?;

    let guesses = parse_guess_records(&read_file(&args.records)?)?;
    let classification: Vec<Vec<f64>> =
        estimate_classification(&args.states, &guesses, args.smoothing)?;
    let uncertainty = estimate_uncertainty::<f64>(&args.states, &guesses)?;
    let retries = match &args.retries {
        Some(path) => Some(parse_retry_records(&read_file(path)?)?),
        None => None,
    };
    let patience: Option<Vec<f64>> = match &retries {
        Some(records) => Some(estimate_psi_by_state(&args.states, records)?),
        None => None,
    };
    let pooled: Option<f64> = match &retries {
        Some(records) => Some(estimate_psi_pooled(records)?),
        None => None,
    };

    let width = args.states.iter().map(String::len).max().unwrap_or(0);
    println!("states: {}", args.states.join(", "));
    println!("guess records: {}", guesses.len());
    println!("classification (rows are true states):");
    for (s, row) in classification.iter().enumerate() {
        let cells: Vec<String> = row.iter().map(|&p| fmt_float(p)).collect();
        println!("  {:<width$}  {}", args.states[s], cells.join(" "));
    }
    println!("hesitation events: {}", uncertainty.events().len());
    for event in uncertainty.events() {
        let alternates: Vec<&str> = event
            .alternates
            .iter()
            .map(|a| args.states[a.0].as_str())
            .collect();
        println!(
            "  true {} -> best {}, alternates [{}], weight {}",
            args.states[event.true_state.0],
            args.states[event.best_guess.0],
            alternates.join(", "),
            fmt_float(event.weight),
        );
    }
    if let (Some(per_state), Some(pooled)) = (&patience, pooled) {
        println!("patience:");
        for (s, &psi) in per_state.iter().enumerate() {
            println!("  {:<width$}  {}", args.states[s], fmt_float(psi));
        }
        println!("pooled patience: {}", fmt_float(pooled));
    }

    if let Some(path) = &args.out {
        let events = uncertainty
            .events()
            .iter()
            .map(|event| UncertaintyEventDoc {
                true_state: args.states[event.true_state.0].clone(),
                best: args.states[event.best_guess.0].clone(),
                alternates: event
                    .alternates
                    .iter()
                    .map(|a| args.states[a.0].clone())
                    .collect(),
                weight: event.weight,
            })
            .collect();
        write_json(
            path,
            &CalibrationReport {
                schema_version: SCHEMA_VERSION,
                states: args.states.clone(),
                classification,
                uncertainty_events: events,
                patience,
                pooled_patience: pooled,
            },
        )?;
    }
    Ok(())
}

/// Builds the model for one sweep value.
type ModelBuilder = Box<dyn Fn(f64) -> Result<HasaMdp64, CliError>>;

fn run_experiment(domain: ExperimentCommand) -> Result<(), CliError> {
    let (build, sweep, seed): (ModelBuilder, SweepArgs, u64) = match domain {
        ExperimentCommand::Grid { grid, sweep } => {
            let var = sweep.sweep;
            let seed = grid.seed;
            let build = Box::new(move |v: f64| {
                let mut config = grid.config();
                match var {
                    SweepVar::Gamma => config.discount = v,
                    SweepVar::Rnr => config.reward_noise_range = v,
                }
                Ok(make_gridworld(&config)?)
            }) as ModelBuilder;
            (build, sweep, seed)
        }
        ExperimentCommand::Warehouse { warehouse, sweep } => {
            let var = sweep.sweep;
            let seed = warehouse.seed;
            let build = Box::new(move |v: f64| {
                let mut config = warehouse.config()?;
                match var {
                    SweepVar::Gamma => config.discount = v,
                    SweepVar::Rnr => config.reward_noise_range = v,
                }
                Ok(make_warehouse(&config)?)
            }) as ModelBuilder;
            (build, sweep, seed)
        }
    };
    require(sweep.runs >= 1, "--runs must be at least 1")?;
    require(!sweep.values.is_empty(), "--values must not be empty")?;

    let mut csv_a = String::from("sweep_value,run_index,sapi_value,normalized_value\n");
    let mut csv_b = String::from("sweep_value,bnb_value,nodes_opened,wall_time\n");
    for &v in &sweep.values {
        let model = build(v)?;
        let bnb = if sweep.no_bnb {
            None
        } else {
            let config = BnbConfig {
                seed,
                node_budget: sweep.node_budget,
                ..BnbConfig::default()
            };
            let result = branch_and_bound(&model, &config)?;
            if !result.complete {
                println!(
                    "warning: {} = {}: branch and bound hit its node budget; values are unproven",
                    sweep.sweep.label(),
                    fmt_float(v),
                );
            }
            Some(result)
        };
        let outcome = sapi_restarts(&model, sweep.runs, seed, &SapiOptions::default())?;

        for run in &outcome.runs {
            let normalized = bnb
                .as_ref()
                .map(|b| fmt_float(run.value / b.value))
                .unwrap_or_default();
            csv_a.push_str(&format!(
                "{},{},{},{}\n",
                fmt_float(v),
                run.restart_index,
                fmt_float(run.value),
                normalized,
            ));
        }
        match &bnb {
            Some(b) => {
                csv_b.push_str(&format!(
                    "{},{},{},{}\n",
                    fmt_float(v),
                    fmt_float(b.value),
                    b.nodes_opened,
                    fmt_float(b.wall_time.as_secs_f64()),
                ));
                println!(
                    "{} = {}: bnb value {}  nodes {}  sapi best {}  max normalized {}",
                    sweep.sweep.label(),
                    fmt_float(v),
                    fmt_float(b.value),
                    b.nodes_opened,
                    fmt_float(outcome.best.value),
                    fmt_float(outcome.best.value / b.value),
                );
            }
            None => println!(
                "{} = {}: sapi best {}",
                sweep.sweep.label(),
                fmt_float(v),
                fmt_float(outcome.best.value),
            ),
        }
    }

    fs::create_dir_all(&sweep.out_dir).map_err(|source| CliError::Write {
        path: sweep.out_dir.clone(),
        source,
    })?;
    let path_a = sweep.out_dir.join("sapi_values.csv");
    write_file(&path_a, &csv_a)?;
    println!("wrote {}", path_a.display());
    if !sweep.no_bnb {
        let path_b = sweep.out_dir.join("bnb_summary.csv");
        write_file(&path_b, &csv_b)?;
        println!("wrote {}", path_b.display());
    }
    Ok(())
}

// ── entry point ────────────────────────────────────────────────────────────

fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenDomain { domain } => run_gen_domain(domain),
        Command::SolveSapi(args) => run_solve_sapi(args),
        Command::SolveBnb(args) => run_solve_bnb(args),
        Command::SolveEnum(args) => run_solve_enum(args),
        Command::Eval(args) => run_eval(args),
        Command::Simulate(args) => run_simulate(args),
        Command::Calibrate(args) => run_calibrate(args),
        Command::Experiment { domain } => run_experiment(domain),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse().command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}

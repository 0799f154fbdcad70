//! Fitting the confusion pieces of a model from operator study data.
//!
//! Two text record formats, one record per line, `#` comments and blank
//! lines ignored:
//!
//! * guess records `true_state,best_guess,alt1;alt2` where the third field
//!   lists the alternate guesses the operator wavered over (empty or absent
//!   means confident);
//! * retry records `true_state,retry_count` counting how many times the
//!   operator balked before acting.
//!
//! Classification rows are guess frequencies per true state, uncertainty
//! events are the relative frequencies of distinct (best, alternates)
//! groups, and patience comes from the geometric identity: balking with
//! probability `psi` per attempt gives `E[retries] = psi / (1 - psi)`, so
//! `psi = E / (1 + E)`.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::model::{ModelError, StateId, UncertaintyEvent, UncertaintyModel};
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GuessRecord {
    pub true_state: String,
    pub best_guess: String,
    pub alternates: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RetryRecord {
    pub true_state: String,
    pub retry_count: u64,
}

#[derive(Debug, Error, PartialEq)]
pub enum CalibrationError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("record {index} names unknown state {name:?}")]
    UnknownState { index: usize, name: String },
    #[error("state {name:?} has no records; collect data or enable smoothing")]
    MissingState { name: String },
    #[error("mean retry count must be finite and non-negative, got {value}")]
    BadMeanRetries { value: f64 },
    #[error("no retry records given")]
    NoRetryRecords,
    #[error(transparent)]
    Model(#[from] ModelError),
}

// ───────────────────────────────── parsing ────────────────────────────────

fn data_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, line)| (i + 1, line.trim()))
        .filter(|(_, line)| !line.is_empty() && !line.starts_with('#'))
}

pub fn parse_guess_records(text: &str) -> Result<Vec<GuessRecord>, CalibrationError> {
    let mut records = Vec::new();
    for (line, raw) in data_lines(text) {
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() < 2 || fields.len() > 3 {
            return Err(CalibrationError::Parse {
                line,
                reason: format!(
                    "expected 2 or 3 comma-separated fields, got {}",
                    fields.len()
                ),
            });
        }
        if fields[0].is_empty() || fields[1].is_empty() {
            return Err(CalibrationError::Parse {
                line,
                reason: "true state and best guess must be non-empty".into(),
            });
        }
        let alternates: Vec<String> = fields
            .get(2)
            .map(|alts| {
                alts.split(';')
                    .map(str::trim)
                    .filter(|a| !a.is_empty())
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        if alternates.iter().any(|a| a == fields[1]) {
            return Err(CalibrationError::Parse {
                line,
                reason: "best guess must not repeat among the alternates".into(),
            });
        }
        records.push(GuessRecord {
            true_state: fields[0].to_string(),
            best_guess: fields[1].to_string(),
            alternates,
        });
    }
    Ok(records)
}

pub fn parse_retry_records(text: &str) -> Result<Vec<RetryRecord>, CalibrationError> {
    let mut records = Vec::new();
    for (line, raw) in data_lines(text) {
        let fields: Vec<&str> = raw.split(',').map(str::trim).collect();
        if fields.len() != 2 {
            return Err(CalibrationError::Parse {
                line,
                reason: format!("expected 2 comma-separated fields, got {}", fields.len()),
            });
        }
        let retry_count = fields[1]
            .parse::<u64>()
            .map_err(|e| CalibrationError::Parse {
                line,
                reason: format!(
                    "retry count {:?} is not a non-negative integer: {e}",
                    fields[1]
                ),
            })?;
        records.push(RetryRecord {
            true_state: fields[0].to_string(),
            retry_count,
        });
    }
    Ok(records)
}

// ──────────────────────────────── estimation ──────────────────────────────

fn state_lookup<'a>(
    states: &'a [String],
) -> impl Fn(usize, &str) -> Result<usize, CalibrationError> + 'a {
    move |index, name| {
        states
            .iter()
            .position(|s| s == name)
            .ok_or_else(|| CalibrationError::UnknownState {
                index,
                name: name.to_string(),
            })
    }
}

/// Guess frequencies per true state. With `smoothing` every (true, guess)
/// cell starts from a single pseudo-count, which also covers states with no
/// records; without it, a state missing from the data is an error.
pub fn estimate_classification<F: Scalar>(
    states: &[String],
    records: &[GuessRecord],
    smoothing: bool,
) -> Result<Vec<Vec<F>>, CalibrationError> {
    let n = states.len();
    let lookup = state_lookup(states);
    let mut counts = vec![vec![0u64; n]; n];
    for (index, rec) in records.iter().enumerate() {
        let t = lookup(index, &rec.true_state)?;
        let g = lookup(index, &rec.best_guess)?;
        for alt in &rec.alternates {
            lookup(index, alt)?;
        }
        counts[t][g] += 1;
    }
    let lambda = u64::from(smoothing);
    let mut rows = Vec::with_capacity(n);
    for t in 0..n {
        let total: u64 = counts[t].iter().sum::<u64>() + lambda * n as u64;
        if total == 0 {
            return Err(CalibrationError::MissingState {
                name: states[t].clone(),
            });
        }
        rows.push(
            counts[t]
                .iter()
                .map(|&c| F::of((c + lambda) as f64 / total as f64))
                .collect(),
        );
    }
    Ok(rows)
}

/// Relative frequencies of hesitation patterns per true state. Confident
/// records (no alternates) turn into self-confirming events; states without
/// records fall back to a confident self-event.
pub fn estimate_uncertainty<F: Scalar>(
    states: &[String],
    records: &[GuessRecord],
) -> Result<UncertaintyModel<F>, CalibrationError> {
    let lookup = state_lookup(states);
    let mut groups: BTreeMap<(usize, usize, Vec<usize>), u64> = BTreeMap::new();
    for (index, rec) in records.iter().enumerate() {
        let t = lookup(index, &rec.true_state)?;
        let best = lookup(index, &rec.best_guess)?;
        let mut alts: Vec<usize> = rec
            .alternates
            .iter()
            .map(|a| lookup(index, a))
            .collect::<Result<_, _>>()?;
        if alts.is_empty() {
            alts.push(best);
        }
        alts.sort_unstable();
        alts.dedup();
        *groups.entry((t, best, alts)).or_insert(0) += 1;
    }

    let events: Vec<UncertaintyEvent<F>> = groups
        .into_iter()
        .map(|((t, best, alts), count)| UncertaintyEvent {
            true_state: StateId(t),
            best_guess: StateId(best),
            alternates: alts.into_iter().map(StateId).collect(),
            weight: F::of(count as f64),
        })
        .collect();
    Ok(UncertaintyModel::from_events(states.len(), events)?)
}

/// Patience from a mean retry count via `psi = E / (1 + E)`.
pub fn estimate_psi<F: Scalar>(mean_retries: F) -> Result<F, CalibrationError> {
    let e = mean_retries.as_f64();
    if !e.is_finite() || e < 0.0 {
        return Err(CalibrationError::BadMeanRetries { value: e });
    }
    Ok(mean_retries / (F::one() + mean_retries))
}

/// One patience value from all records together.
pub fn estimate_psi_pooled<F: Scalar>(records: &[RetryRecord]) -> Result<F, CalibrationError> {
    if records.is_empty() {
        return Err(CalibrationError::NoRetryRecords);
    }
    let total: u64 = records.iter().map(|r| r.retry_count).sum();
    estimate_psi(F::of(total as f64 / records.len() as f64))
}

/// Per-state patience aligned with `states`; every state needs at least one
/// record.
pub fn estimate_psi_by_state<F: Scalar>(
    states: &[String],
    records: &[RetryRecord],
) -> Result<Vec<F>, CalibrationError> {
    let lookup = state_lookup(states);
    let mut totals = vec![(0u64, 0u64); states.len()];
    for (index, rec) in records.iter().enumerate() {
        let t = lookup(index, &rec.true_state)?;
        totals[t].0 += rec.retry_count;
        totals[t].1 += 1;
    }
    totals
        .iter()
        .zip(states)
        .map(|(&(sum, count), name)| {
            if count == 0 {
                Err(CalibrationError::MissingState { name: name.clone() })
            } else {
                estimate_psi(F::of(sum as f64 / count as f64))
            }
        })
        .collect()
}

//! JSON model documents.
//!
//! The on-disk format is a single JSON object with string identifiers and
//! `f64` numbers. Transition and reward blocks carry `n_actions + 1` rows
//! per state, the non-policy action's row last, mirroring the in-memory
//! layout. Serialization is deterministic (fixed field order, pretty
//! printed) and numbers survive a round trip bit-exactly.
//!
//! Parsing is structural only: shapes and name references are checked, but
//! probability laws are left to [`HasaMdp::validate`] so that a tool can
//! load a broken model and report all its violations at once.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{HasaMdp, HasaMdpParts, ModelError, UncertaintyEvent};
use crate::scalar::Scalar;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyEventDoc {
    #[serde(rename = "true")]
    pub true_state: String,
    pub best: String,
    pub alternates: Vec<String>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDocument {
    pub schema_version: u32,
    pub states: Vec<String>,
    pub actions: Vec<String>,
    pub non_policy_action: String,
    pub discount: f64,
    pub initial_dist: Vec<f64>,
    /// `transition[s][a][s2]`, non-policy action row last.
    pub transition: Vec<Vec<Vec<f64>>>,
    /// `reward[s][a]`, same action layout.
    pub reward: Vec<Vec<f64>>,
    /// `classification[true][guess]`.
    pub classification: Vec<Vec<f64>>,
    pub uncertainty_events: Vec<UncertaintyEventDoc>,
    pub patience: Vec<f64>,
}

#[derive(Debug, Error)]
pub enum DocumentError {
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error("document has no numeric schema_version field")]
    MissingVersion,
    #[error("unsupported schema_version {found}; this build reads version {expected}")]
    SchemaVersion { found: u64, expected: u32 },
    #[error("{field} names unknown {kind} {name:?}")]
    UnknownName {
        field: &'static str,
        kind: &'static str,
        name: String,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
}

pub fn model_to_document<F: Scalar>(model: &HasaMdp<F>) -> ModelDocument {
    let n = model.n_states();
    let cols = model.np_col() + 1;
    let state_name = |s: usize| model.state_names()[s].clone();

    ModelDocument {
        schema_version: SCHEMA_VERSION,
        states: model.state_names().to_vec(),
        actions: model.action_names().to_vec(),
        non_policy_action: model.non_policy_action().to_string(),
        discount: model.discount().as_f64(),
        initial_dist: model.initial_dist().iter().map(|p| p.as_f64()).collect(),
        transition: (0..n)
            .map(|s| {
                (0..cols)
                    .map(|c| model.row(s, c).iter().map(|p| p.as_f64()).collect())
                    .collect()
            })
            .collect(),
        reward: (0..n)
            .map(|s| (0..cols).map(|c| model.reward_col(s, c).as_f64()).collect())
            .collect(),
        classification: (0..n)
            .map(|t| {
                model
                    .classification_row(crate::model::StateId(t))
                    .iter()
                    .map(|p| p.as_f64())
                    .collect()
            })
            .collect(),
        uncertainty_events: model
            .uncertainty()
            .events()
            .iter()
            .map(|ev| UncertaintyEventDoc {
                true_state: state_name(ev.true_state.0),
                best: state_name(ev.best_guess.0),
                alternates: ev.alternates.iter().map(|a| state_name(a.0)).collect(),
                weight: ev.weight.as_f64(),
            })
            .collect(),
        patience: model.patience_vector().iter().map(|p| p.as_f64()).collect(),
    }
}

pub fn document_to_model<F: Scalar>(doc: &ModelDocument) -> Result<HasaMdp<F>, DocumentError> {
    let state_id = |field: &'static str, name: &str| {
        doc.states
            .iter()
            .position(|s| s == name)
            .map(crate::model::StateId)
            .ok_or_else(|| DocumentError::UnknownName {
                field,
                kind: "state",
                name: name.to_string(),
            })
    };

    let uncertainty_events = doc
        .uncertainty_events
        .iter()
        .map(|ev| {
            Ok(UncertaintyEvent {
                true_state: state_id("uncertainty_events.true", &ev.true_state)?,
                best_guess: state_id("uncertainty_events.best", &ev.best)?,
                alternates: ev
                    .alternates
                    .iter()
                    .map(|a| state_id("uncertainty_events.alternates", a))
                    .collect::<Result<_, DocumentError>>()?,
                weight: F::of(ev.weight),
            })
        })
        .collect::<Result<Vec<_>, DocumentError>>()?;

    let lift2 = |rows: &Vec<Vec<f64>>| -> Vec<Vec<F>> {
        rows.iter()
            .map(|row| row.iter().copied().map(F::of).collect())
            .collect()
    };

    let parts = HasaMdpParts {
        states: doc.states.clone(),
        actions: doc.actions.clone(),
        non_policy_action: doc.non_policy_action.clone(),
        transition: doc.transition.iter().map(lift2).collect(),
        reward: lift2(&doc.reward),
        discount: F::of(doc.discount),
        initial_dist: doc.initial_dist.iter().copied().map(F::of).collect(),
        classification: lift2(&doc.classification),
        uncertainty_events,
        patience: doc.patience.iter().copied().map(F::of).collect(),
    };
    Ok(HasaMdp::new(parts)?)
}

/// Pretty-printed JSON with a trailing newline; byte-identical for equal
/// models.
pub fn serialize_model<F: Scalar>(model: &HasaMdp<F>) -> String {
    let mut text = serde_json::to_string_pretty(&model_to_document(model))
        .expect("model documents always serialize");
    text.push('\n');
    text
}

pub fn parse_model<F: Scalar>(text: &str) -> Result<HasaMdp<F>, DocumentError> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let version = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or(DocumentError::MissingVersion)?;
    if version != u64::from(SCHEMA_VERSION) {
        return Err(DocumentError::SchemaVersion {
            found: version,
            expected: SCHEMA_VERSION,
        });
    }
    let doc: ModelDocument = serde_json::from_value(value)?;
    document_to_model(&doc)
}

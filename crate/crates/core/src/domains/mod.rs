//! Built-in benchmark domains.
//!
//! Both constructors produce fully populated models that pass
//! [`validate`](crate::model::HasaMdp::validate): a navigation gridworld
//! whose cells are confused by distance, and a warehouse packing task with
//! an empirically shaped confusion table.

mod gridworld;
mod warehouse;

pub use gridworld::{make_gridworld, GridworldConfig};
pub use warehouse::{make_warehouse, WarehouseConfig};

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DomainError {
    #[error("invalid domain config: {field} {reason}")]
    InvalidConfig { field: &'static str, reason: String },
}

pub(crate) fn require(
    ok: bool,
    field: &'static str,
    reason: impl Into<String>,
) -> Result<(), DomainError> {
    if ok {
        Ok(())
    } else {
        Err(DomainError::InvalidConfig {
            field,
            reason: reason.into(),
        })
    }
}

//! Scenario configuration, the simulation driver, CSV output, capacity
//! search and dedicated-partition sizing.

mod csv;
mod scenario;
mod sim;
mod sweep;

use thiserror::Error;

use crate::cache::CacheError;
use crate::sharing::SharingError;
use crate::TenantId;

pub use csv::{
    samples_to_string, write_samples, write_sweep, SweepRow, SAMPLE_HEADER, SWEEP_HEADER,
};
pub use scenario::{parse_policy_list, PolicyKind, Scenario, TenantConfig, DEFAULT_SAMPLE_EVERY};
pub use sim::{
    compare_policies, mean_ewma_after, run_events, run_scenario, warmup_txns, SampleRecord,
    Simulation, TenantSample,
};
pub use sweep::{
    capacity_sweep, meets_target, min_slots_for_target, parse_targets, suggest_dc_size,
    suggest_dc_size_with, SearchBounds, SizingOptions, DEFAULT_RESOLUTION, DEFAULT_SIZING_TXNS,
    DEFAULT_TRIALS,
};

/// A configuration problem, naming the offending field.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid configuration: {field}: {reason}")]
pub struct ConfigError {
    pub field: String,
    pub reason: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("target {target} is not met even with {upper} slots")]
    Infeasible { target: f64, upper: usize },
    #[error("access for tenant {0}, which the scenario does not configure")]
    UnknownTenant(TenantId),
    #[error(transparent)]
    Sharing(#[from] SharingError),
}

impl From<CacheError> for HarnessError {
    fn from(e: CacheError) -> Self {
        HarnessError::Sharing(SharingError::Cache(e))
    }
}

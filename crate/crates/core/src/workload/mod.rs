//! Seeded multi-tenant access streams.
//!
//! Each tenant draws items from a Zipf distribution whose exponent may change
//! in phases. Tenants are interleaved by deterministic weighted round-robin
//! over whichever tenants are active at the current transaction.

mod stream;
pub mod trace;
mod zipf;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::{ItemKey, TenantId};

pub use stream::{generate_stream, tenant_seed, StreamGenerator};
pub use zipf::{sample_item, zipf_pmf, ZipfSampler};

/// Item universe used when a workload does not specify one.
pub const DEFAULT_UNIVERSE_SIZE: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WorkloadError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("tenant {tenant}: {reason}")]
    InvalidWorkload { tenant: TenantId, reason: String },
    #[error("no tenant is active at transaction 0")]
    NoInitialTenant,
}

/// A stretch of a tenant's workload with a fixed Zipf exponent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WorkloadPhase {
    pub alpha: f64,
    /// Offset from the tenant's activation at which this phase begins.
    pub start_txn: u64,
}

/// One tenant's access pattern and activity window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenantWorkload {
    pub tenant_id: TenantId,
    #[serde(default = "default_universe")]
    pub universe_size: u64,
    pub phases: Vec<WorkloadPhase>,
    #[serde(default)]
    pub active_from: u64,
    /// First transaction at which the tenant is no longer active.
    #[serde(default)]
    pub active_until: Option<u64>,
    #[serde(default = "default_weight")]
    pub weight: u32,
}

fn default_universe() -> u64 {
    DEFAULT_UNIVERSE_SIZE
}

fn default_weight() -> u32 {
    1
}

impl TenantWorkload {
    /// Single-phase workload active for the whole run.
    pub fn zipf(tenant_id: impl Into<TenantId>, universe_size: u64, alpha: f64) -> Self {
        TenantWorkload {
            tenant_id: tenant_id.into(),
            universe_size,
            phases: vec![WorkloadPhase {
                alpha,
                start_txn: 0,
            }],
            active_from: 0,
            active_until: None,
            weight: 1,
        }
    }

    pub fn with_weight(mut self, weight: u32) -> Self {
        self.weight = weight;
        self
    }

    pub fn with_window(mut self, active_from: u64, active_until: Option<u64>) -> Self {
        self.active_from = active_from;
        self.active_until = active_until;
        self
    }

    /// Appends a phase beginning `start_txn` transactions after activation.
    pub fn then_phase(mut self, start_txn: u64, alpha: f64) -> Self {
        self.phases.push(WorkloadPhase { alpha, start_txn });
        self
    }

    pub fn validate(&self) -> Result<(), WorkloadError> {
        let fail = |reason: String| {
            Err(WorkloadError::InvalidWorkload {
                tenant: self.tenant_id,
                reason,
            })
        };
        if self.universe_size == 0 {
            return fail("universe_size must be at least 1".into());
        }
        if self.weight == 0 {
            return fail("weight must be at least 1".into());
        }
        if let Some(until) = self.active_until {
            if until <= self.active_from {
                return fail(format!(
                    "active_until ({until}) must exceed active_from ({})",
                    self.active_from
                ));
            }
        }
        let Some(first) = self.phases.first() else {
            return fail("at least one phase is required".into());
        };
        if first.start_txn != 0 {
            return fail("first phase must start at offset 0".into());
        }
        for phase in &self.phases {
            if !phase.alpha.is_finite() || phase.alpha < 0.0 {
                return fail(format!(
                    "alpha must be finite and >= 0, got {}",
                    phase.alpha
                ));
            }
        }
        if self
            .phases
            .windows(2)
            .any(|w| w[1].start_txn <= w[0].start_txn)
        {
            return fail("phase start_txn values must be strictly increasing".into());
        }
        Ok(())
    }

    pub fn is_active(&self, txn: u64) -> bool {
        txn >= self.active_from && self.active_until.is_none_or(|until| txn < until)
    }

    /// Index of the phase in force at global transaction `txn`.
    pub fn phase_index_at(&self, txn: u64) -> usize {
        let offset = txn.saturating_sub(self.active_from);
        self.phases
            .partition_point(|p| p.start_txn <= offset)
            .saturating_sub(1)
    }

    /// Smallest of the tenant's phase exponents.
    pub fn least_skewed_alpha(&self) -> f64 {
        self.phases
            .iter()
            .map(|p| p.alpha)
            .fold(f64::INFINITY, f64::min)
    }
}

/// One access in the interleaved stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AccessEvent {
    pub txn: u64,
    pub tenant: TenantId,
    pub item: u64,
}

impl AccessEvent {
    pub fn key(&self) -> ItemKey {
        ItemKey {
            tenant: self.tenant,
            item: self.item,
        }
    }
}

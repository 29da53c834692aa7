//! Hit-rate tracking and the hard/soft requirement objectives.
//!
//! Each tenant's hit rate is measured over fixed-length windows of its own
//! accesses and smoothed with an EWMA, `R_i = w * R_c + (1 - w) * R_{i-1}`.
//! The gap of tenant `k` is `g_k = h_k - S_k` and `G` is the minimum gap over
//! the active tenants.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::TenantId;

/// EWMA weight used for TCP RTT estimation.
pub const DEFAULT_EWMA_WEIGHT: f64 = 0.125;
/// Accesses per measurement window, counted per tenant.
pub const DEFAULT_WINDOW_LENGTH: u64 = 100;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("no active tenants; G is undefined")]
    EmptyActiveSet,
    #[error("tenant {0} has no {1}")]
    MissingTenant(TenantId, &'static str),
}

/// Hard (must hold) and soft (desired) hit-rate requirements of a tenant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Requirement {
    #[serde(default)]
    pub hard: f64,
    pub soft: f64,
}

impl Requirement {
    pub fn new(hard: f64, soft: f64) -> Result<Self, MetricsError> {
        let r = Requirement { hard, soft };
        r.validate()?;
        Ok(r)
    }

    /// Single-level requirement (hard = 0).
    pub fn soft_only(soft: f64) -> Result<Self, MetricsError> {
        Self::new(0.0, soft)
    }

    pub fn validate(&self) -> Result<(), MetricsError> {
        if !(0.0..=1.0).contains(&self.hard)
            || !(0.0..=1.0).contains(&self.soft)
            || self.hard > self.soft
        {
            return Err(MetricsError::InvalidArgument(format!(
                "requirement must satisfy 0 <= hard <= soft <= 1, got hard={} soft={}",
                self.hard, self.soft
            )));
        }
        Ok(())
    }
}

/// Folds `observed` into the running average. The first observation is
/// adopted as-is.
pub fn ewma_update(prev: Option<f64>, observed: f64, weight: f64) -> Result<f64, MetricsError> {
    if !(weight > 0.0 && weight <= 1.0) {
        return Err(MetricsError::InvalidArgument(format!(
            "ewma weight must lie in (0, 1], got {weight}"
        )));
    }
    Ok(match prev {
        None => observed,
        Some(prev) => weight * observed + (1.0 - weight) * prev,
    })
}

/// Windowed hit counter with an EWMA-smoothed estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct HitRateTracker {
    window_hits: u64,
    window_accesses: u64,
    window_length: u64,
    ewma: Option<f64>,
    ewma_weight: f64,
    last_window: Option<f64>,
    completed_windows: u64,
}

impl HitRateTracker {
    pub fn new(window_length: u64, ewma_weight: f64) -> Result<Self, MetricsError> {
        if window_length == 0 {
            return Err(MetricsError::InvalidArgument(
                "window_length must be at least 1".into(),
            ));
        }
        ewma_update(None, 0.0, ewma_weight)?;
        Ok(HitRateTracker {
            window_hits: 0,
            window_accesses: 0,
            window_length,
            ewma: None,
            ewma_weight,
            last_window: None,
            completed_windows: 0,
        })
    }

    /// Counts one access. Returns the window's hit rate when this access
    /// completes a window.
    pub fn record_access(&mut self, hit: bool) -> Option<f64> {
        self.window_accesses += 1;
        if hit {
            self.window_hits += 1;
        }
        if self.window_accesses < self.window_length {
            return None;
        }
        let rate = self.window_hits as f64 / self.window_length as f64;
        self.ewma = Some(match self.ewma {
            None => rate,
            Some(prev) => self.ewma_weight * rate + (1.0 - self.ewma_weight) * prev,
        });
        self.last_window = Some(rate);
        self.completed_windows += 1;
        self.window_hits = 0;
        self.window_accesses = 0;
        Some(rate)
    }

    pub fn ewma(&self) -> Option<f64> {
        self.ewma
    }

    /// EWMA estimate, with a tenant that has no completed window counted as 0.
    pub fn estimate(&self) -> f64 {
        self.ewma.unwrap_or(0.0)
    }

    pub fn last_window_rate(&self) -> Option<f64> {
        self.last_window
    }

    pub fn completed_windows(&self) -> u64 {
        self.completed_windows
    }

    pub fn window_hits(&self) -> u64 {
        self.window_hits
    }

    pub fn window_accesses(&self) -> u64 {
        self.window_accesses
    }

    pub fn window_length(&self) -> u64 {
        self.window_length
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GapReport {
    pub per_tenant_gap: BTreeMap<TenantId, f64>,
    /// `G`, the smallest gap.
    pub min_gap: f64,
}

pub fn gap_report(
    hit_rates: &BTreeMap<TenantId, f64>,
    softs: &BTreeMap<TenantId, f64>,
    active: &BTreeSet<TenantId>,
) -> Result<GapReport, MetricsError> {
    if active.is_empty() {
        return Err(MetricsError::EmptyActiveSet);
    }
    let mut per_tenant_gap = BTreeMap::new();
    for &t in active {
        let h = *hit_rates
            .get(&t)
            .ok_or(MetricsError::MissingTenant(t, "hit rate"))?;
        let s = *softs
            .get(&t)
            .ok_or(MetricsError::MissingTenant(t, "soft requirement"))?;
        per_tenant_gap.insert(t, h - s);
    }
    let min_gap = per_tenant_gap
        .values()
        .copied()
        .fold(f64::INFINITY, f64::min);
    Ok(GapReport {
        per_tenant_gap,
        min_gap,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObjectiveReport {
    /// True where `h_k < H_k`.
    pub hard_violations: BTreeMap<TenantId, bool>,
    pub gaps: GapReport,
}

impl ObjectiveReport {
    pub fn any_violation(&self) -> bool {
        self.hard_violations.values().any(|&v| v)
    }
}

pub fn check_objectives(
    hit_rates: &BTreeMap<TenantId, f64>,
    requirements: &BTreeMap<TenantId, Requirement>,
    active: &BTreeSet<TenantId>,
) -> Result<ObjectiveReport, MetricsError> {
    let softs = requirements.iter().map(|(&t, r)| (t, r.soft)).collect();
    let gaps = gap_report(hit_rates, &softs, active)?;
    let hard_violations = active
        .iter()
        .map(|&t| (t, hit_rates[&t] < requirements[&t].hard))
        .collect();
    Ok(ObjectiveReport {
        hard_violations,
        gaps,
    })
}

//! Tenant-aware sharing of cache slots.
//!
//! When a shared region is full, a slot is taken from the tenant with the
//! largest gap `h_k - S_k` (fair-sharing). Under selfish-sharing a tenant
//! only gives up slots while it is above its soft requirement and a linear
//! fit of its own (slots, hit-rate) history predicts it stays there after
//! losing `N` more slots.

mod insert;
mod victim;

use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cache::CacheError;
use crate::metrics::Requirement;
use crate::TenantId;

pub use insert::{hybrid_insert, maxmin_insert};
pub use victim::{
    predict_hit_rate, select_victim_tenant, select_victim_tenant_with, selfish_eligible,
    selfish_select_victim, VictimSelector,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SharingError {
    #[error("no candidate tenant to take a slot from")]
    NoCandidate,
    #[error("tenant {0} has no gap value")]
    MissingGap(TenantId),
    #[error(transparent)]
    Cache(#[from] CacheError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SharingMode {
    #[default]
    Fair,
    Selfish,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SharingStrategy {
    #[serde(default)]
    pub mode: SharingMode,
    /// Slots a tenant assumes it may lose before the next prediction.
    #[serde(default = "default_loss_horizon")]
    pub selfish_loss_horizon: usize,
    /// (slots, hit rate) observations kept for the regression.
    #[serde(default = "default_history_len")]
    pub selfish_history_len: usize,
}

fn default_loss_horizon() -> usize {
    100
}

fn default_history_len() -> usize {
    20
}

impl Default for SharingStrategy {
    fn default() -> Self {
        SharingStrategy {
            mode: SharingMode::Fair,
            selfish_loss_horizon: default_loss_horizon(),
            selfish_history_len: default_history_len(),
        }
    }
}

impl SharingStrategy {
    pub fn with_mode(mut self, mode: SharingMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.selfish_loss_horizon < 1 {
            return Err("selfish_loss_horizon must be at least 1".into());
        }
        if self.selfish_history_len < 2 {
            return Err("selfish_history_len must be at least 2".into());
        }
        Ok(())
    }
}

/// Per-tenant bookkeeping for selfish-sharing.
///
/// Slot counts are not stored here; they are read from the slot store so
/// they can never drift from it.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct TenantShareState {
    history: VecDeque<(usize, f64)>,
    eligible: bool,
}

impl TenantShareState {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records a completed measurement window and refreshes eligibility.
    pub fn observe_window(
        &mut self,
        owned_slots: usize,
        ewma: f64,
        requirement: &Requirement,
        strategy: &SharingStrategy,
    ) -> bool {
        self.history.push_back((owned_slots, ewma));
        while self.history.len() > strategy.selfish_history_len {
            self.history.pop_front();
        }
        self.eligible = selfish_eligible(self, owned_slots, Some(ewma), requirement, strategy);
        self.eligible
    }

    pub fn history(&self) -> &VecDeque<(usize, f64)> {
        &self.history
    }

    /// Eligibility as of the last completed window (false before any).
    pub fn is_eligible(&self) -> bool {
        self.eligible
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TieBreak {
    /// Equal gaps resolve to the smallest tenant id.
    #[default]
    LowestId,
    /// Equal gaps resolve uniformly at random from a seeded generator.
    Seeded(u64),
}

#[derive(Debug, Clone)]
pub struct TieBreaker {
    rng: Option<ChaCha8Rng>,
}

impl TieBreaker {
    pub fn new(mode: TieBreak) -> Self {
        TieBreaker {
            rng: match mode {
                TieBreak::LowestId => None,
                TieBreak::Seeded(seed) => Some(ChaCha8Rng::seed_from_u64(seed)),
            },
        }
    }

    /// Picks among tied tenants, given in ascending id order.
    pub fn pick(&mut self, tied: &[TenantId]) -> TenantId {
        match (&mut self.rng, tied.len()) {
            (Some(rng), n) if n > 1 => tied[rng.random_range(0..n)],
            _ => tied[0],
        }
    }
}

impl Default for TieBreaker {
    fn default() -> Self {
        TieBreaker::new(TieBreak::LowestId)
    }
}

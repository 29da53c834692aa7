use std::collections::{BTreeMap, BTreeSet};

use super::{SharingError, SharingMode, SharingStrategy, TenantShareState, TieBreaker};
use crate::metrics::Requirement;
use crate::TenantId;

fn argmax(
    gaps: &BTreeMap<TenantId, f64>,
    candidates: impl IntoIterator<Item = TenantId>,
    tie_break: &mut TieBreaker,
) -> Result<TenantId, SharingError> {
    let mut ids: Vec<TenantId> = candidates.into_iter().collect();
    ids.sort();
    ids.dedup();
    let mut best = f64::NEG_INFINITY;
    let mut tied: Vec<TenantId> = Vec::new();
    for t in ids {
        let g = *gaps.get(&t).ok_or(SharingError::MissingGap(t))?;
        if tied.is_empty() || g > best {
            best = g;
            tied.clear();
            tied.push(t);
        } else if g == best {
            tied.push(t);
        }
    }
    if tied.is_empty() {
        return Err(SharingError::NoCandidate);
    }
    Ok(tie_break.pick(&tied))
}

/// The candidate with the largest gap; ties go to the smallest id.
pub fn select_victim_tenant(
    gaps: &BTreeMap<TenantId, f64>,
    candidates: impl IntoIterator<Item = TenantId>,
) -> Result<TenantId, SharingError> {
    argmax(gaps, candidates, &mut TieBreaker::default())
}

pub fn select_victim_tenant_with(
    gaps: &BTreeMap<TenantId, f64>,
    candidates: impl IntoIterator<Item = TenantId>,
    tie_break: &mut TieBreaker,
) -> Result<TenantId, SharingError> {
    argmax(gaps, candidates, tie_break)
}

/// Ordinary least-squares fit `h = a + b * slots` over `history`, evaluated
/// at `slots`. All-equal slot counts give the mean hit rate.
pub fn predict_hit_rate(history: &[(usize, f64)], slots: usize) -> Option<f64> {
    if history.is_empty() {
        return None;
    }
    let n = history.len() as f64;
    let mean_x = history.iter().map(|&(s, _)| s as f64).sum::<f64>() / n;
    let mean_y = history.iter().map(|&(_, h)| h).sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for &(s, h) in history {
        let dx = s as f64 - mean_x;
        sxx += dx * dx;
        sxy += dx * (h - mean_y);
    }
    if sxx == 0.0 {
        return Some(mean_y);
    }
    let slope = sxy / sxx;
    Some(mean_y + slope * (slots as f64 - mean_x))
}

/// Whether the tenant would still meet its soft requirement after losing
/// `selfish_loss_horizon` of its `current_slots`.
///
/// With fewer than two observations there is nothing to fit, and the tenant
/// yields iff its current estimate already meets the requirement.
pub fn selfish_eligible(
    state: &TenantShareState,
    current_slots: usize,
    current_ewma: Option<f64>,
    requirement: &Requirement,
    strategy: &SharingStrategy,
) -> bool {
    let history = state.history.as_slices();
    let history: Vec<(usize, f64)> = history.0.iter().chain(history.1).copied().collect();
    if history.len() < 2 {
        return current_ewma.unwrap_or(0.0) >= requirement.soft;
    }
    let after_loss = current_slots.saturating_sub(strategy.selfish_loss_horizon);
    predict_hit_rate(&history, after_loss).is_some_and(|h| h >= requirement.soft)
}

/// Selfish victim choice among the tenants holding slots in the contested
/// region (`owners`).
///
/// Only tenants with a positive gap that are predicted to absorb the loss
/// are offered up, plus the requester itself. If none of those hold slots,
/// the fair choice over all owners is used so the insertion always proceeds.
pub fn selfish_select_victim(
    gaps: &BTreeMap<TenantId, f64>,
    eligible: &BTreeSet<TenantId>,
    requester: TenantId,
    owners: &BTreeSet<TenantId>,
    tie_break: &mut TieBreaker,
) -> Result<TenantId, SharingError> {
    if owners.is_empty() {
        return Err(SharingError::NoCandidate);
    }
    let willing: Vec<TenantId> = owners
        .iter()
        .copied()
        .filter(|&t| {
            t == requester || (eligible.contains(&t) && gaps.get(&t).is_some_and(|&g| g > 0.0))
        })
        .collect();
    if willing.is_empty() {
        argmax(gaps, owners.iter().copied(), tie_break)
    } else {
        argmax(gaps, willing, tie_break)
    }
}

/// Victim selection state for one insertion.
pub struct VictimSelector<'a> {
    pub mode: SharingMode,
    /// Gap of every tenant that may hold slots (departed tenants: +inf).
    pub gaps: &'a BTreeMap<TenantId, f64>,
    /// Tenants whose latest prediction allows them to yield slots.
    pub eligible: &'a BTreeSet<TenantId>,
    pub tie_break: &'a mut TieBreaker,
}

impl VictimSelector<'_> {
    pub fn choose(
        &mut self,
        owners: &BTreeSet<TenantId>,
        requester: TenantId,
    ) -> Result<TenantId, SharingError> {
        match self.mode {
            SharingMode::Fair => argmax(self.gaps, owners.iter().copied(), self.tie_break),
            SharingMode::Selfish => {
                selfish_select_victim(self.gaps, self.eligible, requester, owners, self.tie_break)
            }
        }
    }
}

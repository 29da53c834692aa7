use std::collections::{BTreeMap, BTreeSet};

use super::{HarnessError, PolicyKind, Scenario};
use crate::cache::{global_insert, static_insert, Access, SlotStore};
use crate::metrics::{HitRateTracker, Requirement};
use crate::sharing::{
    hybrid_insert, maxmin_insert, SharingMode, TenantShareState, TieBreaker, VictimSelector,
};
use crate::workload::{generate_stream, AccessEvent, TenantWorkload};
use crate::TenantId;

/// One tenant's row of a [`SampleRecord`].
#[derive(Debug, Clone, PartialEq)]
pub struct TenantSample {
    pub tenant: TenantId,
    /// `None` until the first measurement window completes.
    pub ewma_hit_rate: Option<f64>,
    pub window_hit_rate: Option<f64>,
    pub dc_slots: usize,
    pub sc_slots: usize,
    pub gap: f64,
    pub hard_violation: bool,
}

/// State of a run after `txn` transactions.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleRecord {
    pub txn: u64,
    /// Active tenants, ascending id.
    pub tenants: Vec<TenantSample>,
    /// Smallest gap over the active tenants.
    pub min_gap: f64,
}

impl SampleRecord {
    pub fn tenant(&self, id: TenantId) -> Option<&TenantSample> {
        self.tenants.iter().find(|t| t.tenant == id)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Presence {
    Pending,
    Active,
    Departed,
}

struct TenantRun {
    workload: TenantWorkload,
    requirement: Requirement,
    tracker: HitRateTracker,
    share: TenantShareState,
    presence: Presence,
}

/// A scenario's cache, trackers and sharing state, advanced one access at a
/// time.
pub struct Simulation {
    policy: PolicyKind,
    mode: SharingMode,
    store: SlotStore,
    tenants: BTreeMap<TenantId, TenantRun>,
    strategy: crate::sharing::SharingStrategy,
    // Gap used for victim selection: estimate minus soft requirement while
    // active, +inf otherwise so that idle slots go first.
    gaps: BTreeMap<TenantId, f64>,
    eligible: BTreeSet<TenantId>,
    tie: TieBreaker,
    processed: u64,
}

impl Simulation {
    pub fn new(scenario: &Scenario) -> Result<Self, HarnessError> {
        scenario.validate()?;
        let layout = scenario.layout_for(scenario.policy)?;
        let mut tenants = BTreeMap::new();
        let mut gaps = BTreeMap::new();
        for t in &scenario.tenants {
            let tracker = HitRateTracker::new(scenario.window_length, scenario.ewma_weight)
                .expect("validated tracker parameters");
            tenants.insert(
                t.id(),
                TenantRun {
                    workload: t.workload.clone(),
                    requirement: t.requirement,
                    tracker,
                    share: TenantShareState::new(),
                    presence: Presence::Pending,
                },
            );
            gaps.insert(t.id(), f64::INFINITY);
        }
        Ok(Simulation {
            policy: scenario.policy,
            mode: scenario.policy.sharing_mode().unwrap_or_default(),
            store: SlotStore::new(layout, scenario.replacement),
            tenants,
            strategy: scenario.strategy,
            gaps,
            eligible: BTreeSet::new(),
            tie: TieBreaker::new(scenario.tie_break),
            processed: 0,
        })
    }

    pub fn store(&self) -> &SlotStore {
        &self.store
    }

    pub fn policy(&self) -> PolicyKind {
        self.policy
    }

    pub fn tracker(&self, tenant: TenantId) -> Option<&HitRateTracker> {
        self.tenants.get(&tenant).map(|t| &t.tracker)
    }

    pub fn share_state(&self, tenant: TenantId) -> Option<&TenantShareState> {
        self.tenants.get(&tenant).map(|t| &t.share)
    }

    /// Gaps as seen by victim selection.
    pub fn gaps(&self) -> &BTreeMap<TenantId, f64> {
        &self.gaps
    }

    /// Accesses processed so far.
    pub fn processed(&self) -> u64 {
        self.processed
    }

    fn refresh_presence(&mut self, txn: u64) {
        for (&id, t) in self.tenants.iter_mut() {
            let now = if t.workload.is_active(txn) {
                Presence::Active
            } else if txn < t.workload.active_from {
                Presence::Pending
            } else {
                Presence::Departed
            };
            if now == t.presence {
                continue;
            }
            t.presence = now;
            match now {
                Presence::Active => {
                    self.gaps
                        .insert(id, t.tracker.estimate() - t.requirement.soft);
                    if t.share.is_eligible() {
                        self.eligible.insert(id);
                    } else {
                        self.eligible.remove(&id);
                    }
                }
                Presence::Pending | Presence::Departed => {
                    self.gaps.insert(id, f64::INFINITY);
                    self.eligible.insert(id);
                }
            }
        }
    }

    /// Presents one access to the policy and updates the tenant's metrics.
    pub fn step(&mut self, event: &AccessEvent) -> Result<Access, HarnessError> {
        if !self.tenants.contains_key(&event.tenant) {
            return Err(HarnessError::UnknownTenant(event.tenant));
        }
        self.refresh_presence(event.txn);
        let key = event.key();
        let access = match self.policy {
            PolicyKind::Global => global_insert(&mut self.store, key)?,
            PolicyKind::Static => static_insert(&mut self.store, key)?,
            PolicyKind::MaxminFair | PolicyKind::MaxminSelfish => {
                let mut selector = VictimSelector {
                    mode: self.mode,
                    gaps: &self.gaps,
                    eligible: &self.eligible,
                    tie_break: &mut self.tie,
                };
                maxmin_insert(&mut self.store, key, &mut selector)?
            }
            PolicyKind::HybridFair | PolicyKind::HybridSelfish => {
                let mut selector = VictimSelector {
                    mode: self.mode,
                    gaps: &self.gaps,
                    eligible: &self.eligible,
                    tie_break: &mut self.tie,
                };
                hybrid_insert(&mut self.store, key, &mut selector)?
            }
        };
        self.processed += 1;

        let t = self.tenants.get_mut(&event.tenant).expect("checked above");
        if t.tracker.record_access(access.is_hit()).is_some() {
            let ewma = t.tracker.estimate();
            let owned = self.store.owned_total(event.tenant);
            let eligible = t
                .share
                .observe_window(owned, ewma, &t.requirement, &self.strategy);
            if t.presence == Presence::Active {
                self.gaps.insert(event.tenant, ewma - t.requirement.soft);
                if eligible {
                    self.eligible.insert(event.tenant);
                } else {
                    self.eligible.remove(&event.tenant);
                }
            }
        }
        Ok(access)
    }

    /// Snapshot of the active tenants, labelled with transaction `txn`.
    pub fn sample(&self, txn: u64) -> SampleRecord {
        let mut rows = Vec::new();
        for (&id, t) in &self.tenants {
            if t.presence != Presence::Active {
                continue;
            }
            let estimate = t.tracker.estimate();
            rows.push(TenantSample {
                tenant: id,
                ewma_hit_rate: t.tracker.ewma(),
                window_hit_rate: t.tracker.last_window_rate(),
                dc_slots: self.store.dc_slots(id),
                sc_slots: self.store.sc_slots(id),
                gap: estimate - t.requirement.soft,
                hard_violation: estimate < t.requirement.hard,
            });
        }
        let min_gap = rows.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
        SampleRecord {
            txn,
            tenants: rows,
            min_gap,
        }
    }
}

/// Runs `scenario` on its own generated stream.
pub fn run_scenario(scenario: &Scenario) -> Result<Vec<SampleRecord>, HarnessError> {
    scenario.validate()?;
    let stream = generate_stream(&scenario.workloads(), scenario.total_txns, scenario.seed)
        .map_err(|e| super::ConfigError::new("tenants", e.to_string()))?;
    run_events(scenario, stream)
}

/// Runs `scenario` on a given access stream, typically a replayed trace.
///
/// A record is emitted after every `sample_every` processed accesses; its
/// `txn` is the number of transactions elapsed at that point.
pub fn run_events<I>(scenario: &Scenario, events: I) -> Result<Vec<SampleRecord>, HarnessError>
where
    I: IntoIterator<Item = AccessEvent>,
{
    let mut sim = Simulation::new(scenario)?;
    let mut records = Vec::new();
    for event in events {
        sim.step(&event)?;
        if sim.processed() % scenario.sample_every == 0 {
            records.push(sim.sample(event.txn + 1));
        }
    }
    Ok(records)
}

/// Generates the base scenario's stream once and replays it through each
/// policy. Layouts are derived per policy (all-shared, equal split, or the
/// configured hybrid layout).
pub fn compare_policies(
    base: &Scenario,
    policies: &[PolicyKind],
) -> Result<Vec<(PolicyKind, Vec<SampleRecord>)>, HarnessError> {
    base.validate()?;
    let scenarios: Vec<Scenario> = policies
        .iter()
        .map(|&p| base.for_policy(p))
        .collect::<Result<_, _>>()?;
    let trace: Vec<AccessEvent> = generate_stream(&base.workloads(), base.total_txns, base.seed)
        .map_err(|e| super::ConfigError::new("tenants", e.to_string()))?
        .collect();
    scenarios
        .iter()
        .map(|s| Ok((s.policy, run_events(s, trace.iter().copied())?)))
        .collect()
}

/// Per-tenant mean EWMA over records with `txn > from_txn`. Records before a
/// tenant's first completed window count as 0.
pub fn mean_ewma_after(records: &[SampleRecord], from_txn: u64) -> BTreeMap<TenantId, f64> {
    let mut sums: BTreeMap<TenantId, (f64, usize)> = BTreeMap::new();
    for r in records.iter().filter(|r| r.txn > from_txn) {
        for t in &r.tenants {
            let e = sums.entry(t.tenant).or_insert((0.0, 0));
            e.0 += t.ewma_hit_rate.unwrap_or(0.0);
            e.1 += 1;
        }
    }
    sums.into_iter()
        .map(|(t, (sum, n))| (t, sum / n as f64))
        .collect()
}

/// Transactions excluded as warm-up from pass/fail judgments.
pub fn warmup_txns(total_txns: u64) -> u64 {
    total_txns / 5
}

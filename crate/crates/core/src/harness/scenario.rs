use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::ConfigError;
use crate::cache::{RegionLayout, ReplacementPolicy};
use crate::metrics::{Requirement, DEFAULT_EWMA_WEIGHT, DEFAULT_WINDOW_LENGTH};
use crate::sharing::{SharingMode, SharingStrategy, TieBreak};
use crate::workload::TenantWorkload;
use crate::TenantId;

/// Insertion policy driving a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Global,
    Static,
    MaxminFair,
    MaxminSelfish,
    HybridFair,
    HybridSelfish,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 6] = [
        PolicyKind::Global,
        PolicyKind::Static,
        PolicyKind::MaxminFair,
        PolicyKind::MaxminSelfish,
        PolicyKind::HybridFair,
        PolicyKind::HybridSelfish,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Global => "global",
            PolicyKind::Static => "static",
            PolicyKind::MaxminFair => "maxmin_fair",
            PolicyKind::MaxminSelfish => "maxmin_selfish",
            PolicyKind::HybridFair => "hybrid_fair",
            PolicyKind::HybridSelfish => "hybrid_selfish",
        }
    }

    /// Sharing mode used for victim selection, if the policy selects victims.
    pub fn sharing_mode(self) -> Option<SharingMode> {
        match self {
            PolicyKind::MaxminFair | PolicyKind::HybridFair => Some(SharingMode::Fair),
            PolicyKind::MaxminSelfish | PolicyKind::HybridSelfish => Some(SharingMode::Selfish),
            PolicyKind::Global | PolicyKind::Static => None,
        }
    }

    pub fn is_hybrid(self) -> bool {
        matches!(self, PolicyKind::HybridFair | PolicyKind::HybridSelfish)
    }

    pub fn is_all_shared(self) -> bool {
        matches!(
            self,
            PolicyKind::Global | PolicyKind::MaxminFair | PolicyKind::MaxminSelfish
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        PolicyKind::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| format!("unknown policy {s:?}"))
    }
}

/// Parses a comma-separated policy list such as `global,static,maxmin_fair`.
pub fn parse_policy_list(s: &str) -> Result<Vec<PolicyKind>, String> {
    let list: Vec<PolicyKind> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_, _>>()?;
    if list.is_empty() {
        return Err("policy list is empty".into());
    }
    Ok(list)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TenantConfig {
    pub workload: TenantWorkload,
    pub requirement: Requirement,
}

impl TenantConfig {
    pub fn new(workload: TenantWorkload, requirement: Requirement) -> Self {
        TenantConfig {
            workload,
            requirement,
        }
    }

    pub fn id(&self) -> TenantId {
        self.workload.tenant_id
    }
}

/// Everything needed to reproduce one simulation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub capacity: usize,
    /// Region sizes. Optional for global, max-min and static policies, which
    /// derive an all-shared or equal-split layout from `capacity`.
    #[serde(default)]
    pub layout: Option<RegionLayout>,
    pub policy: PolicyKind,
    pub tenants: Vec<TenantConfig>,
    pub total_txns: u64,
    #[serde(default = "default_window_length")]
    pub window_length: u64,
    #[serde(default = "default_ewma_weight")]
    pub ewma_weight: f64,
    /// Selfish-sharing parameters. The mode itself comes from `policy`.
    #[serde(default)]
    pub strategy: SharingStrategy,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_sample_every")]
    pub sample_every: u64,
    #[serde(default)]
    pub replacement: ReplacementPolicy,
    #[serde(default)]
    pub tie_break: TieBreak,
    /// Permit hybrid layouts with an empty shared region or with every
    /// dedicated region empty.
    #[serde(default)]
    pub allow_degenerate_layout: bool,
}

fn default_window_length() -> u64 {
    DEFAULT_WINDOW_LENGTH
}

fn default_ewma_weight() -> f64 {
    DEFAULT_EWMA_WEIGHT
}

pub const DEFAULT_SAMPLE_EVERY: u64 = 1000;

fn default_sample_every() -> u64 {
    DEFAULT_SAMPLE_EVERY
}

fn err(field: impl Into<String>, reason: impl Into<String>) -> ConfigError {
    ConfigError {
        field: field.into(),
        reason: reason.into(),
    }
}

impl Scenario {
    /// A scenario with default knobs.
    pub fn new(
        capacity: usize,
        policy: PolicyKind,
        tenants: Vec<TenantConfig>,
        total_txns: u64,
    ) -> Self {
        Scenario {
            capacity,
            layout: None,
            policy,
            tenants,
            total_txns,
            window_length: DEFAULT_WINDOW_LENGTH,
            ewma_weight: DEFAULT_EWMA_WEIGHT,
            strategy: SharingStrategy::default(),
            seed: 0,
            sample_every: DEFAULT_SAMPLE_EVERY,
            replacement: ReplacementPolicy::Lru,
            tie_break: TieBreak::LowestId,
            allow_degenerate_layout: false,
        }
    }

    pub fn with_layout(mut self, layout: RegionLayout) -> Self {
        self.layout = Some(layout);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_sample_every(mut self, every: u64) -> Self {
        self.sample_every = every;
        self
    }

    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| err(json_field(&e), e.to_string()))?;
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn tenant_ids(&self) -> Vec<TenantId> {
        self.tenants.iter().map(TenantConfig::id).collect()
    }

    pub fn workloads(&self) -> Vec<TenantWorkload> {
        self.tenants.iter().map(|t| t.workload.clone()).collect()
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.tenants.is_empty() {
            return Err(err("tenants", "at least one tenant is required"));
        }
        let mut seen = BTreeSet::new();
        for (i, t) in self.tenants.iter().enumerate() {
            if !seen.insert(t.id()) {
                return Err(err(
                    format!("tenants[{i}].workload.tenant_id"),
                    format!("duplicate tenant id {}", t.id()),
                ));
            }
            t.workload
                .validate()
                .map_err(|e| err(format!("tenants[{i}].workload"), e.to_string()))?;
            t.requirement
                .validate()
                .map_err(|e| err(format!("tenants[{i}].requirement"), e.to_string()))?;
        }
        if !self.tenants.iter().any(|t| t.workload.is_active(0)) {
            return Err(err("tenants", "no tenant is active at transaction 0"));
        }
        if self.window_length == 0 {
            return Err(err("window_length", "must be at least 1"));
        }
        if !(self.ewma_weight > 0.0 && self.ewma_weight <= 1.0) {
            return Err(err(
                "ewma_weight",
                format!("must lie in (0, 1], got {}", self.ewma_weight),
            ));
        }
        if self.sample_every == 0 {
            return Err(err("sample_every", "must be at least 1"));
        }
        self.strategy.validate().map_err(|e| err("strategy", e))?;
        self.layout_for(self.policy)?;
        Ok(())
    }

    /// The layout `policy` runs on: the configured layout when it fits,
    /// otherwise an all-shared or equal-split layout of `capacity` slots.
    pub fn layout_for(&self, policy: PolicyKind) -> Result<RegionLayout, ConfigError> {
        let ids = self.tenant_ids();
        if let Some(layout) = &self.layout {
            if layout.capacity() != self.capacity {
                return Err(err(
                    "layout",
                    format!(
                        "region sizes add up to {} but capacity is {}",
                        layout.capacity(),
                        self.capacity
                    ),
                ));
            }
            if let Some(t) = layout.dc_sizes.keys().find(|t| !ids.contains(t)) {
                return Err(err(
                    "layout.dc_sizes",
                    format!("tenant {t} is not configured"),
                ));
            }
        }
        let configured = self.layout.as_ref();
        match policy {
            PolicyKind::Global | PolicyKind::MaxminFair | PolicyKind::MaxminSelfish => {
                match configured {
                    Some(l) if l.is_all_shared() && policy == self.policy => {
                        Ok(RegionLayout::global(l.capacity()))
                    }
                    Some(_) if policy == self.policy => Err(err(
                        "layout",
                        format!("{policy} needs an all-shared layout"),
                    )),
                    _ => Ok(RegionLayout::global(self.capacity)),
                }
            }
            PolicyKind::Static => match configured {
                Some(l) if policy == self.policy => {
                    if !l.is_all_dedicated() {
                        return Err(err("layout.sc_size", "static needs an empty shared region"));
                    }
                    if let Some(t) = ids.iter().find(|t| l.dc_size(**t).is_none()) {
                        return Err(err(
                            "layout.dc_sizes",
                            format!("tenant {t} has no partition"),
                        ));
                    }
                    Ok(l.clone())
                }
                Some(l) if l.is_all_dedicated() && ids.iter().all(|t| l.dc_size(*t).is_some()) => {
                    Ok(l.clone())
                }
                _ => Ok(RegionLayout::static_equal(self.capacity, &ids)),
            },
            PolicyKind::HybridFair | PolicyKind::HybridSelfish => {
                let Some(l) = configured else {
                    return Err(err("layout", format!("{policy} needs an explicit layout")));
                };
                if let Some(t) = ids.iter().find(|t| l.dc_size(**t).is_none()) {
                    return Err(err(
                        "layout.dc_sizes",
                        format!("tenant {t} has no dedicated region"),
                    ));
                }
                if !self.allow_degenerate_layout {
                    if l.sc_size == 0 {
                        return Err(err(
                            "layout.sc_size",
                            format!("{policy} needs a non-empty shared region"),
                        ));
                    }
                    if l.is_all_shared() {
                        return Err(err(
                            "layout.dc_sizes",
                            format!("{policy} needs at least one non-empty dedicated region"),
                        ));
                    }
                }
                Ok(l.clone())
            }
        }
    }

    /// Copy of this scenario set up to run `policy`.
    pub fn for_policy(&self, policy: PolicyKind) -> Result<Scenario, ConfigError> {
        let layout = self.layout_for(policy)?;
        let mut s = self.clone();
        s.policy = policy;
        s.capacity = layout.capacity();
        s.layout = Some(layout);
        Ok(s)
    }

    /// Copy with a different capacity. Dedicated regions keep their sizes and
    /// the shared region absorbs the change; derived layouts are rebuilt.
    pub fn with_capacity(&self, capacity: usize) -> Result<Scenario, ConfigError> {
        let mut s = self.clone();
        s.capacity = capacity;
        if let Some(l) = &self.layout {
            if self.policy.is_hybrid() {
                let dedicated: usize = l.dc_sizes.values().sum();
                if capacity < dedicated {
                    return Err(err(
                        "capacity",
                        format!("{capacity} is below the {dedicated} dedicated slots"),
                    ));
                }
                s.layout = Some(RegionLayout::hybrid(
                    l.dc_sizes.clone(),
                    capacity - dedicated,
                ));
            } else {
                s.layout = None;
            }
        }
        Ok(s)
    }
}

fn json_field(e: &serde_json::Error) -> String {
    // serde_json names the field in messages such as "missing field `capacity`".
    let msg = e.to_string();
    msg.split('`')
        .nth(1)
        .map_or_else(|| "config".to_string(), str::to_string)
}

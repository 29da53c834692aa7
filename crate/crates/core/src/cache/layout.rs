use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::TenantId;

/// A region of the slot store: a tenant's dedicated partition or the shared
/// partition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Region {
    Dedicated(TenantId),
    Shared,
}

impl fmt::Display for Region {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Region::Dedicated(t) => write!(f, "DC{t}"),
            Region::Shared => f.write_str("SC"),
        }
    }
}

impl std::str::FromStr for Region {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "SC" {
            return Ok(Region::Shared);
        }
        s.strip_prefix("DC")
            .and_then(|id| id.parse().ok())
            .map(|id| Region::Dedicated(TenantId(id)))
            .ok_or_else(|| format!("unknown region {s:?}"))
    }
}

/// Sizes of the dedicated partitions and of the shared partition.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionLayout {
    #[serde(default)]
    pub dc_sizes: BTreeMap<TenantId, usize>,
    #[serde(default)]
    pub sc_size: usize,
}

impl RegionLayout {
    /// Everything shared: the layout used by global caching and max-min sharing.
    pub fn global(capacity: usize) -> Self {
        RegionLayout {
            dc_sizes: BTreeMap::new(),
            sc_size: capacity,
        }
    }

    /// Equal isolated partitions, `floor(capacity / k)` each, with the
    /// remainder handed out one slot at a time to the lowest tenant ids.
    pub fn static_equal(capacity: usize, tenants: &[TenantId]) -> Self {
        let mut ids = tenants.to_vec();
        ids.sort();
        ids.dedup();
        let mut dc_sizes = BTreeMap::new();
        if !ids.is_empty() {
            let base = capacity / ids.len();
            let extra = capacity % ids.len();
            for (i, t) in ids.into_iter().enumerate() {
                dc_sizes.insert(t, base + usize::from(i < extra));
            }
        }
        RegionLayout {
            dc_sizes,
            sc_size: if tenants.is_empty() { capacity } else { 0 },
        }
    }

    pub fn hybrid(dc_sizes: BTreeMap<TenantId, usize>, sc_size: usize) -> Self {
        RegionLayout { dc_sizes, sc_size }
    }

    pub fn capacity(&self) -> usize {
        self.dc_sizes.values().sum::<usize>() + self.sc_size
    }

    pub fn dc_size(&self, tenant: TenantId) -> Option<usize> {
        self.dc_sizes.get(&tenant).copied()
    }

    pub fn is_all_shared(&self) -> bool {
        self.dc_sizes.values().all(|&s| s == 0)
    }

    pub fn is_all_dedicated(&self) -> bool {
        self.sc_size == 0
    }
}

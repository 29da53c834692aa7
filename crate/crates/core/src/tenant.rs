use std::fmt;

use serde::{Deserialize, Serialize};

/// Identifier of a tenant sharing the cache.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct TenantId(pub u32);

impl fmt::Display for TenantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for TenantId {
    fn from(id: u32) -> Self {
        TenantId(id)
    }
}

/// A cache key namespaced by its tenant. Tenants never share entries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ItemKey {
    pub tenant: TenantId,
    pub item: u64,
}

impl ItemKey {
    pub fn new(tenant: impl Into<TenantId>, item: u64) -> Self {
        ItemKey {
            tenant: tenant.into(),
            item,
        }
    }
}

impl fmt::Display for ItemKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.tenant, self.item)
    }
}

//! Slot-based cache substrate and the two baseline policies.

mod baseline;
pub mod dump;
mod layout;
mod store;

use thiserror::Error;

use crate::TenantId;

pub use baseline::{global_insert, static_insert};
pub use layout::{Region, RegionLayout};
pub use store::{ReplacementPolicy, SlotStore};

/// Result of presenting one access to an insertion policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Access {
    /// The key was resident in this region before the access.
    Hit(Region),
    /// Miss; the key went into a free slot of this region.
    Inserted(Region),
    /// Miss; a slot of `victim` in `region` was evicted to make room.
    Replaced { region: Region, victim: TenantId },
    /// Miss and the tenant has no slot it could use (zero-sized partitions).
    Bypassed,
}

impl Access {
    pub fn is_hit(&self) -> bool {
        matches!(self, Access::Hit(_))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CacheError {
    #[error("region {0} has no empty slot")]
    RegionFull(Region),
    #[error("no eviction candidate in region {0}")]
    NoCandidate(Region),
    #[error("tenant {0} has no partition in this layout")]
    UnknownTenant(TenantId),
    #[error("key {0} is already resident")]
    AlreadyPresent(crate::ItemKey),
    #[error("slot {0} is empty")]
    EmptySlot(usize),
    #[error("tenant {tenant} may not hold a slot in {region}")]
    Isolation { tenant: TenantId, region: Region },
    #[error("layout does not fit this policy: {0}")]
    LayoutMismatch(&'static str),
}

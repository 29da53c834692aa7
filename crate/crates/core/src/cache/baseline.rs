use super::{Access, CacheError, Region, SlotStore};
use crate::ItemKey;

/// Tenant-unaware caching over the whole store: one replacement order, and
/// any tenant may displace any other.
pub fn global_insert(store: &mut SlotStore, key: ItemKey) -> Result<Access, CacheError> {
    if !store.layout().is_all_shared() {
        return Err(CacheError::LayoutMismatch(
            "global caching needs an all-shared layout",
        ));
    }
    if let Some((region, _)) = store.lookup(&key) {
        return Ok(Access::Hit(region));
    }
    if store.region_len(Region::Shared) == 0 {
        return Ok(Access::Bypassed);
    }
    if store.has_free(Region::Shared) {
        store.insert_into_empty(key, Region::Shared)?;
        return Ok(Access::Inserted(Region::Shared));
    }
    let slot = store
        .victim_slot(Region::Shared, None)
        .ok_or(CacheError::NoCandidate(Region::Shared))?;
    let victim = store
        .slot(slot)
        .key
        .map(|k| k.tenant)
        .expect("victim slot is occupied");
    store.evict_victim(Region::Shared, None)?;
    store.insert_into_empty(key, Region::Shared)?;
    Ok(Access::Replaced {
        region: Region::Shared,
        victim,
    })
}

/// Isolated per-tenant partitions; a tenant only ever replaces its own slots.
pub fn static_insert(store: &mut SlotStore, key: ItemKey) -> Result<Access, CacheError> {
    let region = Region::Dedicated(key.tenant);
    if !store.has_region(region) {
        return Err(CacheError::UnknownTenant(key.tenant));
    }
    if let Some((region, _)) = store.lookup(&key) {
        return Ok(Access::Hit(region));
    }
    if store.region_len(region) == 0 {
        return Ok(Access::Bypassed);
    }
    if store.has_free(region) {
        store.insert_into_empty(key, region)?;
        return Ok(Access::Inserted(region));
    }
    store.evict_victim(region, Some(key.tenant))?;
    store.insert_into_empty(key, region)?;
    Ok(Access::Replaced {
        region,
        victim: key.tenant,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cache::{RegionLayout, ReplacementPolicy};
    use crate::TenantId;

    fn key(t: u32, i: u64) -> ItemKey {
        ItemKey::new(t, i)
    }

    #[test]
    fn textbook_lru() {
        let mut s = SlotStore::new(RegionLayout::global(2), ReplacementPolicy::Lru);
        let a = key(1, 0);
        let b = key(1, 1);
        let c = key(1, 2);
        assert_eq!(
            global_insert(&mut s, a),
            Ok(Access::Inserted(Region::Shared))
        );
        assert_eq!(
            global_insert(&mut s, b),
            Ok(Access::Inserted(Region::Shared))
        );
        assert_eq!(global_insert(&mut s, a), Ok(Access::Hit(Region::Shared)));
        assert!(matches!(
            global_insert(&mut s, c),
            Ok(Access::Replaced { .. })
        ));
        assert!(!s.contains(&b));
        assert!(s.contains(&a) && s.contains(&c));
        assert_eq!(global_insert(&mut s, c), Ok(Access::Hit(Region::Shared)));
        assert_eq!(s.occupied(), 2);
    }

    #[test]
    fn tenants_compete_freely() {
        let mut s = SlotStore::new(RegionLayout::global(2), ReplacementPolicy::Lru);
        global_insert(&mut s, key(2, 0)).unwrap();
        global_insert(&mut s, key(1, 0)).unwrap();
        let r = global_insert(&mut s, key(1, 1)).unwrap();
        assert_eq!(
            r,
            Access::Replaced {
                region: Region::Shared,
                victim: TenantId(2)
            }
        );
        assert_eq!(s.sc_slots(TenantId(2)), 0);
    }

    #[test]
    fn global_rejects_partitioned_layout() {
        let layout = RegionLayout::static_equal(4, &[TenantId(1), TenantId(2)]);
        let mut s = SlotStore::new(layout, ReplacementPolicy::Lru);
        assert!(matches!(
            global_insert(&mut s, key(1, 0)),
            Err(CacheError::LayoutMismatch(_))
        ));
    }

    #[test]
    fn static_isolation() {
        let layout = RegionLayout::static_equal(4, &[TenantId(1), TenantId(2)]);
        let mut s = SlotStore::new(layout, ReplacementPolicy::Lru);
        for i in 0..2 {
            static_insert(&mut s, key(1, i)).unwrap();
        }
        for i in 0..50 {
            let r = static_insert(&mut s, key(2, i)).unwrap();
            if let Access::Replaced { victim, .. } = r {
                assert_eq!(victim, TenantId(2));
            }
        }
        assert!(s.contains(&key(1, 0)) && s.contains(&key(1, 1)));
        assert_eq!(s.dc_slots(TenantId(1)), 2);
        assert_eq!(s.dc_slots(TenantId(2)), 2);
        s.check_invariants().unwrap();
    }

    #[test]
    fn static_unknown_tenant() {
        let layout = RegionLayout::static_equal(4, &[TenantId(1)]);
        let mut s = SlotStore::new(layout, ReplacementPolicy::Lru);
        assert_eq!(
            static_insert(&mut s, key(3, 0)),
            Err(CacheError::UnknownTenant(TenantId(3)))
        );
    }

    #[test]
    fn zero_sized_partition_bypasses() {
        let layout = RegionLayout::static_equal(1, &[TenantId(1), TenantId(2)]);
        let mut s = SlotStore::new(layout, ReplacementPolicy::Lru);
        assert_eq!(static_insert(&mut s, key(2, 0)), Ok(Access::Bypassed));
        assert_eq!(static_insert(&mut s, key(2, 0)), Ok(Access::Bypassed));
        assert_eq!(
            static_insert(&mut s, key(1, 0)),
            Ok(Access::Inserted(Region::Dedicated(TenantId(1))))
        );
    }
}

use super::{SharingError, VictimSelector};
use crate::cache::{Access, CacheError, Region, SlotStore};
use crate::ItemKey;

/// Max-min insertion over an all-shared store.
///
/// Hits return immediately and misses fill an empty slot while one exists.
/// On a full cache the selector names the tenant to give up a slot, whose
/// oldest slot (by the store's replacement policy) goes to the new key.
pub fn maxmin_insert(
    store: &mut SlotStore,
    key: ItemKey,
    selector: &mut VictimSelector<'_>,
) -> Result<Access, SharingError> {
    if !store.layout().is_all_shared() {
        return Err(
            CacheError::LayoutMismatch("max-min sharing needs an all-shared layout").into(),
        );
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
    let victim = take_shared_slot(store, key, selector)?;
    Ok(Access::Replaced {
        region: Region::Shared,
        victim,
    })
}

fn take_shared_slot(
    store: &mut SlotStore,
    key: ItemKey,
    selector: &mut VictimSelector<'_>,
) -> Result<crate::TenantId, SharingError> {
    let owners = store.owners_in(Region::Shared);
    let victim = selector.choose(&owners, key.tenant)?;
    store.evict_victim(Region::Shared, Some(victim))?;
    store.insert_into_empty(key, Region::Shared)?;
    Ok(victim)
}

/// Insertion for the dedicated + shared architecture.
///
/// Tenant `i` fills its dedicated partition `DC_i` first. Once `DC_i` is
/// full, anything it touches in the shared partition is swapped with the
/// oldest slot of `DC_i`, so the accessed key always ends up in `DC_i` and
/// the displaced key moves to the shared partition. A full shared partition
/// gives up a slot of the tenant chosen by the selector. With `|DC_i| = 0`
/// the swaps are skipped; with no shared partition the tenant replaces
/// within `DC_i`.
pub fn hybrid_insert(
    store: &mut SlotStore,
    key: ItemKey,
    selector: &mut VictimSelector<'_>,
) -> Result<Access, SharingError> {
    let tenant = key.tenant;
    let dc = Region::Dedicated(tenant);
    if !store.has_region(dc) {
        return Err(CacheError::UnknownTenant(tenant).into());
    }
    let dc_len = store.region_len(dc);

    match store.lookup(&key) {
        Some((Region::Dedicated(_), _)) => return Ok(Access::Hit(dc)),
        Some((Region::Shared, slot)) => {
            if dc_len > 0 {
                promote(store, key, slot, dc)?;
            }
            return Ok(Access::Hit(Region::Shared));
        }
        None => {}
    }

    if store.has_free(dc) {
        store.insert_into_empty(key, dc)?;
        return Ok(Access::Inserted(dc));
    }

    if store.region_len(Region::Shared) == 0 {
        if dc_len == 0 {
            return Ok(Access::Bypassed);
        }
        store.evict_victim(dc, Some(tenant))?;
        store.insert_into_empty(key, dc)?;
        return Ok(Access::Replaced {
            region: dc,
            victim: tenant,
        });
    }

    let outcome = if store.has_free(Region::Shared) {
        store.insert_into_empty(key, Region::Shared)?;
        Access::Inserted(Region::Shared)
    } else {
        let victim = take_shared_slot(store, key, selector)?;
        Access::Replaced {
            region: Region::Shared,
            victim,
        }
    };
    if dc_len > 0 {
        let slot = store.lookup_slot(&key).expect("key was just inserted");
        promote(store, key, slot, dc)?;
    }
    Ok(outcome)
}

/// Moves `key` from its shared slot into the tenant's dedicated partition,
/// swapping with the partition's replacement victim when it is full.
fn promote(
    store: &mut SlotStore,
    key: ItemKey,
    shared_slot: usize,
    dc: Region,
) -> Result<(), CacheError> {
    if store.has_free(dc) {
        store.remove(shared_slot)?;
        store.insert_into_empty(key, dc)?;
        return Ok(());
    }
    let dc_victim = store
        .victim_slot(dc, Some(key.tenant))
        .ok_or(CacheError::NoCandidate(dc))?;
    store.swap(shared_slot, dc_victim)
}

#[cfg(test)]
mod tests {
    use std::collections::{BTreeMap, BTreeSet};

    use super::*;
    use crate::cache::{global_insert, static_insert, RegionLayout, ReplacementPolicy};
    use crate::sharing::{SharingMode, TieBreaker};
    use crate::TenantId;

    fn key(t: u32, i: u64) -> ItemKey {
        ItemKey::new(t, i)
    }

    struct Ctx {
        gaps: BTreeMap<TenantId, f64>,
        eligible: BTreeSet<TenantId>,
        tie: TieBreaker,
        mode: SharingMode,
    }

    impl Ctx {
        fn fair(gaps: &[(u32, f64)]) -> Self {
            Ctx {
                gaps: gaps.iter().map(|&(t, g)| (TenantId(t), g)).collect(),
                eligible: BTreeSet::new(),
                tie: TieBreaker::default(),
                mode: SharingMode::Fair,
            }
        }

        fn selector(&mut self) -> VictimSelector<'_> {
            VictimSelector {
                mode: self.mode,
                gaps: &self.gaps,
                eligible: &self.eligible,
                tie_break: &mut self.tie,
            }
        }
    }

    fn hybrid_store(dc1: usize, dc2: usize, sc: usize) -> SlotStore {
        let layout = RegionLayout::hybrid([(TenantId(1), dc1), (TenantId(2), dc2)].into(), sc);
        SlotStore::new(layout, ReplacementPolicy::Lru)
    }

    #[test]
    fn maxmin_hit_keeps_ownership() {
        let mut s = SlotStore::new(RegionLayout::global(2), ReplacementPolicy::Lru);
        let mut ctx = Ctx::fair(&[(1, 0.0), (2, 0.0)]);
        maxmin_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap();
        maxmin_insert(&mut s, key(2, 0), &mut ctx.selector()).unwrap();
        let r = maxmin_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap();
        assert_eq!(r, Access::Hit(Region::Shared));
        assert_eq!(s.sc_slots(TenantId(1)), 1);
        assert_eq!(s.sc_slots(TenantId(2)), 1);
    }

    #[test]
    fn maxmin_fills_empty_slots_first() {
        let mut s = SlotStore::new(RegionLayout::global(3), ReplacementPolicy::Lru);
        let mut ctx = Ctx::fair(&[(1, 0.5), (2, -0.5)]);
        for k in [key(1, 0), key(1, 1), key(2, 0)] {
            assert_eq!(
                maxmin_insert(&mut s, k, &mut ctx.selector()).unwrap(),
                Access::Inserted(Region::Shared)
            );
        }
    }

    #[test]
    fn maxmin_takes_lru_slot_of_max_gap_tenant() {
        // Capacity 4: t1 holds items 0 and 1, t2 holds items 0 and 1.
        let mut s = SlotStore::new(RegionLayout::global(4), ReplacementPolicy::Lru);
        let mut ctx = Ctx::fair(&[(1, 0.2), (2, -0.1)]);
        for k in [key(1, 0), key(2, 0), key(1, 1), key(2, 1)] {
            maxmin_insert(&mut s, k, &mut ctx.selector()).unwrap();
        }
        // Touch t1's item 0 so item 1 becomes its least recent.
        maxmin_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap();
        let r = maxmin_insert(&mut s, key(2, 9), &mut ctx.selector()).unwrap();
        assert_eq!(
            r,
            Access::Replaced {
                region: Region::Shared,
                victim: TenantId(1)
            }
        );
        assert!(!s.contains(&key(1, 1)));
        assert!(s.contains(&key(1, 0)));
        assert_eq!(s.sc_slots(TenantId(1)), 1);
        assert_eq!(s.sc_slots(TenantId(2)), 3);
        s.check_invariants().unwrap();
    }

    #[test]
    fn hybrid_fills_dedicated_first() {
        let mut s = hybrid_store(2, 2, 2);
        let mut ctx = Ctx::fair(&[(1, 0.0), (2, 0.0)]);
        let dc1 = Region::Dedicated(TenantId(1));
        assert_eq!(
            hybrid_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap(),
            Access::Inserted(dc1)
        );
        assert_eq!(
            hybrid_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap(),
            Access::Hit(dc1)
        );
        assert_eq!(s.sc_slots(TenantId(1)), 0);
        assert_eq!(s.dc_slots(TenantId(1)), 1);
    }

    #[test]
    fn shared_hit_swaps_into_dedicated() {
        let mut s = hybrid_store(1, 1, 2);
        let mut ctx = Ctx::fair(&[(1, 0.0), (2, 0.0)]);
        let dc1 = Region::Dedicated(TenantId(1));
        hybrid_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap(); // DC1 <- a
        let r = hybrid_insert(&mut s, key(1, 1), &mut ctx.selector()).unwrap(); // b via SC, swapped
        assert_eq!(r, Access::Inserted(Region::Shared));
        assert_eq!(s.lookup_slot(&key(1, 1)).map(|i| s.region_of(i)), Some(dc1));
        assert_eq!(
            s.lookup_slot(&key(1, 0)).map(|i| s.region_of(i)),
            Some(Region::Shared)
        );

        let sc_slot = s.lookup_slot(&key(1, 0)).unwrap();
        let r = hybrid_insert(&mut s, key(1, 0), &mut ctx.selector()).unwrap();
        assert_eq!(r, Access::Hit(Region::Shared));
        assert_eq!(s.lookup_slot(&key(1, 0)).map(|i| s.region_of(i)), Some(dc1));
        assert_eq!(
            s.lookup_slot(&key(1, 1)),
            Some(sc_slot),
            "displaced item takes the SC slot"
        );
        assert_eq!(s.dc_slots(TenantId(1)), 1);
        assert_eq!(s.sc_slots(TenantId(1)), 1);
        s.check_invariants().unwrap();
    }

    #[test]
    fn full_shared_region_evicts_from_max_gap_owner() {
        // 6 slots: DC1 = DC2 = 1, SC = 4.
        let mut s = hybrid_store(1, 1, 4);
        let mut ctx = Ctx::fair(&[(1, 0.3), (2, -0.2)]);
        // t1: a (DC1), then b, c into SC; t2: x (DC2), then y, z into SC.
        for k in [
            key(1, 0),
            key(2, 0),
            key(1, 1),
            key(2, 1),
            key(1, 2),
            key(2, 2),
        ] {
            hybrid_insert(&mut s, k, &mut ctx.selector()).unwrap();
        }
        assert_eq!(s.sc_slots(TenantId(1)), 2);
        assert_eq!(s.sc_slots(TenantId(2)), 2);
        // DC1 holds t1:2 (most recent); SC holds t1:0 and t1:1, with t1:0 older.
        assert_eq!(s.slot(0).key, Some(key(1, 2)));
        let t1_oldest_sc = s.lookup_slot(&key(1, 0)).unwrap();

        let r = hybrid_insert(&mut s, key(2, 9), &mut ctx.selector()).unwrap();
        assert_eq!(
            r,
            Access::Replaced {
                region: Region::Shared,
                victim: TenantId(1)
            }
        );
        assert!(!s.contains(&key(1, 0)), "t1's LRU shared slot is gone");
        assert_eq!(s.slot(1).key, Some(key(2, 9)), "new item sits in DC2");
        assert_eq!(
            s.slot(t1_oldest_sc).key,
            Some(key(2, 2)),
            "DC2's old item took the freed slot"
        );
        assert_eq!(s.sc_slots(TenantId(1)), 1);
        assert_eq!(s.sc_slots(TenantId(2)), 3);
        s.check_invariants().unwrap();
    }

    #[test]
    fn hybrid_unknown_tenant() {
        let mut s = hybrid_store(1, 1, 1);
        let mut ctx = Ctx::fair(&[(3, 0.0)]);
        assert_eq!(
            hybrid_insert(&mut s, key(3, 0), &mut ctx.selector()),
            Err(SharingError::Cache(CacheError::UnknownTenant(TenantId(3))))
        );
    }

    #[test]
    fn hybrid_without_shared_region_is_static() {
        let mut a = hybrid_store(2, 3, 0);
        let layout = RegionLayout::hybrid([(TenantId(1), 2), (TenantId(2), 3)].into(), 0);
        let mut b = SlotStore::new(layout, ReplacementPolicy::Lru);
        let mut ctx = Ctx::fair(&[(1, 0.0), (2, 0.0)]);
        for i in 0..200u64 {
            let k = key(1 + (i % 2) as u32, (i * 7919) % 6);
            let ha = hybrid_insert(&mut a, k, &mut ctx.selector())
                .unwrap()
                .is_hit();
            let hb = static_insert(&mut b, k).unwrap().is_hit();
            assert_eq!(ha, hb);
        }
        assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn single_tenant_maxmin_is_global_lru() {
        let mut a = SlotStore::new(RegionLayout::global(5), ReplacementPolicy::Lru);
        let mut b = SlotStore::new(RegionLayout::global(5), ReplacementPolicy::Lru);
        let mut ctx = Ctx::fair(&[(1, -0.4)]);
        for i in 0..300u64 {
            let k = key(1, (i * i + 3 * i) % 11);
            let ha = maxmin_insert(&mut a, k, &mut ctx.selector())
                .unwrap()
                .is_hit();
            let hb = global_insert(&mut b, k).unwrap().is_hit();
            assert_eq!(ha, hb);
        }
        assert_eq!(a.dump(), b.dump());
    }

    #[test]
    fn zero_everything_bypasses() {
        let mut s = hybrid_store(0, 1, 0);
        let mut ctx = Ctx::fair(&[(1, 0.0), (2, 0.0)]);
        assert_eq!(
            hybrid_insert(&mut s, key(1, 0), &mut ctx.selector()),
            Ok(Access::Bypassed)
        );
    }
}

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::{CacheError, Region, RegionLayout};
use crate::{ItemKey, TenantId};

/// Which resident slot a region gives up first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReplacementPolicy {
    /// Least recently accessed; hits refresh recency.
    #[default]
    Lru,
    /// Oldest insertion; hits do not matter.
    Fcfs,
}

#[derive(Debug, Clone, Copy, Default)]
struct Slot {
    key: Option<ItemKey>,
    last_access: u64,
    inserted: u64,
}

/// Read-only view of one slot.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SlotInfo {
    pub index: usize,
    pub region: Region,
    pub key: Option<ItemKey>,
    pub last_access_seq: u64,
    pub inserted_seq: u64,
}

type Order = BTreeSet<(u64, usize)>;

/// Fixed array of equal-size slots split into dedicated and shared regions.
///
/// Slot indices are laid out as the dedicated partitions in ascending tenant
/// order followed by the shared partition. Every occupied slot is owned by the
/// tenant of its key. Recency is a global operation counter, not wall time.
#[derive(Debug, Clone)]
pub struct SlotStore {
    slots: Vec<Slot>,
    slot_region: Vec<Region>,
    spans: BTreeMap<Region, (usize, usize)>,
    layout: RegionLayout,
    policy: ReplacementPolicy,
    key_index: HashMap<ItemKey, usize>,
    free: BTreeMap<Region, Vec<usize>>,
    // Replacement order of occupied slots per region and owner.
    owned: BTreeMap<Region, BTreeMap<TenantId, Order>>,
    clock: u64,
}

impl SlotStore {
    pub fn new(layout: RegionLayout, policy: ReplacementPolicy) -> Self {
        let capacity = layout.capacity();
        let mut slot_region = Vec::with_capacity(capacity);
        let mut spans = BTreeMap::new();
        let mut free = BTreeMap::new();
        let regions = layout
            .dc_sizes
            .iter()
            .map(|(&t, &n)| (Region::Dedicated(t), n))
            .chain(std::iter::once((Region::Shared, layout.sc_size)));
        for (region, len) in regions {
            let start = slot_region.len();
            slot_region.extend(std::iter::repeat_n(region, len));
            spans.insert(region, (start, len));
            // Reversed so that the lowest index is handed out first.
            free.insert(region, (start..start + len).rev().collect::<Vec<_>>());
        }
        SlotStore {
            slots: vec![Slot::default(); capacity],
            slot_region,
            spans,
            layout,
            policy,
            key_index: HashMap::with_capacity(capacity),
            free,
            owned: BTreeMap::new(),
            clock: 0,
        }
    }

    pub fn capacity(&self) -> usize {
        self.slots.len()
    }

    pub fn layout(&self) -> &RegionLayout {
        &self.layout
    }

    pub fn policy(&self) -> ReplacementPolicy {
        self.policy
    }

    pub fn occupied(&self) -> usize {
        self.key_index.len()
    }

    /// Current value of the operation counter.
    pub fn clock(&self) -> u64 {
        self.clock
    }

    pub fn has_region(&self, region: Region) -> bool {
        self.spans.contains_key(&region)
    }

    pub fn region_len(&self, region: Region) -> usize {
        self.spans.get(&region).map_or(0, |&(_, len)| len)
    }

    pub fn region_of(&self, slot: usize) -> Region {
        self.slot_region[slot]
    }

    pub fn free_in(&self, region: Region) -> usize {
        self.free.get(&region).map_or(0, Vec::len)
    }

    pub fn has_free(&self, region: Region) -> bool {
        self.free_in(region) > 0
    }

    pub fn contains(&self, key: &ItemKey) -> bool {
        self.key_index.contains_key(key)
    }

    /// Slot holding `key`, without touching recency.
    pub fn lookup_slot(&self, key: &ItemKey) -> Option<usize> {
        self.key_index.get(key).copied()
    }

    pub fn slot(&self, index: usize) -> SlotInfo {
        let s = &self.slots[index];
        SlotInfo {
            index,
            region: self.slot_region[index],
            key: s.key,
            last_access_seq: s.last_access,
            inserted_seq: s.inserted,
        }
    }

    pub fn slots(&self) -> impl Iterator<Item = SlotInfo> + '_ {
        (0..self.slots.len()).map(|i| self.slot(i))
    }

    /// Number of slots in `region` held by `tenant`.
    pub fn owned_in(&self, region: Region, tenant: TenantId) -> usize {
        self.owned
            .get(&region)
            .and_then(|m| m.get(&tenant))
            .map_or(0, BTreeSet::len)
    }

    pub fn dc_slots(&self, tenant: TenantId) -> usize {
        self.owned_in(Region::Dedicated(tenant), tenant)
    }

    pub fn sc_slots(&self, tenant: TenantId) -> usize {
        self.owned_in(Region::Shared, tenant)
    }

    pub fn owned_total(&self, tenant: TenantId) -> usize {
        self.dc_slots(tenant) + self.sc_slots(tenant)
    }

    /// Tenants holding at least one slot in `region`, ascending.
    pub fn owners_in(&self, region: Region) -> BTreeSet<TenantId> {
        self.owned
            .get(&region)
            .map(|m| {
                m.iter()
                    .filter(|(_, o)| !o.is_empty())
                    .map(|(&t, _)| t)
                    .collect()
            })
            .unwrap_or_default()
    }

    fn tick(&mut self) -> u64 {
        self.clock += 1;
        self.clock
    }

    fn order_key(&self, slot: &Slot) -> u64 {
        match self.policy {
            ReplacementPolicy::Lru => slot.last_access,
            ReplacementPolicy::Fcfs => slot.inserted,
        }
    }

    fn index_add(&mut self, index: usize) {
        let slot = self.slots[index];
        let key = slot.key.expect("indexing an empty slot");
        let order_key = self.order_key(&slot);
        self.key_index.insert(key, index);
        self.owned
            .entry(self.slot_region[index])
            .or_default()
            .entry(key.tenant)
            .or_default()
            .insert((order_key, index));
    }

    fn index_remove(&mut self, index: usize) {
        let slot = self.slots[index];
        let key = slot.key.expect("unindexing an empty slot");
        let order_key = self.order_key(&slot);
        self.key_index.remove(&key);
        if let Some(order) = self
            .owned
            .get_mut(&self.slot_region[index])
            .and_then(|m| m.get_mut(&key.tenant))
        {
            order.remove(&(order_key, index));
        }
    }

    /// Finds `key`; a hit refreshes its recency.
    pub fn lookup(&mut self, key: &ItemKey) -> Option<(Region, usize)> {
        let index = *self.key_index.get(key)?;
        let now = self.tick();
        if self.policy == ReplacementPolicy::Lru {
            self.index_remove(index);
            self.slots[index].last_access = now;
            self.index_add(index);
        } else {
            self.slots[index].last_access = now;
        }
        Some((self.slot_region[index], index))
    }

    /// Stores `key` in an empty slot of `region`, owned by the key's tenant.
    pub fn insert_into_empty(&mut self, key: ItemKey, region: Region) -> Result<usize, CacheError> {
        if let Region::Dedicated(owner) = region {
            if owner != key.tenant {
                return Err(CacheError::Isolation {
                    tenant: key.tenant,
                    region,
                });
            }
        }
        if self.key_index.contains_key(&key) {
            return Err(CacheError::AlreadyPresent(key));
        }
        let index = self
            .free
            .get_mut(&region)
            .and_then(Vec::pop)
            .ok_or(CacheError::RegionFull(region))?;
        let now = self.tick();
        self.slots[index] = Slot {
            key: Some(key),
            last_access: now,
            inserted: now,
        };
        self.index_add(index);
        Ok(index)
    }

    /// The slot the replacement policy would give up next among the slots of
    /// `region`, optionally only those owned by `owner`.
    pub fn victim_slot(&self, region: Region, owner: Option<TenantId>) -> Option<usize> {
        let by_owner = self.owned.get(&region)?;
        match owner {
            Some(t) => by_owner.get(&t)?.first().map(|&(_, i)| i),
            None => by_owner
                .values()
                .filter_map(|o| o.first())
                .min()
                .map(|&(_, i)| i),
        }
    }

    /// Evicts the policy's victim from the candidate set and returns the now
    /// empty slot. The next insertion into the region reuses it.
    pub fn evict_victim(
        &mut self,
        region: Region,
        owner: Option<TenantId>,
    ) -> Result<usize, CacheError> {
        let index = self
            .victim_slot(region, owner)
            .ok_or(CacheError::NoCandidate(region))?;
        self.remove(index)?;
        Ok(index)
    }

    /// Empties `index`, returning the key it held.
    pub fn remove(&mut self, index: usize) -> Result<ItemKey, CacheError> {
        let key = self.slots[index].key.ok_or(CacheError::EmptySlot(index))?;
        self.index_remove(index);
        self.slots[index] = Slot::default();
        self.free
            .get_mut(&self.slot_region[index])
            .expect("slot region has a free list")
            .push(index);
        Ok(key)
    }

    /// Exchanges the contents and recency metadata of two occupied slots.
    pub fn swap(&mut self, a: usize, b: usize) -> Result<(), CacheError> {
        if a == b {
            return Ok(());
        }
        let key_a = self.slots[a].key.ok_or(CacheError::EmptySlot(a))?;
        let key_b = self.slots[b].key.ok_or(CacheError::EmptySlot(b))?;
        for (key, dest) in [(key_a, b), (key_b, a)] {
            if let Region::Dedicated(owner) = self.slot_region[dest] {
                if owner != key.tenant {
                    return Err(CacheError::Isolation {
                        tenant: key.tenant,
                        region: self.slot_region[dest],
                    });
                }
            }
        }
        self.index_remove(a);
        self.index_remove(b);
        self.slots.swap(a, b);
        self.index_add(a);
        self.index_add(b);
        Ok(())
    }

    /// Per-(region, owner) occupancy computed by scanning every slot.
    pub fn recount(&self) -> BTreeMap<(Region, TenantId), usize> {
        let mut counts = BTreeMap::new();
        for (i, s) in self.slots.iter().enumerate() {
            if let Some(key) = s.key {
                *counts.entry((self.slot_region[i], key.tenant)).or_insert(0) += 1;
            }
        }
        counts
    }

    /// Checks every structural invariant, describing the first one broken.
    pub fn check_invariants(&self) -> Result<(), String> {
        if self.key_index.len() > self.capacity() {
            return Err("more keys than slots".into());
        }
        let mut occupied = 0;
        for (i, s) in self.slots.iter().enumerate() {
            let region = self.slot_region[i];
            match s.key {
                Some(key) => {
                    occupied += 1;
                    if self.key_index.get(&key) != Some(&i) {
                        return Err(format!("slot {i}: key {key} not indexed here"));
                    }
                    if let Region::Dedicated(owner) = region {
                        if owner != key.tenant {
                            return Err(format!("slot {i}: {key} inside {region}"));
                        }
                    }
                    let order_key = self.order_key(s);
                    if !self.owned[&region][&key.tenant].contains(&(order_key, i)) {
                        return Err(format!("slot {i}: missing from replacement order"));
                    }
                }
                None => {
                    if !self.free[&region].contains(&i) {
                        return Err(format!("slot {i}: empty but not on free list"));
                    }
                }
            }
        }
        if occupied != self.key_index.len() {
            return Err("key index size differs from occupied slots".into());
        }
        let indexed: usize = self
            .owned
            .values()
            .flat_map(BTreeMap::values)
            .map(BTreeSet::len)
            .sum();
        if indexed != occupied {
            return Err("replacement order size differs from occupied slots".into());
        }
        for (&(region, tenant), &n) in &self.recount() {
            if self.owned_in(region, tenant) != n {
                return Err(format!("owned count for {tenant} in {region} is stale"));
            }
        }
        Ok(())
    }

    /// One line per slot: `index,region,owner,key,last_access_seq`. Empty
    /// slots leave owner and key blank.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for info in self.slots() {
            match info.key {
                Some(key) => writeln!(
                    out,
                    "{},{},{},{},{}",
                    info.index, info.region, key.tenant, key, info.last_access_seq
                ),
                None => writeln!(
                    out,
                    "{},{},,,{}",
                    info.index, info.region, info.last_access_seq
                ),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }
}

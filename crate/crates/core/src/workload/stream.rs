use std::collections::HashMap;
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{AccessEvent, TenantWorkload, WorkloadError, ZipfSampler};
use crate::TenantId;

/// Seed for one tenant's generator, derived from the master seed so that
/// adding or removing a tenant leaves every other tenant's draws unchanged.
pub fn tenant_seed(master: u64, tenant: TenantId) -> u64 {
    splitmix64(master ^ splitmix64(u64::from(tenant.0).wrapping_add(0x5851_f42d_4c95_7f2d)))
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

struct TenantStream {
    workload: TenantWorkload,
    samplers: Vec<Arc<ZipfSampler>>,
    rng: ChaCha8Rng,
}

/// Iterator over the interleaved access stream of a set of tenants.
///
/// At each transaction the generator serves the current tenant while it has
/// turns left in its cycle (one turn per unit of weight), then moves on to the
/// next active tenant in ascending id order. When no tenant is active the
/// transaction clock jumps to the next activation.
pub struct StreamGenerator {
    tenants: Vec<TenantStream>,
    total_txns: u64,
    clock: u64,
    current: Option<usize>,
    turns_left: u32,
}

/// Builds the stream for `workloads` covering transactions `0..total_txns`.
pub fn generate_stream(
    workloads: &[TenantWorkload],
    total_txns: u64,
    seed: u64,
) -> Result<StreamGenerator, WorkloadError> {
    StreamGenerator::new(workloads, total_txns, seed)
}

impl StreamGenerator {
    pub fn new(
        workloads: &[TenantWorkload],
        total_txns: u64,
        seed: u64,
    ) -> Result<Self, WorkloadError> {
        let mut sorted: Vec<&TenantWorkload> = workloads.iter().collect();
        sorted.sort_by_key(|w| w.tenant_id);
        if let Some(dup) = sorted.windows(2).find(|w| w[0].tenant_id == w[1].tenant_id) {
            return Err(WorkloadError::InvalidWorkload {
                tenant: dup[0].tenant_id,
                reason: "duplicate tenant id".into(),
            });
        }
        for w in &sorted {
            w.validate()?;
        }
        if !sorted.iter().any(|w| w.is_active(0)) {
            return Err(WorkloadError::NoInitialTenant);
        }

        let mut cache: HashMap<(u64, u64), Arc<ZipfSampler>> = HashMap::new();
        let mut tenants = Vec::with_capacity(sorted.len());
        for w in sorted {
            let mut samplers = Vec::with_capacity(w.phases.len());
            for phase in &w.phases {
                let key = (w.universe_size, phase.alpha.to_bits());
                let sampler = match cache.get(&key) {
                    Some(s) => Arc::clone(s),
                    None => {
                        let s = Arc::new(ZipfSampler::new(w.universe_size, phase.alpha)?);
                        cache.insert(key, Arc::clone(&s));
                        s
                    }
                };
                samplers.push(sampler);
            }
            tenants.push(TenantStream {
                rng: ChaCha8Rng::seed_from_u64(tenant_seed(seed, w.tenant_id)),
                workload: w.clone(),
                samplers,
            });
        }

        Ok(StreamGenerator {
            tenants,
            total_txns,
            clock: 0,
            current: None,
            turns_left: 0,
        })
    }

    fn next_activation_after(&self, txn: u64) -> Option<u64> {
        self.tenants
            .iter()
            .map(|t| &t.workload)
            .filter(|w| w.active_from > txn)
            .map(|w| w.active_from)
            .min()
    }

    fn pick_tenant(&mut self, txn: u64) -> Option<usize> {
        if let Some(cur) = self.current {
            if self.turns_left > 0 && self.tenants[cur].workload.is_active(txn) {
                self.turns_left -= 1;
                return Some(cur);
            }
        }
        let n = self.tenants.len();
        let start = self.current.map_or(0, |c| c + 1);
        let next = (0..n)
            .map(|i| (start + i) % n)
            .find(|&i| self.tenants[i].workload.is_active(txn))?;
        self.current = Some(next);
        self.turns_left = self.tenants[next].workload.weight - 1;
        Some(next)
    }
}

impl Iterator for StreamGenerator {
    type Item = AccessEvent;

    fn next(&mut self) -> Option<AccessEvent> {
        loop {
            if self.clock >= self.total_txns {
                return None;
            }
            let txn = self.clock;
            match self.pick_tenant(txn) {
                Some(idx) => {
                    self.clock += 1;
                    let t = &mut self.tenants[idx];
                    let phase = t.workload.phase_index_at(txn);
                    let item = t.samplers[phase].sample(&mut t.rng) as u64;
                    return Some(AccessEvent {
                        txn,
                        tenant: t.workload.tenant_id,
                        item,
                    });
                }
                None => {
                    self.clock = self.next_activation_after(txn)?;
                }
            }
        }
    }
}

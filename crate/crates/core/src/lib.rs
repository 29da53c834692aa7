//! Multi-tenant slot cache simulator.
//!
//! The crate models an in-memory cache made of fixed-length slots shared by
//! several tenants, each with a hard (minimum) and soft (desired) hit-rate
//! requirement. It provides:
//!
//! - [`workload`]: seeded, phased Zipf access streams with weighted
//!   round-robin interleaving and a plain-text trace format.
//! - [`metrics`]: windowed and EWMA-smoothed hit rates, per-tenant gaps and
//!   the max-min objective `G`.
//! - [`cache`]: the slot store with dedicated/shared regions and the two
//!   baseline policies (global LRU and static partitioning).
//! - [`sharing`]: max-min fair and selfish victim selection, the max-min
//!   insertion policy, and the hybrid dedicated/shared insertion policy.
//! - [`harness`]: scenario configuration, the simulation driver, CSV output,
//!   capacity search and dedicated-partition sizing.

pub mod cache;
pub mod harness;
pub mod metrics;
pub mod sharing;
pub mod workload;

mod tenant;

pub use tenant::{ItemKey, TenantId};

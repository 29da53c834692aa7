use std::io::{self, Write};

use super::{PolicyKind, SampleRecord};

pub const SAMPLE_HEADER: &str =
    "txn,tenant_id,ewma_hit_rate,window_hit_rate,dc_slots,sc_slots,gap,hard_violation,G";

pub const SWEEP_HEADER: &str = "target,policy,min_slots,savings_vs_global,savings_vs_static";

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.6}")).unwrap_or_default()
}

/// Writes one row per tenant per record. Rates without a completed window
/// are left blank.
pub fn write_samples<W: Write>(records: &[SampleRecord], mut out: W) -> io::Result<()> {
    writeln!(out, "{SAMPLE_HEADER}")?;
    for r in records {
        for t in &r.tenants {
            writeln!(
                out,
                "{},{},{},{},{},{},{:.6},{},{:.6}",
                r.txn,
                t.tenant,
                opt(t.ewma_hit_rate),
                opt(t.window_hit_rate),
                t.dc_slots,
                t.sc_slots,
                t.gap,
                u8::from(t.hard_violation),
                r.min_gap
            )?;
        }
    }
    Ok(())
}

pub fn samples_to_string(records: &[SampleRecord]) -> String {
    let mut buf = Vec::new();
    write_samples(records, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("csv is ascii")
}

/// One row of a capacity sweep. `min_slots` is `None` when the target was
/// not reachable within the search bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub target: f64,
    pub policy: PolicyKind,
    pub min_slots: Option<usize>,
    pub savings_vs_global: Option<f64>,
    pub savings_vs_static: Option<f64>,
}

pub fn write_sweep<W: Write>(rows: &[SweepRow], mut out: W) -> io::Result<()> {
    writeln!(out, "{SWEEP_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{:.2},{},{},{},{}",
            r.target,
            r.policy,
            r.min_slots.map(|n| n.to_string()).unwrap_or_default(),
            opt(r.savings_vs_global),
            opt(r.savings_vs_static)
        )?;
    }
    Ok(())
}

//! Plain-text trace files: one `txn,tenant_id,item` event per line.
//!
//! Traces let the same access stream be replayed through several policies.

use std::borrow::Borrow;
use std::io::{self, BufRead, Write};

use thiserror::Error;

use super::AccessEvent;
use crate::TenantId;

#[derive(Debug, Error)]
pub enum TraceError {
    #[error("line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("line {line}: txn {txn} does not increase past {previous}")]
    NonIncreasingTxn {
        line: usize,
        txn: u64,
        previous: u64,
    },
    #[error(transparent)]
    Io(#[from] io::Error),
}

pub fn write_trace<W, I>(events: I, mut out: W) -> io::Result<()>
where
    W: Write,
    I: IntoIterator,
    I::Item: Borrow<AccessEvent>,
{
    for e in events {
        let e = e.borrow();
        writeln!(out, "{},{},{}", e.txn, e.tenant, e.item)?;
    }
    out.flush()
}

/// Parses one trace line (without its terminator).
pub fn parse_event(line: &str) -> Result<AccessEvent, String> {
    let mut fields = line.split(',');
    let mut next = |name: &str| {
        fields
            .next()
            .map(str::trim)
            .ok_or_else(|| format!("missing {name} field"))
    };
    let txn = next("txn")?;
    let tenant = next("tenant_id")?;
    let item = next("item")?;
    if fields.next().is_some() {
        return Err("expected exactly three fields".into());
    }
    Ok(AccessEvent {
        txn: txn.parse().map_err(|e| format!("bad txn {txn:?}: {e}"))?,
        tenant: TenantId(
            tenant
                .parse()
                .map_err(|e| format!("bad tenant_id {tenant:?}: {e}"))?,
        ),
        item: item
            .parse()
            .map_err(|e| format!("bad item {item:?}: {e}"))?,
    })
}

/// Parses a whole trace. Blank lines are ignored; txn must strictly increase.
pub fn parse_trace(input: &str) -> Result<Vec<AccessEvent>, TraceError> {
    let mut events = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        push_line(&mut events, idx + 1, line)?;
    }
    Ok(events)
}

pub fn read_trace<R: BufRead>(reader: R) -> Result<Vec<AccessEvent>, TraceError> {
    let mut events = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        push_line(&mut events, idx + 1, &line?)?;
    }
    Ok(events)
}

fn push_line(events: &mut Vec<AccessEvent>, line_no: usize, line: &str) -> Result<(), TraceError> {
    if line.trim().is_empty() {
        return Ok(());
    }
    let event = parse_event(line).map_err(|reason| TraceError::Malformed {
        line: line_no,
        reason,
    })?;
    if let Some(prev) = events.last() {
        if event.txn <= prev.txn {
            return Err(TraceError::NonIncreasingTxn {
                line: line_no,
                txn: event.txn,
                previous: prev.txn,
            });
        }
    }
    events.push(event);
    Ok(())
}

//! Parser for the slot dump produced by [`SlotStore::dump`](super::SlotStore::dump).

use thiserror::Error;

use super::Region;
use crate::{ItemKey, TenantId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpRow {
    pub index: usize,
    pub region: Region,
    pub key: Option<ItemKey>,
    pub last_access_seq: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}: {reason}")]
pub struct DumpError {
    pub line: usize,
    pub reason: String,
}

pub fn parse_dump(input: &str) -> Result<Vec<DumpRow>, DumpError> {
    input
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            parse_row(l).map_err(|reason| DumpError {
                line: i + 1,
                reason,
            })
        })
        .collect()
}

fn parse_row(line: &str) -> Result<DumpRow, String> {
    let fields: Vec<&str> = line.split(',').collect();
    let [index, region, owner, key, seq] = fields[..] else {
        return Err(format!("expected 5 fields, found {}", fields.len()));
    };
    let index = index
        .parse()
        .map_err(|e| format!("bad index {index:?}: {e}"))?;
    let region: Region = region.parse()?;
    let last_access_seq = seq.parse().map_err(|e| format!("bad seq {seq:?}: {e}"))?;
    let key = match (owner, key) {
        ("", "") => None,
        (owner, key) => {
            let owner = TenantId(
                owner
                    .parse()
                    .map_err(|e| format!("bad owner {owner:?}: {e}"))?,
            );
            let (tenant, item) = key
                .split_once(':')
                .ok_or_else(|| format!("bad key {key:?}"))?;
            let tenant = TenantId(tenant.parse().map_err(|e| format!("bad key tenant: {e}"))?);
            let item = item.parse().map_err(|e| format!("bad key item: {e}"))?;
            if tenant != owner {
                return Err(format!("owner {owner} does not match key tenant {tenant}"));
            }
            Some(ItemKey { tenant, item })
        }
    };
    if let (Region::Dedicated(dc), Some(k)) = (region, key) {
        if dc != k.tenant {
            return Err(format!("key {k} inside {region}"));
        }
    }
    Ok(DumpRow {
        index,
        region,
        key,
        last_access_seq,
    })
}

use std::collections::HashMap;

use super::delivery::{xor_into, Segment, TransmissionLog};
use super::placement::CacheContents;
use super::{Bits, UserSet};
use crate::error::Result;
use crate::Error;

fn fail(user: usize, reason: impl Into<String>) -> Error {
    Error::Reconstruction {
        user,
        reason: reason.into(),
    }
}

fn write_at(out: &mut Bits, have: &mut Bits, positions: &[u32], bits: &Bits) {
    for (&p, b) in positions.iter().zip(bits.iter().by_vals()) {
        out.set(p as usize, b);
        have.set(p as usize, true);
    }
}

/// Reassembles the file demanded by `user` from its cache and the log.
pub fn decode(user: usize, cache: &CacheContents, log: &TransmissionLog) -> Result<Bits> {
    let want = *log
        .demands
        .get(user)
        .ok_or_else(|| fail(user, "user has no demand in the log"))?;
    let f = log.file_bits;
    let mut out = Bits::repeat(false, f);
    let mut have = Bits::repeat(false, f);
    cache.for_each_cached(want, |p, b| {
        out.set(p, b);
        have.set(p, true);
    });

    let index: HashMap<(usize, UserSet), &Segment> = log
        .segments
        .iter()
        .map(|s| ((s.receiver, s.label), s))
        .collect();

    for batch in log.batches.iter().filter(|b| b.targets.contains(user)) {
        let Some(own) = index.get(&(user, batch.targets.without(user))) else {
            continue;
        };
        if own.common_bits == 0 {
            continue;
        }
        let mut acc = batch.payload.clone();
        for other in batch.targets.users().filter(|&k| k != user) {
            let Some(seg) = index.get(&(other, batch.targets.without(other))) else {
                continue;
            };
            if seg.common_bits == 0 {
                continue;
            }
            let known = cache
                .fetch(seg.file, seg.label, &seg.positions[..seg.common_bits])
                .ok_or_else(|| {
                    fail(
                        user,
                        format!(
                            "constituent for user {other} in batch {} not cached",
                            batch.targets
                        ),
                    )
                })?;
            if known.len() > acc.len() {
                return Err(fail(
                    user,
                    format!("batch {} shorter than its constituents", batch.targets),
                ));
            }
            xor_into(&mut acc, &known);
        }
        if own.common_bits > acc.len() {
            return Err(fail(
                user,
                format!("batch {} shorter than its constituents", batch.targets),
            ));
        }
        acc.truncate(own.common_bits);
        write_at(&mut out, &mut have, &own.positions[..own.common_bits], &acc);
    }

    for part in log.private.iter().filter(|p| p.receiver == user) {
        let seg = index
            .get(&(user, part.label))
            .ok_or_else(|| fail(user, format!("private part {} has no header", part.label)))?;
        write_at(
            &mut out,
            &mut have,
            &seg.positions[seg.common_bits..],
            &part.bits,
        );
    }

    let missing = have.count_zeros();
    if missing > 0 {
        return Err(fail(user, format!("{missing} of {f} bits not recovered")));
    }
    Ok(out)
}

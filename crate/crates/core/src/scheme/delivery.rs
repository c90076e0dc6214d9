use std::collections::{BTreeMap, BTreeSet, HashMap};

use bitvec::prelude::*;
use serde::Serialize;

use super::placement::{CacheStore, CentralizedPlacement, DecentralizedPlacement};
use super::{check_demands, common_len, split_ratio_q, subsets_of_size, Bits, Library, UserSet};
use crate::error::{range_err, Result};
use crate::model::check_unit;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Mode {
    Centralized { t: usize },
    Decentralized { mu: f64 },
}

/// A missing piece of a demanded file: the bits of `file` needed by
/// `receiver` and cached by exactly the users in `label`. The first
/// `common_bits` positions travel in multicast batches, the rest privately.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    pub receiver: usize,
    pub file: usize,
    pub label: UserSet,
    pub positions: Vec<u32>,
    pub common_bits: usize,
}

impl Segment {
    pub fn subphase(&self) -> usize {
        self.label.len()
    }

    pub fn private_bits(&self) -> usize {
        self.positions.len() - self.common_bits
    }
}

/// XOR of the common parts of the segments `(k, targets \ {k})`, zero-padded
/// to the longest of them.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MulticastBatch {
    pub subphase: usize,
    pub targets: UserSet,
    pub payload: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PrivatePart {
    pub subphase: usize,
    pub receiver: usize,
    pub label: UserSet,
    pub bits: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubphaseTotals {
    pub subphase: usize,
    pub common_bits: usize,
    /// Indexed by user.
    pub private_bits: Vec<usize>,
}

impl SubphaseTotals {
    pub fn max_private_bits(&self) -> usize {
        self.private_bits.iter().copied().max().unwrap_or(0)
    }
}

/// Everything sent in a delivery phase. Segments are sorted by
/// `(subphase, receiver, label)`, batches by `(subphase, targets)`, with
/// user sets in lexicographic order.
#[derive(Debug, Clone, PartialEq)]
pub struct TransmissionLog {
    pub mode: Mode,
    pub k: usize,
    pub file_bits: usize,
    pub delta: f64,
    pub demands: Vec<usize>,
    pub segments: Vec<Segment>,
    pub batches: Vec<MulticastBatch>,
    pub private: Vec<PrivatePart>,
    pub layers: Vec<SubphaseTotals>,
}

impl TransmissionLog {
    pub fn common_bits(&self) -> usize {
        self.layers.iter().map(|l| l.common_bits).sum()
    }

    pub fn private_bits(&self, user: usize) -> usize {
        self.layers.iter().map(|l| l.private_bits[user]).sum()
    }
}

fn check_library(file_count: usize, file_bits: usize, library: &Library) -> Result<()> {
    if library.file_count() != file_count || library.file_bits() != file_bits {
        return Err(range_err("library does not match the placement"));
    }
    if file_bits > u32::MAX as usize {
        return Err(range_err(format!("F exceeds {} bits", u32::MAX)));
    }
    Ok(())
}

pub fn deliver_centralized(
    placement: &CentralizedPlacement,
    library: &Library,
    demands: &[usize],
    delta: f64,
) -> Result<TransmissionLog> {
    let layout = &placement.layout;
    let k = layout.k;
    check_unit("delta", delta)?;
    check_library(placement.file_count, placement.file_bits, library)?;
    check_demands(k, library.file_count(), demands)?;
    let q = split_ratio_q(k, layout.t, delta);
    let common = common_len(q, layout.subfile_bits);
    let mut segments = Vec::new();
    for (receiver, &file) in demands.iter().enumerate() {
        for (j, &label) in layout.labels.iter().enumerate() {
            if label.contains(receiver) {
                continue;
            }
            let start = layout.start(j) as u32;
            segments.push(Segment {
                receiver,
                file,
                label,
                positions: (start..start + layout.subfile_bits as u32).collect(),
                common_bits: common,
            });
        }
    }
    Ok(assemble(
        Mode::Centralized { t: layout.t },
        k,
        library,
        demands,
        delta,
        segments,
    ))
}

pub fn deliver_decentralized(
    placement: &DecentralizedPlacement,
    library: &Library,
    demands: &[usize],
    delta: f64,
) -> Result<TransmissionLog> {
    let k = placement.k;
    check_unit("delta", delta)?;
    check_library(placement.file_count, placement.file_bits, library)?;
    check_demands(k, library.file_count(), demands)?;
    let mut segments = Vec::new();
    let mut holders = vec![0u64; placement.file_bits];
    for (receiver, &file) in demands.iter().enumerate() {
        holders.iter_mut().for_each(|h| *h = 0);
        for cache in &placement.caches {
            let CacheStore::Positions(files) = &cache.store else {
                return Err(range_err(
                    "decentralized delivery needs a decentralized placement",
                ));
            };
            for &p in &files[file].positions {
                holders[p as usize] |= 1 << cache.user;
            }
        }
        let mut groups: BTreeMap<UserSet, Vec<u32>> = BTreeMap::new();
        for (p, &h) in holders.iter().enumerate() {
            let label = UserSet::from_mask(h);
            if !label.contains(receiver) {
                groups.entry(label).or_default().push(p as u32);
            }
        }
        for (label, positions) in groups {
            let q = split_ratio_q(k, label.len(), delta);
            segments.push(Segment {
                receiver,
                file,
                label,
                common_bits: common_len(q, positions.len()),
                positions,
            });
        }
    }
    segments.sort_by(|a, b| {
        (a.subphase(), a.receiver, a.label).cmp(&(b.subphase(), b.receiver, b.label))
    });
    Ok(assemble(
        Mode::Decentralized { mu: placement.mu },
        k,
        library,
        demands,
        delta,
        segments,
    ))
}

fn gather(file: &Bits, positions: &[u32]) -> Bits {
    positions.iter().map(|&p| file[p as usize]).collect()
}

pub(crate) fn xor_into(dst: &mut BitSlice<u8, Msb0>, src: &BitSlice<u8, Msb0>) {
    for (i, b) in src.iter().by_vals().enumerate() {
        if b {
            let v = dst[i];
            dst.set(i, !v);
        }
    }
}

fn assemble(
    mode: Mode,
    k: usize,
    library: &Library,
    demands: &[usize],
    delta: f64,
    segments: Vec<Segment>,
) -> TransmissionLog {
    let index: HashMap<(usize, UserSet), usize> = segments
        .iter()
        .enumerate()
        .map(|(i, s)| ((s.receiver, s.label), i))
        .collect();
    let subphases: BTreeSet<usize> = segments.iter().map(Segment::subphase).collect();
    let mut batches = Vec::new();
    let mut layers = Vec::new();
    for &m in &subphases {
        let mut common_bits = 0;
        for targets in subsets_of_size(k, m + 1) {
            let parts: Vec<&Segment> = targets
                .users()
                .filter_map(|i| index.get(&(i, targets.without(i))))
                .map(|&j| &segments[j])
                .filter(|s| s.common_bits > 0)
                .collect();
            let Some(len) = parts.iter().map(|s| s.common_bits).max() else {
                continue;
            };
            let mut payload = Bits::repeat(false, len);
            for s in parts {
                let bits = gather(library.file(s.file), &s.positions[..s.common_bits]);
                xor_into(&mut payload, &bits);
            }
            common_bits += len;
            batches.push(MulticastBatch {
                subphase: m,
                targets,
                payload,
            });
        }
        let mut private_bits = vec![0; k];
        for s in segments.iter().filter(|s| s.subphase() == m) {
            private_bits[s.receiver] += s.private_bits();
        }
        layers.push(SubphaseTotals {
            subphase: m,
            common_bits,
            private_bits,
        });
    }
    let private = segments
        .iter()
        .filter(|s| s.private_bits() > 0)
        .map(|s| PrivatePart {
            subphase: s.subphase(),
            receiver: s.receiver,
            label: s.label,
            bits: gather(library.file(s.file), &s.positions[s.common_bits..]),
        })
        .collect();
    TransmissionLog {
        mode,
        k,
        file_bits: library.file_bits(),
        delta,
        demands: demands.to_vec(),
        segments,
        batches,
        private,
        layers,
    }
}

//! Binary dump of a transmission log's multicast batches and private parts.
//!
//! Layout, all integers big-endian:
//!
//! ```text
//! magic      4 bytes  "MCLG"
//! version    u8       1
//! mode       u8       0 centralized, 1 decentralized
//! K          u8
//! F          u32
//! batches    u32 count, then per batch:
//!     subphase u8, label length u8, label users u8 each (ascending, zero-based),
//!     payload length in bits u32, payload bytes
//! private    u32 count, then per part:
//!     subphase u8, receiver u8, label length u8, label users u8 each,
//!     length in bits u32, payload bytes
//! ```
//!
//! Payloads are packed most-significant bit first; the final byte is padded
//! with zero bits. For a multicast batch the label is the target set, for a
//! private part it is the set of users caching the piece.

use super::delivery::{Mode, MulticastBatch, PrivatePart, TransmissionLog};
use super::{Bits, UserSet};
use crate::error::Result;
use crate::Error;

pub const MAGIC: [u8; 4] = *b"MCLG";
pub const VERSION: u8 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DumpMode {
    Centralized,
    Decentralized,
}

/// The parts of a [`TransmissionLog`] that travel over the air.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DumpedLog {
    pub mode: DumpMode,
    pub k: usize,
    pub file_bits: usize,
    pub batches: Vec<MulticastBatch>,
    pub private: Vec<PrivatePart>,
}

fn pack(bits: &Bits, out: &mut Vec<u8>) {
    let start = out.len();
    out.resize(start + bits.len().div_ceil(8), 0);
    for i in bits.iter_ones() {
        out[start + i / 8] |= 0x80 >> (i % 8);
    }
}

fn put_label(label: UserSet, out: &mut Vec<u8>) {
    out.push(label.len() as u8);
    out.extend(label.users().map(|u| u as u8));
}

fn put_payload(bits: &Bits, out: &mut Vec<u8>) {
    out.extend_from_slice(&(bits.len() as u32).to_be_bytes());
    pack(bits, out);
}

pub fn encode(log: &TransmissionLog) -> Result<Vec<u8>> {
    if log.k > u8::MAX as usize || log.file_bits > u32::MAX as usize {
        return Err(Error::Format(format!(
            "K={} or F={} too large for the dump format",
            log.k, log.file_bits
        )));
    }
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    out.push(match log.mode {
        Mode::Centralized { .. } => 0,
        Mode::Decentralized { .. } => 1,
    });
    out.push(log.k as u8);
    out.extend_from_slice(&(log.file_bits as u32).to_be_bytes());
    out.extend_from_slice(&(log.batches.len() as u32).to_be_bytes());
    for b in &log.batches {
        out.push(b.subphase as u8);
        put_label(b.targets, &mut out);
        put_payload(&b.payload, &mut out);
    }
    out.extend_from_slice(&(log.private.len() as u32).to_be_bytes());
    for p in &log.private {
        out.push(p.subphase as u8);
        out.push(p.receiver as u8);
        put_label(p.label, &mut out);
        put_payload(&p.bits, &mut out);
    }
    Ok(out)
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        let end = self
            .pos
            .checked_add(n)
            .filter(|&e| e <= self.buf.len())
            .ok_or_else(|| Error::Format(format!("truncated at byte {}", self.pos)))?;
        let s = &self.buf[self.pos..end];
        self.pos = end;
        Ok(s)
    }

    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }

    fn u32(&mut self) -> Result<u32> {
        let b = self.take(4)?;
        Ok(u32::from_be_bytes([b[0], b[1], b[2], b[3]]))
    }

    fn label(&mut self, k: usize) -> Result<UserSet> {
        let n = self.u8()? as usize;
        let users = self.take(n)?;
        if users.windows(2).any(|w| w[0] >= w[1]) || users.iter().any(|&u| u as usize >= k) {
            return Err(Error::Format(format!("bad user label {users:?}")));
        }
        Ok(UserSet::from_users(users.iter().map(|&u| u as usize)))
    }

    fn payload(&mut self) -> Result<Bits> {
        let len = self.u32()? as usize;
        let bytes = self.take(len.div_ceil(8))?;
        let mut bits = Bits::from_slice(bytes);
        bits.truncate(len);
        Ok(bits)
    }
}

pub fn decode(bytes: &[u8]) -> Result<DumpedLog> {
    let mut r = Reader { buf: bytes, pos: 0 };
    if r.take(4)? != MAGIC {
        return Err(Error::Format("bad magic".into()));
    }
    let version = r.u8()?;
    if version != VERSION {
        return Err(Error::Format(format!("unsupported version {version}")));
    }
    let mode = match r.u8()? {
        0 => DumpMode::Centralized,
        1 => DumpMode::Decentralized,
        other => return Err(Error::Format(format!("unknown mode {other}"))),
    };
    let k = r.u8()? as usize;
    let file_bits = r.u32()? as usize;
    let batch_count = r.u32()?;
    let mut batches = Vec::new();
    for _ in 0..batch_count {
        let subphase = r.u8()? as usize;
        let targets = r.label(k)?;
        let payload = r.payload()?;
        batches.push(MulticastBatch {
            subphase,
            targets,
            payload,
        });
    }
    let private_count = r.u32()?;
    let mut private = Vec::new();
    for _ in 0..private_count {
        let subphase = r.u8()? as usize;
        let receiver = r.u8()? as usize;
        let label = r.label(k)?;
        let bits = r.payload()?;
        private.push(PrivatePart {
            subphase,
            receiver,
            label,
            bits,
        });
    }
    if r.pos != bytes.len() {
        return Err(Error::Format(format!(
            "{} trailing bytes",
            bytes.len() - r.pos
        )));
    }
    Ok(DumpedLog {
        mode,
        k,
        file_bits,
        batches,
        private,
    })
}

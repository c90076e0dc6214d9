//! Bit-exact coded-caching simulation.
//!
//! Placement fills user caches either with subset-indexed subfiles
//! (centralized) or with independent uniform random bit subsets
//! (decentralized). Delivery splits every missing piece into a common part,
//! XOR-multicast to groups of users, and a private part sent over the
//! zero-forcing layer. The split ratio equalizes the two layers given their
//! rates `delta` and `1 - delta` files per time-slot.
//!
//! Users and files are indexed from zero throughout.

mod decode;
mod delivery;
pub mod dump;
mod placement;
mod report;

use std::cmp::Ordering;
use std::fmt;

use bitvec::prelude::*;
use itertools::Itertools;
use rand::RngCore;
use serde::{Serialize, Serializer};

use crate::error::{range_err, Result};
use crate::rng;

pub use decode::decode;
pub use delivery::{
    deliver_centralized, deliver_decentralized, Mode, MulticastBatch, PrivatePart, Segment,
    SubphaseTotals, TransmissionLog,
};
pub use placement::{
    place_centralized, place_decentralized, CacheContents, CacheStore, CachedPositions,
    CachedSubfile, CentralizedPlacement, DecentralizedPlacement, SubfileLayout,
};
pub use report::{
    measured_gndt, run_centralized, run_decentralized, DeliveryReport, LayerTiming, SimConfig,
    Simulation, Timing,
};

/// Bit buffer, most-significant bit first within each byte.
pub type Bits = BitVec<u8, Msb0>;

/// Largest user count representable by [`UserSet`].
pub const MAX_USERS: usize = 64;

const LIBRARY_STREAM: u64 = 1;
const PLACEMENT_STREAM: u64 = 2;

/// A set of users stored as a bitmask. Ordered lexicographically by the
/// ascending list of members.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Default)]
pub struct UserSet(u64);

impl UserSet {
    pub const EMPTY: UserSet = UserSet(0);

    pub fn from_users<I: IntoIterator<Item = usize>>(users: I) -> Self {
        UserSet(users.into_iter().fold(0, |acc, u| acc | (1 << u)))
    }

    pub fn from_mask(mask: u64) -> Self {
        UserSet(mask)
    }

    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn contains(self, user: usize) -> bool {
        user < MAX_USERS && self.0 & (1 << user) != 0
    }

    pub fn with(self, user: usize) -> Self {
        UserSet(self.0 | (1 << user))
    }

    pub fn without(self, user: usize) -> Self {
        UserSet(self.0 & !(1 << user))
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    /// Members in ascending order.
    pub fn users(self) -> impl Iterator<Item = usize> {
        let mut rest = self.0;
        std::iter::from_fn(move || {
            if rest == 0 {
                return None;
            }
            let u = rest.trailing_zeros() as usize;
            rest &= rest - 1;
            Some(u)
        })
    }
}

impl Ord for UserSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.users().cmp(other.users())
    }
}

impl PartialOrd for UserSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", self.users().join(","))
    }
}

impl fmt::Display for UserSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl Serialize for UserSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_seq(self.users())
    }
}

/// All `size`-subsets of `0..k` in lexicographic order.
pub fn subsets_of_size(k: usize, size: usize) -> Vec<UserSet> {
    (0..k).combinations(size).map(UserSet::from_users).collect()
}

/// `C(n, k)` as an exact integer. Panics on overflow, which cannot happen
/// for `n <= 64`.
pub fn binomial_exact(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    usize::try_from(acc).expect("binomial coefficient overflows usize")
}

/// `N` files of exactly `F` bits each.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Library {
    file_bits: usize,
    files: Vec<Bits>,
}

impl Library {
    pub fn from_files(files: Vec<Bits>) -> Result<Self> {
        let file_bits = files.first().map(|f| f.len()).unwrap_or(0);
        if file_bits == 0 || files.iter().any(|f| f.len() != file_bits) {
            return Err(range_err(
                "library files must be non-empty and of equal size",
            ));
        }
        Ok(Library { file_bits, files })
    }

    pub fn file_count(&self) -> usize {
        self.files.len()
    }

    pub fn file_bits(&self) -> usize {
        self.file_bits
    }

    pub fn file(&self, index: usize) -> &Bits {
        &self.files[index]
    }

    pub fn files(&self) -> &[Bits] {
        &self.files
    }
}

/// Deterministic pseudorandom library.
pub fn make_library(n: usize, file_bits: usize, seed: u64) -> Result<Library> {
    if n == 0 || file_bits == 0 {
        return Err(range_err(format!(
            "library needs N >= 1 and F >= 1 (N={n}, F={file_bits})"
        )));
    }
    let files = (0..n)
        .map(|l| {
            let mut rng = rng::stream(seed, &[LIBRARY_STREAM, l as u64]);
            let mut bytes = vec![0u8; file_bits.div_ceil(8)];
            rng.fill_bytes(&mut bytes);
            let mut bits = Bits::from_vec(bytes);
            bits.truncate(file_bits);
            bits
        })
        .collect();
    Ok(Library { file_bits, files })
}

/// Fraction of a missing piece routed to the common (multicast) layer when
/// multicast messages serve `1 + m` users.
pub fn split_ratio_q(k: usize, m: usize, delta: f64) -> f64 {
    let common = (1 + m) as f64 * delta;
    common / (k as f64 * (1.0 - delta) + common)
}

/// `floor(q * len)`, tolerant to representation error in `q`.
pub fn common_len(q: f64, len: usize) -> usize {
    ((q * len as f64 + 1e-9).floor() as usize).min(len)
}

pub(crate) fn check_demands(k: usize, n: usize, demands: &[usize]) -> Result<()> {
    use crate::Error;
    if demands.len() != k {
        return Err(Error::Demand(format!(
            "expected {k} demands, got {}",
            demands.len()
        )));
    }
    if let Some(&d) = demands.iter().find(|&&d| d >= n) {
        return Err(Error::Demand(format!(
            "file index {d} out of range (N={n})"
        )));
    }
    if !demands.iter().all_unique() {
        return Err(Error::Demand(format!(
            "demands must be distinct (got {demands:?})"
        )));
    }
    Ok(())
}

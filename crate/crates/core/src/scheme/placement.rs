use std::collections::BTreeMap;

use rand::seq::index;
use serde::Serialize;

use super::{binomial_exact, subsets_of_size, Bits, Library, UserSet, MAX_USERS, PLACEMENT_STREAM};
use crate::error::{range_err, Result};
use crate::model::check_unit;
use crate::{rng, Error};

/// Subfile `j` of every file covers bits `[j * subfile_bits, (j + 1) * subfile_bits)`
/// and is labelled `labels[j]`, the `j`-th `t`-subset in lexicographic order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SubfileLayout {
    pub k: usize,
    pub t: usize,
    pub subfile_bits: usize,
    pub labels: Vec<UserSet>,
}

impl SubfileLayout {
    pub fn start(&self, j: usize) -> usize {
        j * self.subfile_bits
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CachedSubfile {
    pub start: usize,
    pub bits: Bits,
}

/// Sorted bit positions of one file held by a user, with the bit values.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CachedPositions {
    pub positions: Vec<u32>,
    pub bits: Bits,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CacheStore {
    /// `(file, label) -> subfile`.
    Subfiles(BTreeMap<(usize, UserSet), CachedSubfile>),
    /// One entry per file.
    Positions(Vec<CachedPositions>),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CacheContents {
    pub user: usize,
    pub store: CacheStore,
}

impl CacheContents {
    pub fn cached_bits(&self) -> usize {
        match &self.store {
            CacheStore::Subfiles(map) => map.values().map(|s| s.bits.len()).sum(),
            CacheStore::Positions(files) => files.iter().map(|f| f.bits.len()).sum(),
        }
    }

    /// Calls `visit(position, bit)` for every cached bit of `file`.
    pub fn for_each_cached(&self, file: usize, mut visit: impl FnMut(usize, bool)) {
        match &self.store {
            CacheStore::Subfiles(map) => {
                for ((_, _), sub) in map
                    .range((file, UserSet::EMPTY)..)
                    .take_while(|((l, _), _)| *l == file)
                {
                    for (i, b) in sub.bits.iter().by_vals().enumerate() {
                        visit(sub.start + i, b);
                    }
                }
            }
            CacheStore::Positions(files) => {
                if let Some(f) = files.get(file) {
                    for (&p, b) in f.positions.iter().zip(f.bits.iter().by_vals()) {
                        visit(p as usize, b);
                    }
                }
            }
        }
    }

    /// Cached bits of `file` at `positions`, which must belong to the piece
    /// labelled `label`. `None` if any of them is not held.
    pub fn fetch(&self, file: usize, label: UserSet, positions: &[u32]) -> Option<Bits> {
        match &self.store {
            CacheStore::Subfiles(map) => {
                let sub = map.get(&(file, label))?;
                positions
                    .iter()
                    .map(|&p| {
                        let off = (p as usize).checked_sub(sub.start)?;
                        sub.bits.get(off).map(|b| *b)
                    })
                    .collect()
            }
            CacheStore::Positions(files) => {
                let f = files.get(file)?;
                positions
                    .iter()
                    .map(|p| f.positions.binary_search(p).ok().map(|i| f.bits[i]))
                    .collect()
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralizedPlacement {
    pub layout: SubfileLayout,
    pub file_count: usize,
    pub file_bits: usize,
    pub caches: Vec<CacheContents>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecentralizedPlacement {
    pub k: usize,
    pub mu: f64,
    pub file_count: usize,
    pub file_bits: usize,
    /// `floor(mu * F)`, the number of bits of each file held by each user.
    pub cached_per_file: usize,
    pub caches: Vec<CacheContents>,
}

fn check_users(k: usize) -> Result<()> {
    if k == 0 || k > MAX_USERS {
        return Err(range_err(format!("K must lie in [1, {MAX_USERS}] (K={k})")));
    }
    Ok(())
}

/// Splits every file into `C(K, t)` equal subfiles and gives user `i` every
/// subfile whose label contains `i`.
pub fn place_centralized(k: usize, t: usize, library: &Library) -> Result<CentralizedPlacement> {
    check_users(k)?;
    if t > k {
        return Err(range_err(format!("t must lie in [0, K] (t={t}, K={k})")));
    }
    let subfiles = binomial_exact(k, t);
    let file_bits = library.file_bits();
    if !file_bits.is_multiple_of(subfiles) {
        return Err(Error::Divisibility {
            k,
            t,
            file_bits,
            subfiles,
        });
    }
    let layout = SubfileLayout {
        k,
        t,
        subfile_bits: file_bits / subfiles,
        labels: subsets_of_size(k, t),
    };
    let caches = (0..k)
        .map(|user| {
            let mut map = BTreeMap::new();
            for (l, file) in library.files().iter().enumerate() {
                for (j, &label) in layout.labels.iter().enumerate() {
                    if label.contains(user) {
                        let start = layout.start(j);
                        let bits = file[start..start + layout.subfile_bits].to_bitvec();
                        map.insert((l, label), CachedSubfile { start, bits });
                    }
                }
            }
            CacheContents {
                user,
                store: CacheStore::Subfiles(map),
            }
        })
        .collect();
    Ok(CentralizedPlacement {
        layout,
        file_count: library.file_count(),
        file_bits,
        caches,
    })
}

/// Each user independently caches a uniformly random `floor(mu * F)`-subset
/// of the bits of every file.
pub fn place_decentralized(
    k: usize,
    mu: f64,
    library: &Library,
    seed: u64,
) -> Result<DecentralizedPlacement> {
    check_users(k)?;
    check_unit("mu", mu)?;
    let file_bits = library.file_bits();
    if file_bits > u32::MAX as usize {
        return Err(range_err(format!("F exceeds {} bits", u32::MAX)));
    }
    let cached_per_file = ((mu * file_bits as f64 + 1e-9).floor() as usize).min(file_bits);
    let caches = (0..k)
        .map(|user| {
            let files = library
                .files()
                .iter()
                .enumerate()
                .map(|(l, file)| {
                    let mut rng = rng::stream(seed, &[PLACEMENT_STREAM, user as u64, l as u64]);
                    let mut positions: Vec<u32> =
                        index::sample(&mut rng, file_bits, cached_per_file)
                            .into_iter()
                            .map(|p| p as u32)
                            .collect();
                    positions.sort_unstable();
                    let bits = positions.iter().map(|&p| file[p as usize]).collect();
                    CachedPositions { positions, bits }
                })
                .collect();
            CacheContents {
                user,
                store: CacheStore::Positions(files),
            }
        })
        .collect();
    Ok(DecentralizedPlacement {
        k,
        mu,
        file_count: library.file_count(),
        file_bits,
        cached_per_file,
        caches,
    })
}

//! Converse lower bound on the optimal delivery time and gap scans.
//!
//! For a subset of `s` users, each demanding `floor(N/s)` distinct files,
//! the optimal delivery time is at least
//!
//! ```text
//! ( s / (1 + (s - 1)(1 - delta)) * (1 - M / floor(N/s)) )^+
//! ```
//!
//! The bound used is the maximum over `s in 1..=K`. Scans compare it against
//! the achievable delivery times of [`crate::analytics`].

use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytics::{gndt_centralized, gndt_decentralized};
use crate::error::{range_err, Result};
use crate::model::{check_unit, SystemParams};
use crate::rng;

/// Multiplicative gap guaranteed by the order-optimality converse.
pub const THEOREM_GAP: f64 = 12.0;
/// Largest gap observed numerically for `K <= 100`, `N <= 500`.
pub const NUMERICAL_GAP: f64 = 3.5;
/// Tight bound on the centralized-to-decentralized GDoF ratio.
pub const CEN_DECEN_GAP: f64 = 1.5;

/// Lower bound contributed by a subset of `s` users.
pub fn gndt_lb_s(k: usize, n: usize, m: f64, delta: f64, s: usize) -> Result<f64> {
    if s == 0 || s > k {
        return Err(range_err(format!("s must lie in [1, K] (s={s}, K={k})")));
    }
    check_unit("delta", delta)?;
    let per_user = n / s;
    if per_user == 0 {
        return Err(range_err(format!("floor(N/s) is zero (N={n}, s={s})")));
    }
    let parallel = s as f64 / (1.0 + (s - 1) as f64 * (1.0 - delta));
    Ok((parallel * (1.0 - m / per_user as f64)).max(0.0))
}

/// Maximum of [`gndt_lb_s`] over `s`, with the smallest maximizing `s`.
pub fn gndt_lb(k: usize, n: usize, m: f64, delta: f64) -> Result<(f64, usize)> {
    let mut best = (gndt_lb_s(k, n, m, delta, 1)?, 1);
    for s in 2..=k {
        let v = gndt_lb_s(k, n, m, delta, s)?;
        if v > best.0 {
            best = (v, s);
        }
    }
    Ok(best)
}

pub fn gndt_lb_params(p: &SystemParams) -> (f64, usize) {
    gndt_lb(p.k(), p.n(), p.m(), p.delta()).expect("validated parameters")
}

/// Upper bound on the GDoF, `K / GNDT_lb`. Degenerate when the bound is zero.
pub fn gdof_ub(k: usize, n: usize, m: f64, delta: f64) -> Result<f64> {
    let (lb, _) = gndt_lb(k, n, m, delta)?;
    if lb > 0.0 {
        Ok(k as f64 / lb)
    } else {
        Err(crate::Error::Degenerate(
            "lower bound is zero; no finite GDoF upper bound".into(),
        ))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Centralized,
    Decentralized,
}

impl Scheme {
    pub fn as_str(&self) -> &'static str {
        match self {
            Scheme::Centralized => "centralized",
            Scheme::Decentralized => "decentralized",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapFlag {
    Ok,
    /// Everything is cached: both delivery times are zero. Ratio reported as 1.
    ZeroTime,
    /// Bound is zero while the achievable time is positive. No finite ratio.
    ZeroBound,
}

impl GapFlag {
    pub fn as_str(&self) -> &'static str {
        match self {
            GapFlag::Ok => "ok",
            GapFlag::ZeroTime => "zero_time",
            GapFlag::ZeroBound => "zero_bound",
        }
    }
}

/// One scanned point: achievable delivery time against the converse bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GapRecord {
    pub params: SystemParams,
    pub scheme: Scheme,
    pub achievable: f64,
    pub bound: f64,
    pub best_s: usize,
    /// `achievable / bound`; `None` when flagged [`GapFlag::ZeroBound`].
    pub ratio: Option<f64>,
    pub flag: GapFlag,
}

impl GapRecord {
    fn build(params: SystemParams, scheme: Scheme, achievable: f64) -> Self {
        let (bound, best_s) = gndt_lb_params(&params);
        let (ratio, flag) = if bound > 0.0 {
            (Some(achievable / bound), GapFlag::Ok)
        } else if achievable > 0.0 {
            (None, GapFlag::ZeroBound)
        } else {
            (Some(1.0), GapFlag::ZeroTime)
        };
        GapRecord {
            params,
            scheme,
            achievable,
            bound,
            best_s,
            ratio,
            flag,
        }
    }
}

pub fn gap_centralized(p: &SystemParams) -> GapRecord {
    let achievable = gndt_centralized(p.k(), p.mu(), p.delta()).expect("validated parameters");
    GapRecord::build(*p, Scheme::Centralized, achievable)
}

pub fn gap_decentralized(p: &SystemParams) -> GapRecord {
    let achievable = gndt_decentralized(p.k(), p.mu(), p.delta()).expect("validated parameters");
    GapRecord::build(*p, Scheme::Decentralized, achievable)
}

pub fn gap(p: &SystemParams, scheme: Scheme) -> GapRecord {
    match scheme {
        Scheme::Centralized => gap_centralized(p),
        Scheme::Decentralized => gap_decentralized(p),
    }
}

/// Ratio of centralized to decentralized GDoF, i.e. `GNDT_D / GNDT_C`.
/// Defined as 1 where both delivery times vanish.
pub fn gap_cen_vs_decen(k: usize, mu: f64, delta: f64) -> Result<f64> {
    let c = gndt_centralized(k, mu, delta)?;
    let d = gndt_decentralized(k, mu, delta)?;
    if c == 0.0 && d == 0.0 {
        return Ok(1.0);
    }
    Ok(d / c)
}

/// `f(delta; K, mu, s) = (1 + (s-1)(1-delta)) / (K(1-delta) + (1 + K mu) delta)`,
/// non-decreasing in `delta` whenever `K >= s (1 + K mu)`.
pub fn f_value(delta: f64, k: usize, mu: f64, s: usize) -> f64 {
    let num = 1.0 + (s as f64 - 1.0) * (1.0 - delta);
    let den = k as f64 * (1.0 - delta) + (1.0 + k as f64 * mu) * delta;
    num / den
}

/// `delta` grid with `steps` intervals and exact endpoints.
pub fn unit_grid(steps: usize) -> Vec<f64> {
    if steps == 0 {
        return vec![0.0];
    }
    (0..=steps).map(|j| j as f64 / steps as f64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExhaustiveGrid {
    pub k_max: usize,
    pub n_max: usize,
    /// Number of `delta` intervals on `[0, 1]`.
    pub delta_steps: usize,
}

impl Default for ExhaustiveGrid {
    fn default() -> Self {
        ExhaustiveGrid {
            k_max: 8,
            n_max: 16,
            delta_steps: 20,
        }
    }
}

/// Stratified sampling: `samples_per_k` points for every `K` in `1..=k_max`,
/// with `N` uniform on `[K, n_max]`, integer `M` uniform on `[0, N]` and
/// `delta` uniform on the grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledGrid {
    pub k_max: usize,
    pub n_max: usize,
    pub delta_steps: usize,
    pub samples_per_k: usize,
    pub seed: u64,
}

impl Default for SampledGrid {
    fn default() -> Self {
        SampledGrid {
            k_max: 100,
            n_max: 500,
            delta_steps: 20,
            samples_per_k: 1000,
            seed: rng::DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "snake_case")]
pub enum ScanSpec {
    Exhaustive(ExhaustiveGrid),
    Sampled(SampledGrid),
}

impl ScanSpec {
    fn validate(&self) -> Result<()> {
        let (k_max, n_max) = match self {
            ScanSpec::Exhaustive(g) => (g.k_max, g.n_max),
            ScanSpec::Sampled(g) => {
                if g.samples_per_k == 0 {
                    return Err(range_err("samples per K must be positive"));
                }
                (g.k_max, g.n_max)
            }
        };
        if k_max == 0 || n_max < k_max {
            return Err(range_err(format!(
                "scan needs 1 <= K_max <= N_max (K_max={k_max}, N_max={n_max})"
            )));
        }
        Ok(())
    }

    /// Grid points in deterministic order.
    pub fn points(&self) -> Result<Vec<SystemParams>> {
        self.validate()?;
        let pts = match self {
            ScanSpec::Exhaustive(g) => {
                let deltas = unit_grid(g.delta_steps);
                let mut pts = Vec::new();
                for k in 1..=g.k_max {
                    for n in k..=g.n_max {
                        for m in 0..=n {
                            for &d in &deltas {
                                pts.push(SystemParams::with_delta(k, n, m as f64, d)?);
                            }
                        }
                    }
                }
                pts
            }
            ScanSpec::Sampled(g) => {
                let deltas = unit_grid(g.delta_steps);
                let per_k: Vec<Vec<SystemParams>> = (1..=g.k_max)
                    .map(|k| {
                        let mut rng = rng::stream(g.seed, &[k as u64]);
                        (0..g.samples_per_k)
                            .map(|_| {
                                let n = rng.random_range(k..=g.n_max);
                                let m = rng.random_range(0..=n);
                                let d = deltas[rng.random_range(0..deltas.len())];
                                SystemParams::with_delta(k, n, m as f64, d)
                            })
                            .collect::<Result<Vec<_>>>()
                    })
                    .collect::<Result<_>>()?;
                per_k.into_iter().flatten().collect()
            }
        };
        Ok(pts)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub points: usize,
    pub flagged: usize,
    pub max_ratio: Option<f64>,
    pub argmax: Option<GapRecord>,
    /// Points whose ratio exceeds [`THEOREM_GAP`].
    pub violations: usize,
}

impl SchemeSummary {
    fn empty(scheme: Scheme) -> Self {
        SchemeSummary {
            scheme,
            points: 0,
            flagged: 0,
            max_ratio: None,
            argmax: None,
            violations: 0,
        }
    }

    fn absorb(&mut self, r: &GapRecord) {
        self.points += 1;
        match r.ratio {
            Some(x) if r.flag == GapFlag::Ok => {
                if x > THEOREM_GAP {
                    self.violations += 1;
                }
                if self.max_ratio.is_none_or(|best| x > best) {
                    self.max_ratio = Some(x);
                    self.argmax = Some(*r);
                }
            }
            _ if r.flag == GapFlag::ZeroBound => self.flagged += 1,
            _ => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanSummary {
    pub spec: ScanSpec,
    pub schemes: Vec<SchemeSummary>,
}

impl ScanSummary {
    pub fn for_scheme(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.schemes.iter().find(|s| s.scheme == scheme)
    }

    pub fn violations(&self) -> usize {
        self.schemes.iter().map(|s| s.violations).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanResult {
    pub records: Vec<GapRecord>,
    pub summary: ScanSummary,
}

/// Evaluates every grid point for each scheme. Records are ordered by grid
/// point, then by scheme in the order given. Runs on the ambient rayon pool.
pub fn scan(spec: &ScanSpec, schemes: &[Scheme]) -> Result<ScanResult> {
    let points = spec.points()?;
    let records: Vec<GapRecord> = points
        .par_iter()
        .flat_map_iter(|p| schemes.iter().map(move |&s| gap(p, s)))
        .collect();
    let mut sums: Vec<SchemeSummary> = schemes.iter().map(|&s| SchemeSummary::empty(s)).collect();
    for r in &records {
        if let Some(sum) = sums.iter_mut().find(|s| s.scheme == r.scheme) {
            sum.absorb(r);
        }
    }
    Ok(ScanResult {
        records,
        summary: ScanSummary {
            spec: spec.clone(),
            schemes: sums,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CenDecenRecord {
    pub k: usize,
    pub mu: f64,
    pub delta: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CenDecenSummary {
    pub k_max: usize,
    pub mu_steps: usize,
    pub delta_steps: usize,
    pub points: usize,
    pub max_ratio: f64,
    pub argmax: CenDecenRecord,
}

/// Centralized-to-decentralized GDoF ratio over `K in 1..=k_max` and unit grids
/// in `mu` and `delta`.
pub fn scan_cen_vs_decen(
    k_max: usize,
    mu_steps: usize,
    delta_steps: usize,
) -> Result<(Vec<CenDecenRecord>, CenDecenSummary)> {
    if k_max == 0 {
        return Err(range_err("K_max must be at least 1"));
    }
    let mus = unit_grid(mu_steps);
    let deltas = unit_grid(delta_steps);
    let records: Vec<CenDecenRecord> = (1..=k_max)
        .into_par_iter()
        .flat_map_iter(|k| {
            let deltas = &deltas;
            mus.iter().flat_map(move |&mu| {
                deltas.iter().map(move |&delta| CenDecenRecord {
                    k,
                    mu,
                    delta,
                    ratio: gap_cen_vs_decen(k, mu, delta).expect("grid lies in range"),
                })
            })
        })
        .collect();
    let argmax = records
        .iter()
        .copied()
        .reduce(|best, r| if r.ratio > best.ratio { r } else { best })
        .expect("grid is non-empty");
    let summary = CenDecenSummary {
        k_max,
        mu_steps,
        delta_steps,
        points: records.len(),
        max_ratio: argmax.ratio,
        argmax,
    };
    Ok((records, summary))
}

//! Closed-form achievable delivery times (GNDT) and GDoF.
//!
//! Centralized placement achieves, at cache points `mu = t/K`,
//!
//! ```text
//! GNDT_C(t/K, delta) = K (1 - t/K) / (K (1 - delta) + (1 + t) delta)
//! ```
//!
//! and memory-sharing between neighbouring grid points everywhere else. The
//! grid expression is convex in `mu`, so the lower convex envelope is exactly
//! the piecewise-linear interpolation through the `K + 1` grid points.
//!
//! Decentralized placement achieves a binomial mixture of the same
//! denominators, one per delivery sub-phase `m = 0..K-1`.

use serde::Serialize;

use crate::error::{range_err, Error, Result};
use crate::model::{check_unit, GndtKind, GndtPoint, OperatingPoint};

/// `C(n, k)` as a float. Exact below `n = 50`, log-gamma based above.
pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    if n <= 50 {
        let k = k.min(n - k);
        let mut acc: u128 = 1;
        for i in 0..k {
            acc = acc * (n - i) as u128 / (i + 1) as u128;
        }
        acc as f64
    } else {
        statrs::function::factorial::ln_binomial(n as u64, k as u64).exp()
    }
}

/// Shared denominator `K(1 - delta) + (1 + m) delta`: the aggregate delivery
/// rate, in files per time-slot, when multicast messages have order `1 + m`.
pub(crate) fn layer_rate(k: usize, m: f64, delta: f64) -> f64 {
    k as f64 * (1.0 - delta) + (1.0 + m) * delta
}

fn check_k(k: usize) -> Result<()> {
    if k == 0 {
        Err(range_err("K must be at least 1"))
    } else {
        Ok(())
    }
}

/// Centralized GNDT at the grid point `mu = t / K`.
pub fn gndt_centralized_grid(k: usize, t: usize, delta: f64) -> Result<f64> {
    check_k(k)?;
    if t > k {
        return Err(range_err(format!("t must lie in [0, K] (t={t}, K={k})")));
    }
    check_unit("delta", delta)?;
    if t == k {
        return Ok(0.0);
    }
    Ok((k - t) as f64 / layer_rate(k, t as f64, delta))
}

/// Grid values of the centralized delivery time for one `(K, delta)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvelopeTable {
    pub k: usize,
    pub delta: f64,
    /// Entry `t` holds the delivery time at `mu = t / K`; entry `K` is zero.
    pub grid_values: Vec<f64>,
}

impl EnvelopeTable {
    pub fn new(k: usize, delta: f64) -> Result<Self> {
        let grid_values = (0..=k)
            .map(|t| gndt_centralized_grid(k, t, delta))
            .collect::<Result<Vec<_>>>()?;
        Ok(EnvelopeTable {
            k,
            delta,
            grid_values,
        })
    }

    /// Lower convex envelope evaluated at `mu`.
    pub fn eval(&self, mu: f64) -> Result<f64> {
        check_unit("mu", mu)?;
        let (lo, frac) = grid_position(self.k, mu);
        if frac == 0.0 {
            return Ok(self.grid_values[lo]);
        }
        Ok((1.0 - frac) * self.grid_values[lo] + frac * self.grid_values[lo + 1])
    }

    /// Second differences of the grid values; non-negative up to rounding.
    pub fn second_differences(&self) -> Vec<f64> {
        self.grid_values
            .windows(3)
            .map(|w| w[0] - 2.0 * w[1] + w[2])
            .collect()
    }
}

/// Splits `K * mu` into a grid index and a fractional offset in `[0, 1)`,
/// snapping to the grid within a few ulps.
fn grid_position(k: usize, mu: f64) -> (usize, f64) {
    let x = k as f64 * mu;
    let nearest = x.round();
    if (x - nearest).abs() <= 1e-12 * (k as f64).max(1.0) {
        return (nearest as usize, 0.0);
    }
    let lo = x.floor();
    (lo as usize, x - lo)
}

/// Centralized GNDT: the grid value when `K mu` is integral, memory-sharing otherwise.
pub fn gndt_centralized(k: usize, mu: f64, delta: f64) -> Result<f64> {
    check_k(k)?;
    check_unit("mu", mu)?;
    check_unit("delta", delta)?;
    let (lo, frac) = grid_position(k, mu);
    let at_lo = gndt_centralized_grid(k, lo, delta)?;
    if frac == 0.0 {
        return Ok(at_lo);
    }
    let at_hi = gndt_centralized_grid(k, lo + 1, delta)?;
    Ok((1.0 - frac) * at_lo + frac * at_hi)
}

fn gdof_from(k: usize, gndt: f64, what: &str) -> Result<f64> {
    if gndt > 0.0 {
        Ok(k as f64 / gndt)
    } else {
        Err(Error::Degenerate(format!(
            "{what} delivery time is zero; GDoF is unbounded"
        )))
    }
}

pub fn gdof_centralized(k: usize, mu: f64, delta: f64) -> Result<f64> {
    gdof_from(k, gndt_centralized(k, mu, delta)?, "centralized")
}

/// Weights `b_m = C(K-1, m) mu^m (1-mu)^(K-1-m)` of the decentralized sub-phases,
/// normalized by the total uncached load `K(1 - mu)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecentralizedWeights {
    pub k: usize,
    pub mu: f64,
    pub weights: Vec<f64>,
}

impl DecentralizedWeights {
    pub fn new(k: usize, mu: f64) -> Result<Self> {
        check_k(k)?;
        check_unit("mu", mu)?;
        if mu == 1.0 {
            return Err(range_err(
                "decentralized weights are undefined at mu = 1 (zero delivery time)",
            ));
        }
        let weights = (0..k)
            .map(|m| binomial(k - 1, m) * powi(mu, m) * powi(1.0 - mu, k - 1 - m))
            .collect();
        Ok(DecentralizedWeights { k, mu, weights })
    }

    pub fn sum(&self) -> f64 {
        self.weights.iter().sum()
    }
}

fn powi(base: f64, exp: usize) -> f64 {
    base.powi(exp as i32)
}

/// Expected load of sub-phase `m` in files: `K C(K-1, m) mu^m (1-mu)^(K-m)`.
pub fn subphase_load(k: usize, m: usize, mu: f64) -> f64 {
    k as f64 * binomial(k - 1, m) * powi(mu, m) * powi(1.0 - mu, k - m)
}

/// Decentralized GNDT: sum over sub-phases of load divided by layer rate.
pub fn gndt_decentralized(k: usize, mu: f64, delta: f64) -> Result<f64> {
    check_k(k)?;
    check_unit("mu", mu)?;
    check_unit("delta", delta)?;
    if mu == 1.0 {
        return Ok(0.0);
    }
    Ok((0..k)
        .map(|m| subphase_load(k, m, mu) / layer_rate(k, m as f64, delta))
        .sum())
}

pub fn gdof_decentralized(k: usize, mu: f64, delta: f64) -> Result<f64> {
    gdof_from(k, gndt_decentralized(k, mu, delta)?, "decentralized")
}

/// Effective multicast order `u` of the decentralized scheme, defined through
/// `1 + u = K mu / (1 - (1 - mu)^K)`. Zero at `mu = 0`.
pub fn u_param(k: usize, mu: f64) -> Result<f64> {
    check_k(k)?;
    check_unit("mu", mu)?;
    if mu == 1.0 {
        return Err(range_err("u is undefined at mu = 1"));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    // 1 - (1 - mu)^K, accurate for small mu.
    let uncached_somewhere = -(k as f64 * (-mu).ln_1p()).exp_m1();
    Ok(k as f64 * mu / uncached_somewhere - 1.0)
}

/// Upper bound on the decentralized GNDT in centralized form, with the
/// multicast order `K mu` replaced by `u`.
pub fn gndt_decentralized_ub(k: usize, mu: f64, delta: f64) -> Result<f64> {
    check_unit("delta", delta)?;
    let u = u_param(k, mu)?;
    Ok(k as f64 * (1.0 - mu) / layer_rate(k, u, delta))
}

/// Centralized, decentralized and decentralized-upper GNDT at one point.
/// The `mu = 1` limit (everything cached) evaluates to zero for all three.
pub fn evaluate(point: OperatingPoint) -> Result<[GndtPoint; 3]> {
    let OperatingPoint { k, mu, delta } = point;
    let ub = if mu == 1.0 {
        0.0
    } else {
        gndt_decentralized_ub(k, mu, delta)?
    };
    Ok([
        GndtPoint::new(
            point,
            GndtKind::CentralizedAchievable,
            gndt_centralized(k, mu, delta)?,
        ),
        GndtPoint::new(
            point,
            GndtKind::DecentralizedAchievable,
            gndt_decentralized(k, mu, delta)?,
        ),
        GndtPoint::new(point, GndtKind::DecentralizedUpper, ub),
    ])
}

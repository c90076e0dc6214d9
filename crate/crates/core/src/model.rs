//! System parameters of the symmetric cache-aided MISO broadcast channel.
//!
//! A `K`-antenna transmitter serves `K` single-antenna users from a library of
//! `N` files. Every user holds a cache of `M` files. Cross links have strength
//! level `alpha` relative to the direct links and the transmitter knows the
//! channel up to an error of level `beta`. All delivery-time expressions depend
//! on the channel only through `delta = alpha - beta`.

use serde::{Deserialize, Serialize};

use crate::error::{range_err, Result};

/// Validated parameter tuple `(K, N, M, alpha, beta)` with derived `mu` and `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    k: usize,
    n: usize,
    m: f64,
    alpha: f64,
    beta: f64,
    mu: f64,
    delta: f64,
}

impl SystemParams {
    /// Validates the raw tuple. Every input either yields parameters or a
    /// [`crate::Error::Range`] naming the violated constraint.
    pub fn new(k: usize, n: usize, m: f64, alpha: f64, beta: f64) -> Result<Self> {
        if k == 0 {
            return Err(range_err("K must be at least 1"));
        }
        if n < k {
            return Err(range_err(format!("N below K (N={n}, K={k})")));
        }
        if !(m >= 0.0 && m <= n as f64) {
            return Err(range_err(format!("M must lie in [0, N] (M={m}, N={n})")));
        }
        let delta = channel_delta(alpha, beta)?;
        Ok(SystemParams {
            k,
            n,
            m,
            alpha,
            beta,
            mu: m / n as f64,
            delta,
        })
    }

    /// Parameters specified through `delta` directly, taking `alpha = delta` and `beta = 0`.
    pub fn with_delta(k: usize, n: usize, m: f64, delta: f64) -> Result<Self> {
        check_unit("delta", delta)?;
        Self::new(k, n, m, delta, 0.0)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Normalized cache size `M / N`.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// Effective CSIT uncertainty level `alpha - beta`.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn operating_point(&self) -> OperatingPoint {
        OperatingPoint {
            k: self.k,
            mu: self.mu,
            delta: self.delta,
        }
    }
}

/// The reduced coordinates `(K, mu, delta)` on which achievable delivery times depend.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperatingPoint {
    pub k: usize,
    pub mu: f64,
    pub delta: f64,
}

impl OperatingPoint {
    pub fn new(k: usize, mu: f64, delta: f64) -> Result<Self> {
        if k == 0 {
            return Err(range_err("K must be at least 1"));
        }
        check_unit("mu", mu)?;
        check_unit("delta", delta)?;
        Ok(OperatingPoint { k, mu, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GndtKind {
    CentralizedAchievable,
    DecentralizedAchievable,
    DecentralizedUpper,
    LowerBound,
}

impl GndtKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            GndtKind::CentralizedAchievable => "centralized",
            GndtKind::DecentralizedAchievable => "decentralized",
            GndtKind::DecentralizedUpper => "decentralized_ub",
            GndtKind::LowerBound => "lower_bound",
        }
    }
}

/// An evaluated delivery time together with its GDoF. `gdof` is `None` when
/// the delivery time is zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GndtPoint {
    pub point: OperatingPoint,
    pub kind: GndtKind,
    pub value: f64,
    pub gdof: Option<f64>,
}

impl GndtPoint {
    pub fn new(point: OperatingPoint, kind: GndtKind, value: f64) -> Self {
        let gdof = (value > 0.0).then(|| point.k as f64 / value);
        GndtPoint {
            point,
            kind,
            value,
            gdof,
        }
    }
}

/// `alpha - beta` after checking `0 <= beta <= alpha <= 1`.
pub fn channel_delta(alpha: f64, beta: f64) -> Result<f64> {
    check_unit("alpha", alpha)?;
    check_unit("beta", beta)?;
    if beta > alpha {
        return Err(range_err(format!(
            "beta exceeds alpha (alpha={alpha}, beta={beta})"
        )));
    }
    Ok(alpha - beta)
}

pub(crate) fn check_unit(name: &str, x: f64) -> Result<()> {
    if (0.0..=1.0).contains(&x) {
        Ok(())
    } else {
        Err(range_err(format!("{name} must lie in [0, 1] (got {x})")))
    }
}

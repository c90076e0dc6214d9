//! Monte Carlo check of the rate-splitting layer rates.
//!
//! The transmitter superposes a common codeword on a generic direction with
//! power fraction `1 - P^(beta-alpha)` and `K` private codewords on
//! zero-forcing directions computed from channel estimates with the remaining
//! `P^(beta-alpha)`. Users decode the common codeword first treating the
//! private layer as noise, then their own private codeword. Regressing mean
//! rates against `log2 P` recovers the common slope `alpha - beta` and the
//! private slope `1 - (alpha - beta)`.
//!
//! Each trial draws one estimate matrix, one error matrix and one common
//! direction, reused across the whole SNR grid, so the per-trial randomness
//! cancels in the slope.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{range_err, Result};
use crate::model::check_unit;
use crate::{rng, Error};

const PHY_STREAM: u64 = 3;
const MAX_REDRAWS: u64 = 64;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhyConfig {
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    /// Ascending SNR values `P`.
    pub snr_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Channel magnitudes are uniform on this interval.
    pub magnitude_bounds: (f64, f64),
    /// Estimate matrices with a larger condition number are redrawn.
    pub condition_limit: f64,
    /// Largest accepted residual variance of a slope fit, in bits squared.
    pub residual_limit: f64,
}

impl PhyConfig {
    /// Defaults: `P = 10^8 .. 10^13` by decades, 500 trials, magnitudes on `[0.5, 2]`.
    pub fn new(k: usize, alpha: f64, beta: f64, seed: u64) -> Result<Self> {
        let config = PhyConfig {
            k,
            alpha,
            beta,
            snr_grid: decade_grid(8, 13),
            trials: 500,
            seed,
            magnitude_bounds: (0.5, 2.0),
            condition_limit: 1e8,
            residual_limit: 0.05,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn delta(&self) -> f64 {
        self.alpha - self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 || self.k > 16 {
            return Err(range_err(format!("K must lie in [1, 16] (K={})", self.k)));
        }
        check_unit("alpha", self.alpha)?;
        check_unit("beta", self.beta)?;
        if self.beta > self.alpha {
            return Err(range_err(format!(
                "beta exceeds alpha (alpha={}, beta={})",
                self.alpha, self.beta
            )));
        }
        let grid = &self.snr_grid;
        if grid.len() < 3 {
            return Err(range_err("SNR grid needs at least 3 points"));
        }
        if grid.iter().any(|&p| !(p >= 1.0 && p.is_finite())) {
            return Err(range_err("SNR values must be finite and at least 1"));
        }
        if grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(range_err("SNR grid must be strictly ascending"));
        }
        if (grid[grid.len() - 1] / grid[0]).log10() < 3.0 - 1e-9 {
            return Err(range_err("SNR grid must span at least 3 decades"));
        }
        if self.trials < 100 {
            return Err(range_err(format!(
                "at least 100 trials required (got {})",
                self.trials
            )));
        }
        let (lo, hi) = self.magnitude_bounds;
        if !(lo > 0.0 && lo < hi && hi.is_finite()) {
            return Err(range_err(format!(
                "magnitude bounds must satisfy 0 < g_min < g_max (got [{lo}, {hi}])"
            )));
        }
        if self.condition_limit.is_nan()
            || self.condition_limit <= 1.0
            || self.residual_limit.is_nan()
            || self.residual_limit <= 0.0
        {
            return Err(range_err("condition and residual limits must be positive"));
        }
        Ok(())
    }
}

/// `10^lo, 10^(lo+1), ..., 10^hi`.
pub fn decade_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|e| 10f64.powi(e)).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub estimates: DMatrix<Complex64>,
    pub errors: DMatrix<Complex64>,
    /// `estimates + P^(-beta/2) * errors`.
    pub true_channel: DMatrix<Complex64>,
    /// Unit vector carrying the common codeword.
    pub common_direction: DVector<Complex64>,
}

fn draw_entry<R: Rng>(rng: &mut R, (lo, hi): (f64, f64)) -> Complex64 {
    let mag = rng.random_range(lo..=hi);
    let phase = rng.random_range(0.0..std::f64::consts::TAU);
    Complex64::from_polar(mag, phase)
}

/// Draws a channel at SNR `p`. The random part depends only on
/// `trial_seed`, so the same seed at different `p` gives the same estimates
/// and errors.
pub fn sample_channel(config: &PhyConfig, p: f64, trial_seed: u64) -> ChannelRealization {
    let k = config.k;
    let bounds = config.magnitude_bounds;
    let mut rng = rng::stream(trial_seed, &[]);
    let estimates = DMatrix::from_fn(k, k, |_, _| draw_entry(&mut rng, bounds));
    let errors = DMatrix::from_fn(k, k, |_, _| draw_entry(&mut rng, bounds));
    let direction = DVector::from_fn(k, |_, _| draw_entry(&mut rng, bounds));
    let common_direction = direction.normalize();
    let scale = p.powf(-config.beta / 2.0);
    let true_channel = &estimates + &errors * Complex64::from(scale);
    ChannelRealization {
        estimates,
        errors,
        true_channel,
        common_direction,
    }
}

/// Row `i` of `channel` scaled by the strength pattern: entry `(i, i)` by 1,
/// the others by `P^((alpha-1)/2)`.
pub fn strength_weighted(channel: &DMatrix<Complex64>, alpha: f64, p: f64) -> DMatrix<Complex64> {
    let cross = p.powf((alpha - 1.0) / 2.0);
    DMatrix::from_fn(channel.nrows(), channel.ncols(), |i, j| {
        if i == j {
            channel[(i, j)]
        } else {
            channel[(i, j)] * cross
        }
    })
}

/// Unit zero-forcing precoders, one per column: column `k` is orthogonal to
/// every strength-weighted estimate row `i != k`.
pub fn zf_vectors(
    estimates: &DMatrix<Complex64>,
    alpha: f64,
    p: f64,
    condition_limit: f64,
) -> Result<DMatrix<Complex64>> {
    let b = strength_weighted(estimates, alpha, p);
    let sv = b.clone().svd(false, false).singular_values;
    let smax = sv.max();
    let smin = sv.min();
    let condition = if smin > 0.0 {
        smax / smin
    } else {
        f64::INFINITY
    };
    if condition.is_nan() || condition > condition_limit {
        return Err(Error::Singular { condition });
    }
    let inv = b.try_inverse().ok_or(Error::Singular { condition })?;
    let mut v = inv;
    for mut col in v.column_iter_mut() {
        let norm = col.norm();
        col /= Complex64::from(norm);
    }
    Ok(v)
}

/// Largest off-diagonal magnitude of `B V`, where `B` is the strength-weighted
/// estimate and `V` the precoders.
pub fn zf_residual(
    estimates: &DMatrix<Complex64>,
    precoders: &DMatrix<Complex64>,
    alpha: f64,
    p: f64,
) -> f64 {
    let prod = strength_weighted(estimates, alpha, p) * precoders;
    let mut worst = 0.0f64;
    for i in 0..prod.nrows() {
        for j in 0..prod.ncols() {
            if i != j {
                worst = worst.max(prod[(i, j)].norm());
            }
        }
    }
    worst
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSample {
    pub p: f64,
    pub common_rate: f64,
    pub private_rates: Vec<f64>,
    /// Per user, private-layer power plus noise seen while decoding the common codeword.
    pub common_interference: Vec<f64>,
    /// Per user, other users' private power plus noise seen after common removal.
    pub private_interference: Vec<f64>,
    /// Largest per-antenna transmit power.
    pub max_entry_power: f64,
    /// Squared scalar applied to the transmit vector to meet the power constraint.
    pub normalization: f64,
    /// [`zf_residual`] of the precoders used.
    pub zf_residual: f64,
}

fn dot(row: &[Complex64], v: impl Iterator<Item = Complex64>) -> Complex64 {
    row.iter().zip(v).map(|(a, b)| a * b).sum()
}

/// Rates of one channel realization at SNR `p`, noise of unit variance.
pub fn rate_sample(real: &ChannelRealization, config: &PhyConfig, p: f64) -> Result<RateSample> {
    let k = config.k;
    let precoders = zf_vectors(&real.estimates, config.alpha, p, config.condition_limit)?;
    let zf_residual = zf_residual(&real.estimates, &precoders, config.alpha, p);
    let private_share = p.powf(config.beta - config.alpha).min(1.0);
    let common_share = 1.0 - private_share;

    let entry_power: Vec<f64> = (0..k)
        .map(|j| {
            common_share * real.common_direction[j].norm_sqr()
                + private_share * precoders.row(j).iter().map(|x| x.norm_sqr()).sum::<f64>()
        })
        .collect();
    let peak = entry_power.iter().copied().fold(0.0, f64::max);
    let normalization = 1.0 / peak;
    let max_entry_power = peak * normalization;

    let h = strength_weighted(&real.true_channel, config.alpha, p) * Complex64::from(p.sqrt());
    let mut common_rate = f64::INFINITY;
    let mut private_rates = Vec::with_capacity(k);
    let mut common_interference = Vec::with_capacity(k);
    let mut private_interference = Vec::with_capacity(k);
    for i in 0..k {
        let row: Vec<Complex64> = h.row(i).iter().copied().collect();
        let gains: Vec<f64> = (0..k)
            .map(|c| {
                normalization
                    * private_share
                    * dot(&row, precoders.column(c).iter().copied()).norm_sqr()
            })
            .collect();
        let common_gain = normalization
            * common_share
            * dot(&row, real.common_direction.iter().copied()).norm_sqr();
        let total_private: f64 = gains.iter().sum();
        let cross = total_private - gains[i];
        let ci = total_private + 1.0;
        let pi = cross.max(0.0) + 1.0;
        common_rate = common_rate.min((common_gain / ci).ln_1p() / std::f64::consts::LN_2);
        private_rates.push((gains[i] / pi).ln_1p() / std::f64::consts::LN_2);
        common_interference.push(ci);
        private_interference.push(pi);
    }
    Ok(RateSample {
        p,
        common_rate,
        private_rates,
        common_interference,
        private_interference,
        max_entry_power,
        normalization,
        zf_residual,
    })
}

/// Ordinary least-squares line through `(x, y)` with a 95% half-width on the slope.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub half_width: f64,
    pub residual_variance: f64,
    pub points_used: usize,
    pub discarded_lowest_decade: bool,
}

fn ols(x: &[f64], y: &[f64]) -> SlopeFit {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| (b - intercept - slope * a).powi(2))
        .sum();
    let dof = n - 2.0;
    let residual_variance = sse / dof;
    let t = StudentsT::new(0.0, 1.0, dof)
        .map(|d| d.inverse_cdf(0.975))
        .unwrap_or(f64::NAN);
    SlopeFit {
        slope,
        intercept,
        half_width: t * (residual_variance / sxx).sqrt(),
        residual_variance,
        points_used: x.len(),
        discarded_lowest_decade: false,
    }
}

/// Fits `y` against `log2 P`. When the residual variance exceeds `limit`
/// the points in the lowest decade are dropped and the fit is repeated.
pub fn fit_slope(snr: &[f64], y: &[f64], limit: f64) -> Result<SlopeFit> {
    if snr.len() != y.len() || snr.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 matching points (got {} and {})",
            snr.len(),
            y.len()
        )));
    }
    let x: Vec<f64> = snr.iter().map(|p| p.log2()).collect();
    let fit = ols(&x, y);
    if fit.residual_variance <= limit {
        return Ok(fit);
    }
    let cut = snr[0] * 10.0 * (1.0 - 1e-12);
    let keep = snr.iter().position(|&p| p >= cut).unwrap_or(snr.len());
    if snr.len() - keep < 3 {
        return Err(Error::Fit(format!(
            "residual variance {:.3e} above {limit:.3e} and too few points above the lowest decade",
            fit.residual_variance
        )));
    }
    let mut refit = ols(&x[keep..], &y[keep..]);
    refit.discarded_lowest_decade = true;
    if refit.residual_variance > limit {
        return Err(Error::Fit(format!(
            "residual variance {:.3e} above {limit:.3e} after dropping the lowest decade",
            refit.residual_variance
        )));
    }
    Ok(refit)
}

/// Trial averages at one SNR.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridPoint {
    pub p: f64,
    pub mean_common_rate: f64,
    /// Averaged over users and trials.
    pub mean_private_rate: f64,
    /// Mean of `log2` of the interference-plus-noise seen by the common codeword.
    pub mean_log_common_interference: f64,
    /// Mean of `log2` of the interference-plus-noise seen by private codewords.
    pub mean_log_private_interference: f64,
}

/// Slopes from samples already averaged over trials.
pub fn estimate_slopes(points: &[GridPoint], limit: f64) -> Result<(SlopeFit, SlopeFit)> {
    let snr: Vec<f64> = points.iter().map(|g| g.p).collect();
    let common: Vec<f64> = points.iter().map(|g| g.mean_common_rate).collect();
    let private: Vec<f64> = points.iter().map(|g| g.mean_private_rate).collect();
    Ok((
        fit_slope(&snr, &common, limit)?,
        fit_slope(&snr, &private, limit)?,
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeReport {
    pub config: PhyConfig,
    pub expected_common_slope: f64,
    pub expected_private_slope: f64,
    pub points: Vec<GridPoint>,
    pub common: SlopeFit,
    pub private: SlopeFit,
    /// Growth exponent of the interference seen by the common codeword.
    pub common_interference_exponent: f64,
    /// Growth exponent of the interference seen after common removal.
    pub private_interference_exponent: f64,
    /// Largest per-antenna transmit power over all trials and SNRs.
    pub max_entry_power: f64,
    /// Smallest and largest normalization over all trials and SNRs.
    pub normalization_range: (f64, f64),
    /// Largest [`zf_residual`] over all trials and SNRs.
    pub max_zf_residual: f64,
    /// Trials whose first draw was rejected as singular.
    pub redraws: usize,
}

struct TrialOutcome {
    samples: Vec<RateSample>,
    redraws: usize,
}

fn run_trial(config: &PhyConfig, trial: usize) -> Result<TrialOutcome> {
    let mut last = Error::Singular {
        condition: f64::INFINITY,
    };
    for attempt in 0..MAX_REDRAWS {
        let seed = rng::derive_seed(config.seed, &[PHY_STREAM, trial as u64, attempt]);
        let samples: Result<Vec<RateSample>> = config
            .snr_grid
            .iter()
            .map(|&p| rate_sample(&sample_channel(config, p, seed), config, p))
            .collect();
        match samples {
            Ok(samples) => {
                return Ok(TrialOutcome {
                    samples,
                    redraws: attempt as usize,
                })
            }
            Err(e @ Error::Singular { .. }) => last = e,
            Err(e) => return Err(e),
        }
    }
    Err(last)
}

/// Runs every trial, averages per SNR in trial order, and fits the slopes.
pub fn run(config: &PhyConfig) -> Result<SlopeReport> {
    config.validate()?;
    let outcomes: Vec<TrialOutcome> = (0..config.trials)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;

    let k = config.k as f64;
    let n = config.trials as f64;
    let mut points = Vec::with_capacity(config.snr_grid.len());
    let mut max_entry_power = 0.0f64;
    let mut norm_lo = f64::INFINITY;
    let mut norm_hi = 0.0f64;
    let mut max_zf_residual = 0.0f64;
    for (idx, &p) in config.snr_grid.iter().enumerate() {
        let (mut c, mut pr, mut ci, mut pi) = (0.0, 0.0, 0.0, 0.0);
        for o in &outcomes {
            let s = &o.samples[idx];
            c += s.common_rate;
            pr += s.private_rates.iter().sum::<f64>() / k;
            ci += s.common_interference.iter().map(|v| v.log2()).sum::<f64>() / k;
            pi += s.private_interference.iter().map(|v| v.log2()).sum::<f64>() / k;
            max_entry_power = max_entry_power.max(s.max_entry_power);
            norm_lo = norm_lo.min(s.normalization);
            norm_hi = norm_hi.max(s.normalization);
            max_zf_residual = max_zf_residual.max(s.zf_residual);
        }
        points.push(GridPoint {
            p,
            mean_common_rate: c / n,
            mean_private_rate: pr / n,
            mean_log_common_interference: ci / n,
            mean_log_private_interference: pi / n,
        });
    }

    let (common, private) = estimate_slopes(&points, config.residual_limit)?;
    let snr: Vec<f64> = points.iter().map(|g| g.p).collect();
    let ci: Vec<f64> = points
        .iter()
        .map(|g| g.mean_log_common_interference)
        .collect();
    let pi: Vec<f64> = points
        .iter()
        .map(|g| g.mean_log_private_interference)
        .collect();
    let x: Vec<f64> = snr.iter().map(|p| p.log2()).collect();
    let delta = config.delta();
    Ok(SlopeReport {
        config: config.clone(),
        expected_common_slope: delta,
        expected_private_slope: 1.0 - delta,
        points,
        common,
        private,
        common_interference_exponent: ols(&x, &ci).slope,
        private_interference_exponent: ols(&x, &pi).slope,
        max_entry_power,
        normalization_range: (norm_lo, norm_hi),
        max_zf_residual,
        redraws: outcomes.iter().map(|o| o.redraws).sum(),
    })
}

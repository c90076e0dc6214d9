use miso_cache::phy::{run, PhyConfig, SlopeReport};
use miso_cache::rng::DEFAULT_SEED;
use serde::Serialize;

use crate::args::PhySlopeArgs;
use crate::error::{CliError, Status};
use crate::output::{Format, Sink};

#[derive(Debug, Serialize)]
pub struct PhyRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub alpha: f64,
    pub beta: f64,
    #[serde(rename = "P")]
    pub p: f64,
    pub mean_common_rate: f64,
    pub mean_private_rate: f64,
    pub mean_log_common_interference: f64,
    pub mean_log_private_interference: f64,
    pub common_slope: f64,
    pub common_half_width: f64,
    pub common_residual_variance: f64,
    pub common_discarded_lowest_decade: bool,
    pub private_slope: f64,
    pub private_half_width: f64,
    pub private_residual_variance: f64,
    pub private_discarded_lowest_decade: bool,
    pub expected_common_slope: f64,
    pub expected_private_slope: f64,
    pub common_interference_exponent: f64,
    pub private_interference_exponent: f64,
    pub max_entry_power: f64,
    pub max_zf_residual: f64,
    pub within_tolerance: bool,
}

#[derive(Debug, Serialize)]
struct PhyJson<'a> {
    tolerance: f64,
    within_tolerance: bool,
    #[serde(flatten)]
    report: &'a SlopeReport,
}

fn within(r: &SlopeReport, tol: f64) -> bool {
    (r.common.slope - r.expected_common_slope).abs() <= tol
        && (r.private.slope - r.expected_private_slope).abs() <= tol
}

pub fn phy_slope(args: &PhySlopeArgs) -> Result<Status, CliError> {
    if args.tolerance.is_nan() || args.tolerance < 0.0 {
        return Err(CliError::Usage("tolerance must be non-negative".into()));
    }
    let channel = args.channel.points()?;
    let snr_grid: Vec<f64> = args.log10_snr.0.iter().map(|e| 10f64.powf(*e)).collect();
    let mut reports = Vec::new();
    for &k in &args.k.0 {
        for &(alpha, beta) in &channel {
            let config = PhyConfig {
                k,
                alpha,
                beta,
                snr_grid: snr_grid.clone(),
                trials: args.trials,
                seed: args.seed.unwrap_or(DEFAULT_SEED),
                residual_limit: args.residual_limit,
                ..PhyConfig::new(1, 0.0, 0.0, 0)?
            };
            config.validate()?;
            reports.push(run(&config)?);
        }
    }

    let mut sink = Sink::open(&args.output, Format::Csv)?;
    match sink.format {
        Format::Csv => {
            let rows: Vec<PhyRow> = reports
                .iter()
                .flat_map(|r| {
                    let ok = within(r, args.tolerance);
                    r.points.iter().map(move |g| PhyRow {
                        k: r.config.k,
                        alpha: r.config.alpha,
                        beta: r.config.beta,
                        p: g.p,
                        mean_common_rate: g.mean_common_rate,
                        mean_private_rate: g.mean_private_rate,
                        mean_log_common_interference: g.mean_log_common_interference,
                        mean_log_private_interference: g.mean_log_private_interference,
                        common_slope: r.common.slope,
                        common_half_width: r.common.half_width,
                        common_residual_variance: r.common.residual_variance,
                        common_discarded_lowest_decade: r.common.discarded_lowest_decade,
                        private_slope: r.private.slope,
                        private_half_width: r.private.half_width,
                        private_residual_variance: r.private.residual_variance,
                        private_discarded_lowest_decade: r.private.discarded_lowest_decade,
                        expected_common_slope: r.expected_common_slope,
                        expected_private_slope: r.expected_private_slope,
                        common_interference_exponent: r.common_interference_exponent,
                        private_interference_exponent: r.private_interference_exponent,
                        max_entry_power: r.max_entry_power,
                        max_zf_residual: r.max_zf_residual,
                        within_tolerance: ok,
                    })
                })
                .collect();
            sink.csv(&rows)?
        }
        Format::Json => {
            let out: Vec<PhyJson> = reports
                .iter()
                .map(|r| PhyJson {
                    tolerance: args.tolerance,
                    within_tolerance: within(r, args.tolerance),
                    report: r,
                })
                .collect();
            sink.json(&out)?
        }
    }
    sink.finish()?;

    let mut failures = Vec::new();
    for r in &reports {
        let c = &r.config;
        eprintln!(
            "K={} alpha={} beta={}: common slope {:.4} (expected {}) private slope {:.4} (expected {})",
            c.k,
            c.alpha,
            c.beta,
            r.common.slope,
            r.expected_common_slope,
            r.private.slope,
            r.expected_private_slope
        );
        if !within(r, args.tolerance) {
            failures.push(format!("K={} alpha={} beta={}", c.k, c.alpha, c.beta));
        }
    }
    if !failures.is_empty() {
        return Ok(Status::Failed(format!(
            "slopes outside +/-{} for {}",
            args.tolerance,
            failures.join(", ")
        )));
    }
    Ok(Status::Ok)
}

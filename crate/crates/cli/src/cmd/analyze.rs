use miso_cache::analytics::evaluate;
use miso_cache::bounds::{gdof_ub, gndt_lb};
use miso_cache::model::channel_delta;
use miso_cache::{Error, OperatingPoint, SystemParams};
use serde::Serialize;

use crate::args::{AnalyzeArgs, BoundsArgs};
use crate::error::{CliError, Status};
use crate::output::{Format, Sink};

#[derive(Debug, Serialize)]
pub struct AnalyzeRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub gndt_centralized: f64,
    pub gdof_centralized: Option<f64>,
    pub gndt_decentralized: f64,
    pub gdof_decentralized: Option<f64>,
    pub gndt_decentralized_ub: f64,
    pub gdof_decentralized_ub: Option<f64>,
    /// `zero_time` when every delivery time vanishes, otherwise `none`.
    pub degenerate: &'static str,
}

pub fn analyze(args: &AnalyzeArgs) -> Result<Status, CliError> {
    let channel = args.channel.points()?;
    let mut rows = Vec::new();
    for &k in &args.k.0 {
        for &mu in &args.mu.0 {
            for &(alpha, beta) in &channel {
                let point = OperatingPoint::new(k, mu, channel_delta(alpha, beta)?)?;
                let [c, d, u] = evaluate(point)?;
                let zero = c.value == 0.0 && d.value == 0.0 && u.value == 0.0;
                rows.push(AnalyzeRow {
                    k,
                    mu,
                    alpha,
                    beta,
                    delta: point.delta,
                    gndt_centralized: c.value,
                    gdof_centralized: c.gdof,
                    gndt_decentralized: d.value,
                    gdof_decentralized: d.gdof,
                    gndt_decentralized_ub: u.value,
                    gdof_decentralized_ub: u.gdof,
                    degenerate: if zero { "zero_time" } else { "none" },
                });
            }
        }
    }
    let mut sink = Sink::open(&args.output, Format::Csv)?;
    sink.table(&rows)?;
    sink.finish()?;
    Ok(Status::Ok)
}

#[derive(Debug, Serialize)]
pub struct BoundsRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub gndt_lower_bound: f64,
    pub best_s: usize,
    pub gdof_upper_bound: Option<f64>,
    /// `zero_bound` when every term of the bound clamps to zero, otherwise `none`.
    pub degenerate: &'static str,
}

pub fn bounds(args: &BoundsArgs) -> Result<Status, CliError> {
    let channel = args.channel.points()?;
    let mut rows = Vec::new();
    for &k in &args.k.0 {
        for &n in &args.n.0 {
            for &m in &args.m.0 {
                for &(alpha, beta) in &channel {
                    let p = SystemParams::new(k, n, m, alpha, beta)?;
                    let (bound, best_s) = gndt_lb(k, n, m, p.delta())?;
                    let gdof = match gdof_ub(k, n, m, p.delta()) {
                        Ok(g) => Some(g),
                        Err(Error::Degenerate(_)) => None,
                        Err(e) => return Err(e.into()),
                    };
                    rows.push(BoundsRow {
                        k,
                        n,
                        m,
                        mu: p.mu(),
                        alpha,
                        beta,
                        delta: p.delta(),
                        gndt_lower_bound: bound,
                        best_s,
                        gdof_upper_bound: gdof,
                        degenerate: if gdof.is_none() { "zero_bound" } else { "none" },
                    });
                }
            }
        }
    }
    let mut sink = Sink::open(&args.output, Format::Csv)?;
    sink.table(&rows)?;
    sink.finish()?;
    Ok(Status::Ok)
}

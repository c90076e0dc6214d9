use std::fs;

use miso_cache::model::channel_delta;
use miso_cache::rng::DEFAULT_SEED;
use miso_cache::scheme::{dump, run_centralized, run_decentralized, Mode, SimConfig};
use serde::Serialize;
use serde_json::Value;

use crate::args::{SimMode, SimulateArgs};
use crate::error::{CliError, Status};
use crate::output::{Format, Sink};

#[derive(Debug, Serialize)]
pub struct SimulateRow {
    pub mode: &'static str,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "F")]
    pub file_bits: usize,
    pub t: Option<usize>,
    pub mu: f64,
    pub alpha: f64,
    pub beta: f64,
    pub delta: f64,
    pub seed: u64,
    pub common_bits: usize,
    pub max_private_bits: usize,
    pub common_time: f64,
    pub private_time: f64,
    pub measured_gndt: f64,
    pub analytic_gndt: f64,
    pub recovery_ok: bool,
}

/// One-based, comma-separated file indices to zero-based.
fn parse_demands(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|x| match x.trim().parse::<usize>() {
            Ok(d) if d >= 1 => Ok(d - 1),
            _ => Err(CliError::Usage(format!(
                "demands must be one-based file indices (got '{x}')"
            ))),
        })
        .collect()
}

pub fn simulate(args: &SimulateArgs) -> Result<Status, CliError> {
    let (alpha, beta) = args.channel.single()?;
    let delta = channel_delta(alpha, beta)?;
    let demands = match &args.demands {
        Some(s) => parse_demands(s)?,
        None => (0..args.k).collect(),
    };
    let config = SimConfig {
        k: args.k,
        n: args.n.unwrap_or(args.k),
        file_bits: args.file_bits,
        delta,
        seed: args.seed.unwrap_or(DEFAULT_SEED),
        demands,
    };
    let sim = match (args.mode, args.t, args.mu) {
        (SimMode::Centralized, Some(t), None) => run_centralized(&config, t)?,
        (SimMode::Decentralized, None, Some(mu)) => run_decentralized(&config, mu)?,
        (SimMode::Centralized, _, _) => {
            return Err(CliError::Usage(
                "centralized mode takes --t and not --mu".into(),
            ))
        }
        (SimMode::Decentralized, _, _) => {
            return Err(CliError::Usage(
                "decentralized mode takes --mu and not --t".into(),
            ))
        }
    };
    if let Some(path) = &args.dump {
        fs::write(path, dump::encode(&sim.log)?)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display())))?;
    }

    let r = &sim.report;
    let (t, mu) = match r.mode {
        Mode::Centralized { t } => (Some(t), t as f64 / r.config.k as f64),
        Mode::Decentralized { mu } => (None, mu),
    };
    let mut sink = Sink::open(&args.output, Format::Json)?;
    match sink.format {
        Format::Csv => sink.csv(&[SimulateRow {
            mode: match r.mode {
                Mode::Centralized { .. } => "centralized",
                Mode::Decentralized { .. } => "decentralized",
            },
            k: r.config.k,
            n: r.config.n,
            file_bits: r.config.file_bits,
            t,
            mu,
            alpha,
            beta,
            delta,
            seed: r.config.seed,
            common_bits: r.common_bits,
            max_private_bits: r.private_bits_per_user.iter().copied().max().unwrap_or(0),
            common_time: r.timing.common_time,
            private_time: r.timing.private_time,
            measured_gndt: r.timing.measured_gndt,
            analytic_gndt: r.timing.analytic_gndt,
            recovery_ok: r.recovery_ok,
        }])?,
        Format::Json => {
            let mut v = serde_json::to_value(r)?;
            if let Value::Object(obj) = &mut v {
                let one_based: Vec<usize> = r.config.demands.iter().map(|d| d + 1).collect();
                obj.insert("demands".into(), serde_json::to_value(one_based)?);
                obj.insert("alpha".into(), alpha.into());
                obj.insert("beta".into(), beta.into());
            }
            sink.json(&v)?
        }
    }
    sink.finish()?;
    if !r.recovery_ok {
        return Ok(Status::Failed("a user failed to recover its file".into()));
    }
    Ok(Status::Ok)
}

use serde::Serialize;

use super::delivery::{Mode, TransmissionLog};
use super::placement::CacheContents;
use super::{
    decode, deliver_centralized, deliver_decentralized, make_library, place_centralized,
    place_decentralized, Library,
};
use crate::analytics::{gndt_centralized, gndt_decentralized};
use crate::error::Result;
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerTiming {
    pub subphase: usize,
    pub common_bits: usize,
    pub max_private_bits: usize,
    pub common_time: f64,
    pub private_time: f64,
    /// `max(common_time, private_time)`; the two layers run simultaneously.
    pub time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Timing {
    pub measured_gndt: f64,
    pub analytic_gndt: f64,
    pub common_time: f64,
    pub private_time: f64,
    pub subphases: Vec<LayerTiming>,
}

fn layer_time(bits: usize, file_bits: usize, rate: f64, layer: &str) -> Result<f64> {
    if bits == 0 {
        Ok(0.0)
    } else if rate <= 0.0 {
        Err(Error::Degenerate(format!(
            "{bits} {layer} bits scheduled on a layer with zero rate"
        )))
    } else {
        Ok(bits as f64 / (file_bits as f64 * rate))
    }
}

/// Delivery time of a log when the common layer carries `delta` and the
/// private layer `1 - delta` files per time-slot. Sub-phases run one after
/// another.
pub fn measured_gndt(log: &TransmissionLog) -> Result<Timing> {
    let f = log.file_bits;
    let mut subphases = Vec::with_capacity(log.layers.len());
    for layer in &log.layers {
        let max_private_bits = layer.max_private_bits();
        let common_time = layer_time(layer.common_bits, f, log.delta, "common")?;
        let private_time = layer_time(max_private_bits, f, 1.0 - log.delta, "private")?;
        subphases.push(LayerTiming {
            subphase: layer.subphase,
            common_bits: layer.common_bits,
            max_private_bits,
            common_time,
            private_time,
            time: common_time.max(private_time),
        });
    }
    let analytic_gndt = match log.mode {
        Mode::Centralized { t } => gndt_centralized(log.k, t as f64 / log.k as f64, log.delta)?,
        Mode::Decentralized { mu } => gndt_decentralized(log.k, mu, log.delta)?,
    };
    Ok(Timing {
        measured_gndt: subphases.iter().map(|l| l.time).sum(),
        analytic_gndt,
        common_time: subphases.iter().map(|l| l.common_time).sum(),
        private_time: subphases.iter().map(|l| l.private_time).sum(),
        subphases,
    })
}

/// Inputs shared by both simulation modes. Demands are zero-based file indices.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimConfig {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "F")]
    pub file_bits: usize,
    pub delta: f64,
    pub seed: u64,
    pub demands: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeliveryReport {
    #[serde(flatten)]
    pub mode: Mode,
    #[serde(flatten)]
    pub config: SimConfig,
    pub cached_bits_per_user: Vec<usize>,
    pub common_bits: usize,
    pub private_bits_per_user: Vec<usize>,
    #[serde(flatten)]
    pub timing: Timing,
    pub recovery_ok: bool,
}

/// A finished run: the report plus everything needed to inspect it.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub report: DeliveryReport,
    pub library: Library,
    pub caches: Vec<CacheContents>,
    pub log: TransmissionLog,
}

fn finish(
    config: &SimConfig,
    library: Library,
    caches: Vec<CacheContents>,
    log: TransmissionLog,
) -> Result<Simulation> {
    let timing = measured_gndt(&log)?;
    let mut recovery_ok = true;
    for (user, cache) in caches.iter().enumerate() {
        let file = decode(user, cache, &log)?;
        recovery_ok &= &file == library.file(log.demands[user]);
    }
    let report = DeliveryReport {
        mode: log.mode,
        config: config.clone(),
        cached_bits_per_user: caches.iter().map(CacheContents::cached_bits).collect(),
        common_bits: log.common_bits(),
        private_bits_per_user: (0..config.k).map(|u| log.private_bits(u)).collect(),
        timing,
        recovery_ok,
    };
    Ok(Simulation {
        report,
        library,
        caches,
        log,
    })
}

pub fn run_centralized(config: &SimConfig, t: usize) -> Result<Simulation> {
    let library = make_library(config.n, config.file_bits, config.seed)?;
    let placement = place_centralized(config.k, t, &library)?;
    let log = deliver_centralized(&placement, &library, &config.demands, config.delta)?;
    finish(config, library, placement.caches, log)
}

pub fn run_decentralized(config: &SimConfig, mu: f64) -> Result<Simulation> {
    let library = make_library(config.n, config.file_bits, config.seed)?;
    let placement = place_decentralized(config.k, mu, &library, config.seed)?;
    let log = deliver_decentralized(&placement, &library, &config.demands, config.delta)?;
    finish(config, library, placement.caches, log)
}

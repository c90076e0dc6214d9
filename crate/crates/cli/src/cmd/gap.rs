use miso_cache::bounds::{
    scan, scan_cen_vs_decen, CenDecenRecord, CenDecenSummary, ExhaustiveGrid, GapRecord,
    SampledGrid, ScanSpec, Scheme, SchemeSummary, CEN_DECEN_GAP, THEOREM_GAP,
};
use miso_cache::rng::DEFAULT_SEED;
use serde::Serialize;

use crate::args::{GapScanArgs, GridKind, SchemeChoice};
use crate::error::{CliError, Status};
use crate::output::{Format, Sink};

#[derive(Debug, Serialize)]
pub struct GapRow {
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: f64,
    pub mu: f64,
    pub delta: f64,
    pub scheme: &'static str,
    pub achievable: f64,
    pub bound: f64,
    pub best_s: usize,
    pub ratio: Option<f64>,
    pub flag: &'static str,
}

impl From<&GapRecord> for GapRow {
    fn from(r: &GapRecord) -> Self {
        GapRow {
            k: r.params.k(),
            n: r.params.n(),
            m: r.params.m(),
            mu: r.params.mu(),
            delta: r.params.delta(),
            scheme: r.scheme.as_str(),
            achievable: r.achievable,
            bound: r.bound,
            best_s: r.best_s,
            ratio: r.ratio,
            flag: r.flag.as_str(),
        }
    }
}

#[derive(Debug, Serialize)]
pub struct GapSummaryRow {
    pub scheme: &'static str,
    pub points: usize,
    pub flagged: usize,
    pub max_ratio: Option<f64>,
    #[serde(rename = "argmax_K")]
    pub argmax_k: Option<usize>,
    #[serde(rename = "argmax_N")]
    pub argmax_n: Option<usize>,
    #[serde(rename = "argmax_M")]
    pub argmax_m: Option<f64>,
    pub argmax_delta: Option<f64>,
    pub violations: usize,
}

impl From<&SchemeSummary> for GapSummaryRow {
    fn from(s: &SchemeSummary) -> Self {
        let arg = s.argmax.as_ref().map(|r| r.params);
        GapSummaryRow {
            scheme: s.scheme.as_str(),
            points: s.points,
            flagged: s.flagged,
            max_ratio: s.max_ratio,
            argmax_k: arg.map(|p| p.k()),
            argmax_n: arg.map(|p| p.n()),
            argmax_m: arg.map(|p| p.m()),
            argmax_delta: arg.map(|p| p.delta()),
            violations: s.violations,
        }
    }
}

#[derive(Debug, Serialize)]
struct GapJson<'a> {
    summary: &'a [GapSummaryRow],
    #[serde(skip_serializing_if = "Option::is_none")]
    records: Option<Vec<GapRow>>,
}

#[derive(Debug, Serialize)]
pub struct CenDecenSummaryRow {
    #[serde(rename = "K_max")]
    pub k_max: usize,
    pub mu_steps: usize,
    pub delta_steps: usize,
    pub points: usize,
    pub max_ratio: f64,
    #[serde(rename = "argmax_K")]
    pub argmax_k: usize,
    pub argmax_mu: f64,
    pub argmax_delta: f64,
}

impl From<&CenDecenSummary> for CenDecenSummaryRow {
    fn from(s: &CenDecenSummary) -> Self {
        CenDecenSummaryRow {
            k_max: s.k_max,
            mu_steps: s.mu_steps,
            delta_steps: s.delta_steps,
            points: s.points,
            max_ratio: s.max_ratio,
            argmax_k: s.argmax.k,
            argmax_mu: s.argmax.mu,
            argmax_delta: s.argmax.delta,
        }
    }
}

#[derive(Debug, Serialize)]
pub struct CenDecenRow {
    #[serde(rename = "K")]
    pub k: usize,
    pub mu: f64,
    pub delta: f64,
    pub ratio: f64,
}

impl From<&CenDecenRecord> for CenDecenRow {
    fn from(r: &CenDecenRecord) -> Self {
        CenDecenRow {
            k: r.k,
            mu: r.mu,
            delta: r.delta,
            ratio: r.ratio,
        }
    }
}

#[derive(Debug, Serialize)]
struct CenDecenJson<'a> {
    summary: &'a CenDecenSummaryRow,
    #[serde(skip_serializing_if = "Option::is_none")]
    records: Option<Vec<CenDecenRow>>,
}

fn fmt_opt<T: std::fmt::Display>(x: Option<T>) -> String {
    x.map_or_else(|| "-".into(), |v| v.to_string())
}

pub fn gap_scan(args: &GapScanArgs) -> Result<Status, CliError> {
    if args.check_cen_decen {
        return cen_decen(args);
    }
    let spec = match args.grid {
        GridKind::Exhaustive => {
            let d = ExhaustiveGrid::default();
            ScanSpec::Exhaustive(ExhaustiveGrid {
                k_max: args.k_max.unwrap_or(d.k_max),
                n_max: args.n_max.unwrap_or(d.n_max),
                delta_steps: args.delta_steps.unwrap_or(d.delta_steps),
            })
        }
        GridKind::Sampled => {
            let d = SampledGrid::default();
            ScanSpec::Sampled(SampledGrid {
                k_max: args.k_max.unwrap_or(d.k_max),
                n_max: args.n_max.unwrap_or(d.n_max),
                delta_steps: args.delta_steps.unwrap_or(d.delta_steps),
                samples_per_k: args.samples_per_k,
                seed: args.seed.unwrap_or(DEFAULT_SEED),
            })
        }
    };
    let schemes: &[Scheme] = match args.scheme {
        SchemeChoice::Both => &[Scheme::Centralized, Scheme::Decentralized],
        SchemeChoice::Centralized => &[Scheme::Centralized],
        SchemeChoice::Decentralized => &[Scheme::Decentralized],
    };
    let result = scan(&spec, schemes)?;
    let summary: Vec<GapSummaryRow> = result.summary.schemes.iter().map(Into::into).collect();

    let mut sink = Sink::open(&args.output, Format::Csv)?;
    match (sink.format, args.summary_only) {
        (Format::Csv, true) => sink.csv(&summary)?,
        (Format::Csv, false) => {
            let rows: Vec<GapRow> = result.records.iter().map(Into::into).collect();
            sink.csv(&rows)?
        }
        (Format::Json, summary_only) => sink.json(&GapJson {
            summary: &summary,
            records: (!summary_only).then(|| result.records.iter().map(Into::into).collect()),
        })?,
    }
    sink.finish()?;

    for s in &summary {
        eprintln!(
            "summary: scheme={} points={} flagged={} max_ratio={} at K={} N={} M={} delta={} violations={}",
            s.scheme,
            s.points,
            s.flagged,
            fmt_opt(s.max_ratio),
            fmt_opt(s.argmax_k),
            fmt_opt(s.argmax_n),
            fmt_opt(s.argmax_m),
            fmt_opt(s.argmax_delta),
            s.violations
        );
    }
    let violations = result.summary.violations();
    if violations > 0 {
        return Ok(Status::Failed(format!(
            "{violations} ratios exceed the proven gap {THEOREM_GAP}"
        )));
    }
    Ok(Status::Ok)
}

fn cen_decen(args: &GapScanArgs) -> Result<Status, CliError> {
    let k_max = args.k_max.unwrap_or(32);
    let delta_steps = args.delta_steps.unwrap_or(100);
    let (records, summary) = scan_cen_vs_decen(k_max, args.mu_steps, delta_steps)?;
    let row = CenDecenSummaryRow::from(&summary);

    let mut sink = Sink::open(&args.output, Format::Csv)?;
    match (sink.format, args.summary_only) {
        (Format::Csv, true) => sink.csv(std::slice::from_ref(&row))?,
        (Format::Csv, false) => {
            let rows: Vec<CenDecenRow> = records.iter().map(Into::into).collect();
            sink.csv(&rows)?
        }
        (Format::Json, summary_only) => sink.json(&CenDecenJson {
            summary: &row,
            records: (!summary_only).then(|| records.iter().map(Into::into).collect()),
        })?,
    }
    sink.finish()?;

    eprintln!(
        "summary: points={} max_ratio={} at K={} mu={} delta={}",
        row.points, row.max_ratio, row.argmax_k, row.argmax_mu, row.argmax_delta
    );
    if row.max_ratio > CEN_DECEN_GAP + 1e-9 {
        return Ok(Status::Failed(format!(
            "centralized-to-decentralized ratio {} exceeds {CEN_DECEN_GAP}",
            row.max_ratio
        )));
    }
    Ok(Status::Ok)
}

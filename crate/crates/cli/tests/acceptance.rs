//! Acceptance suite. Runs every criterion at its stated tolerance and prints
//! one PASS/FAIL line each; exits non-zero if any criterion fails.

use std::io::Write;
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use miso_cache::analytics::{
    evaluate, gndt_centralized, gndt_decentralized, gndt_decentralized_ub, u_param,
    DecentralizedWeights,
};
use miso_cache::bounds::{
    f_value, gap_cen_vs_decen, scan, scan_cen_vs_decen, unit_grid, ExhaustiveGrid, GapFlag,
    SampledGrid, ScanSpec, Scheme, NUMERICAL_GAP, THEOREM_GAP,
};
use miso_cache::model::OperatingPoint;
use miso_cache::phy::{run, PhyConfig};
use miso_cache::rng::{self, DEFAULT_SEED};
use miso_cache::scheme::{
    binomial_exact, decode, deliver_centralized, make_library, place_centralized, run_centralized,
    run_decentralized, SimConfig,
};
use rand::seq::SliceRandom;
use rand::Rng;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn within_budget(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let spec = ScanSpec::Exhaustive(ExhaustiveGrid::default());
    let result = scan(&spec, &[Scheme::Centralized, Scheme::Decentralized]).unwrap();
    let elapsed = start.elapsed();
    let zero_bound = result
        .records
        .iter()
        .filter(|r| r.flag == GapFlag::ZeroBound)
        .count();
    let over = result
        .records
        .iter()
        .filter(|r| r.ratio.is_some_and(|x| x > THEOREM_GAP))
        .count();
    let cen = result.summary.for_scheme(Scheme::Centralized).unwrap();
    let dec = result.summary.for_scheme(Scheme::Decentralized).unwrap();
    outcome(
        over == 0 && zero_bound == 0 && result.summary.violations() == 0 && within_budget(elapsed, 60),
        format!(
            "{} records, max ratio centralized {:.4} decentralized {:.4}, {over} above {THEOREM_GAP}, {zero_bound} zero-bound flags, {:.2?}",
            result.records.len(),
            cen.max_ratio.unwrap(),
            dec.max_ratio.unwrap(),
            elapsed
        ),
    )
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let grid = SampledGrid::default();
    let points = grid.k_max * grid.samples_per_k;
    let result = scan(&ScanSpec::Sampled(grid), &[Scheme::Centralized]).unwrap();
    let elapsed = start.elapsed();
    let cen = result.summary.for_scheme(Scheme::Centralized).unwrap();
    let max = cen.max_ratio.unwrap();
    let at = cen.argmax.unwrap().params;
    outcome(
        points >= 100_000 && max <= NUMERICAL_GAP && within_budget(elapsed, 300),
        format!(
            "{points} sampled points (seed {DEFAULT_SEED:#x}), max centralized ratio {max:.4} at K={} N={} M={} delta={}, {:.2?}",
            at.k(),
            at.n(),
            at.m(),
            at.delta(),
            elapsed
        ),
    )
}

fn criterion_3() -> Outcome {
    let (_, summary) = scan_cen_vs_decen(32, 100, 100).unwrap();
    let witness = gap_cen_vs_decen(2, 0.5, 1.0).unwrap();
    outcome(
        summary.max_ratio <= 1.5 + 1e-9 && (witness - 1.5).abs() <= 1e-9,
        format!(
            "{} points, max ratio {:.12} at K={} mu={} delta={}, witness (2, 0.5, 1) = {witness:.12}",
            summary.points, summary.max_ratio, summary.argmax.k, summary.argmax.mu, summary.argmax.delta
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut points = 0;
    let mut above = 0;
    let mut endpoint_gap = 0.0f64;
    for k in 1..=32 {
        for &mu in &unit_grid(100) {
            for &delta in &unit_grid(100) {
                let [_, d, ub] = evaluate(OperatingPoint::new(k, mu, delta).unwrap()).unwrap();
                points += 1;
                if d.value > ub.value + 1e-12 {
                    above += 1;
                }
                if delta == 0.0 || delta == 1.0 {
                    endpoint_gap = endpoint_gap.max((d.value - ub.value).abs());
                }
            }
        }
    }
    outcome(
        above == 0 && endpoint_gap <= 1e-9,
        format!("{points} points, {above} above the upper bound, largest endpoint difference {endpoint_gap:.2e}"),
    )
}

fn criterion_5() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut violations = 0;
    for k in 1..=64 {
        for i in 1..1000 {
            let mu = i as f64 / 1000.0;
            let excess = u_param(k, mu).unwrap() - k as f64 * mu;
            worst = worst.max(excess);
            if excess > 1e-10 {
                violations += 1;
            }
        }
    }
    outcome(
        violations == 0,
        format!("64 x 999 points, {violations} violations, largest u - K mu = {worst:.3e}"),
    )
}

fn criterion_6() -> Outcome {
    let deltas = unit_grid(100);
    let mut checked = 0;
    let mut violations = 0;
    for k in 1..=32 {
        for s in 1..=k {
            for &mu in &unit_grid(100) {
                if (k as f64) < s as f64 * (1.0 + k as f64 * mu) {
                    continue;
                }
                checked += 1;
                let f: Vec<f64> = deltas.iter().map(|&d| f_value(d, k, mu, s)).collect();
                violations += f.windows(2).filter(|w| w[1] < w[0] - 1e-12).count();
            }
        }
    }
    outcome(
        checked > 0 && violations == 0,
        format!("{checked} (K, s, mu) triples over 101 delta points, {violations} decreases beyond 1e-12"),
    )
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut exhaustive = 0;
    let mut failures = 0;
    let file_bits = 12;
    for k in 1..=3 {
        for t in 0..=k {
            for n in k..=4 {
                let lib = make_library(
                    n,
                    file_bits,
                    rng::derive_seed(DEFAULT_SEED, &[k as u64, t as u64, n as u64]),
                )
                .unwrap();
                let pl = place_centralized(k, t, &lib).unwrap();
                let mut files: Vec<usize> = (0..n).collect();
                for demands in permutations(&mut files, k) {
                    for delta in [0.0, 0.5, 1.0] {
                        let log = deliver_centralized(&pl, &lib, &demands, delta).unwrap();
                        exhaustive += 1;
                        for (user, cache) in pl.caches.iter().enumerate() {
                            if decode(user, cache, &log).ok().as_ref()
                                != Some(lib.file(demands[user]))
                            {
                                failures += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    let mut random = 0;
    let mut r = rng::stream(DEFAULT_SEED, &[7]);
    for k in 4..=6 {
        for _ in 0..100 {
            let n = k + r.random_range(0..=3);
            let t = r.random_range(0..=k);
            let mut files: Vec<usize> = (0..n).collect();
            files.shuffle(&mut r);
            let config = SimConfig {
                k,
                n,
                file_bits: binomial_exact(k, t) * r.random_range(1..=4),
                delta: [0.0, 0.25, 0.5, 0.75, 1.0][r.random_range(0..5)],
                seed: r.random(),
                demands: files[..k].to_vec(),
            };
            random += 1;
            if !run_centralized(&config, t).unwrap().report.recovery_ok {
                failures += 1;
            }
            let config = SimConfig {
                file_bits: 200,
                ..config
            };
            if !run_decentralized(&config, r.random_range(0.0..=1.0))
                .unwrap()
                .report
                .recovery_ok
            {
                failures += 1;
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures == 0 && within_budget(elapsed, 120),
        format!(
            "{exhaustive} exhaustive deliveries (K <= 3, N <= 4, F = {file_bits}), {random} random instances per mode for K in 4..=6, {failures} failures, {:.2?}",
            elapsed
        ),
    )
}

/// All ordered selections of `k` distinct items.
fn permutations(items: &mut [usize], k: usize) -> Vec<Vec<usize>> {
    fn go(items: &mut [usize], k: usize, depth: usize, out: &mut Vec<Vec<usize>>) {
        if depth == k {
            out.push(items[..k].to_vec());
            return;
        }
        for i in depth..items.len() {
            items.swap(depth, i);
            go(items, k, depth + 1, out);
            items.swap(depth, i);
        }
    }
    let mut out = Vec::new();
    go(items, k, 0, &mut out);
    out
}

fn criterion_8() -> Outcome {
    let deltas = [0.0, 0.25, 0.5, 0.75, 1.0];
    let mut worst_cen = 0.0f64;
    let mut cen_cases = 0;
    for k in 1..=6 {
        for t in 0..=k {
            for &delta in &deltas {
                let config = SimConfig {
                    k,
                    n: k,
                    file_bits: 10_000 * binomial_exact(k, t),
                    delta,
                    seed: DEFAULT_SEED,
                    demands: (0..k).collect(),
                };
                let timing = run_centralized(&config, t).unwrap().report.timing;
                let analytic = gndt_centralized(k, t as f64 / k as f64, delta).unwrap();
                let rel = if analytic > 0.0 {
                    (timing.measured_gndt - analytic).abs() / analytic
                } else {
                    timing.measured_gndt
                };
                worst_cen = worst_cen.max(rel);
                cen_cases += 1;
            }
        }
    }
    let mut worst_dec = 0.0f64;
    let mut dec_cases = 0;
    let seeds = 30;
    for k in 1..=4 {
        for mu in [0.25, 0.5, 0.75] {
            for delta in [0.0, 0.5, 1.0] {
                let mut total = 0.0;
                for seed in 0..seeds {
                    let config = SimConfig {
                        k,
                        n: k,
                        file_bits: 100_000,
                        delta,
                        seed: rng::derive_seed(DEFAULT_SEED, &[seed]),
                        demands: (0..k).collect(),
                    };
                    total += run_decentralized(&config, mu)
                        .unwrap()
                        .report
                        .timing
                        .measured_gndt;
                }
                let analytic = gndt_decentralized(k, mu, delta).unwrap();
                worst_dec = worst_dec.max((total / seeds as f64 - analytic).abs() / analytic);
                dec_cases += 1;
            }
        }
    }
    outcome(
        worst_cen <= 0.01 && worst_dec <= 0.02,
        format!(
            "centralized: {cen_cases} cases, worst relative error {worst_cen:.2e}; decentralized: {dec_cases} cases x {seeds} seeds, worst relative error of the mean {worst_dec:.2e}"
        ),
    )
}

fn criterion_9() -> Outcome {
    let start = Instant::now();
    let mut worst = 0.0f64;
    let mut worst_residual = 0.0f64;
    let mut failures = Vec::new();
    for k in [2, 3, 4] {
        for (alpha, beta) in [(1.0, 0.0), (0.8, 0.4), (0.5, 0.5), (0.6, 0.0)] {
            let config = PhyConfig::new(k, alpha, beta, DEFAULT_SEED).unwrap();
            let r = run(&config).unwrap();
            let err = (r.common.slope - r.expected_common_slope)
                .abs()
                .max((r.private.slope - r.expected_private_slope).abs());
            worst = worst.max(err);
            worst_residual = worst_residual.max(r.max_zf_residual);
            if err > 0.05 || r.max_zf_residual > 1e-10 {
                failures.push(format!("K={k} ({alpha},{beta})"));
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && within_budget(elapsed, 300),
        format!(
            "12 cases at 500 trials x 6 SNR points, worst slope error {worst:.4}, worst ZF residual {worst_residual:.2e}, {:.2?}{}",
            elapsed,
            if failures.is_empty() { String::new() } else { format!(", failing: {}", failures.join(" ")) }
        ),
    )
}

fn criterion_10() -> Outcome {
    let mut closed = 0.0f64;
    let mut weights = 0.0f64;
    let mut perfect = 0.0f64;
    for k in 1..=64 {
        for i in 0..=100 {
            let mu = i as f64 / 100.0;
            if mu > 0.0 && mu < 1.0 {
                let expected = (1.0 - mu) / mu * (1.0 - (1.0 - mu).powi(k as i32));
                closed = closed.max((gndt_decentralized(k, mu, 1.0).unwrap() - expected).abs());
                let ub = gndt_decentralized_ub(k, mu, 0.0).unwrap();
                perfect = perfect.max((ub - (1.0 - mu)).abs());
            }
            if mu < 1.0 {
                weights =
                    weights.max((DecentralizedWeights::new(k, mu).unwrap().sum() - 1.0).abs());
            }
            perfect = perfect
                .max((gndt_centralized(k, mu, 0.0).unwrap() - (1.0 - mu)).abs())
                .max((gndt_decentralized(k, mu, 0.0).unwrap() - (1.0 - mu)).abs());
        }
    }
    outcome(
        closed <= 1e-10 && weights <= 1e-10 && perfect <= 1e-12,
        format!(
            "K <= 64: shared-link closed form error {closed:.2e}, weight-sum error {weights:.2e}, delta = 0 error {perfect:.2e}"
        ),
    )
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let dump = |name: &str| dir.path().join(name).to_str().unwrap().to_owned();
    let (d1, d2) = (dump("a.bin"), dump("b.bin"));
    let runs: Vec<Vec<String>> = vec![
        vec![
            "analyze", "--K", "1:8:1", "--mu", "0:1:0.1", "--delta", "0:1:0.25",
        ],
        vec![
            "bounds",
            "--K",
            "4",
            "--N",
            "8",
            "--M",
            "0:8:1",
            "--alpha",
            "0.9",
            "--beta",
            "0:0.9:0.3",
            "--format",
            "json",
        ],
        vec!["gap-scan", "--K-max", "6", "--N-max", "10"],
        vec![
            "gap-scan",
            "--grid",
            "sampled",
            "--K-max",
            "20",
            "--samples-per-K",
            "200",
            "--format",
            "json",
        ],
        vec![
            "gap-scan",
            "--check-cen-decen",
            "--K-max",
            "8",
            "--mu-steps",
            "20",
            "--delta-steps",
            "20",
        ],
        vec![
            "simulate",
            "--mode",
            "centralized",
            "--K",
            "4",
            "--N",
            "5",
            "--F",
            "600",
            "--t",
            "2",
            "--delta",
            "0.4",
        ],
        vec![
            "simulate",
            "--mode",
            "decentralized",
            "--K",
            "4",
            "--N",
            "6",
            "--F",
            "5000",
            "--mu",
            "0.3",
            "--delta",
            "0.7",
            "--format",
            "csv",
        ],
        vec![
            "phy-slope",
            "--K",
            "2,3",
            "--alpha",
            "0.8",
            "--beta",
            "0.4",
            "--trials",
            "200",
        ],
    ]
    .into_iter()
    .map(|v| v.into_iter().map(String::from).collect())
    .collect();
    let exe = env!("CARGO_BIN_EXE_miso-cache");
    let invoke = |args: &[String]| {
        Command::new(exe)
            .args(args)
            .env_remove("MISO_CACHE_SEED")
            .output()
            .unwrap()
    };
    let mut mismatched = Vec::new();
    for args in &runs {
        let (a, b) = (invoke(args), invoke(args));
        if !a.status.success() || a.stdout != b.stdout || a.stdout.is_empty() {
            mismatched.push(args[0].clone());
        }
    }
    let dump_args = |path: &str| -> Vec<String> {
        [
            "simulate",
            "--mode",
            "decentralized",
            "--K",
            "3",
            "--F",
            "2000",
            "--mu",
            "0.5",
            "--delta",
            "0.5",
            "--dump",
            path,
        ]
        .into_iter()
        .map(String::from)
        .collect()
    };
    let (a, b) = (invoke(&dump_args(&d1)), invoke(&dump_args(&d2)));
    let dumps_equal = a.status.success()
        && b.status.success()
        && std::fs::read(&d1).unwrap() == std::fs::read(&d2).unwrap();
    if !dumps_equal {
        mismatched.push("simulate --dump".into());
    }
    outcome(
        mismatched.is_empty(),
        format!(
            "{} invocations covering all five subcommands plus a log dump, rerun twice each; {}",
            runs.len() + 1,
            if mismatched.is_empty() {
                "all byte-identical".to_owned()
            } else {
                format!("differing: {}", mismatched.join(", "))
            }
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 11] = [
        (
            "gap to the converse at most 12 (exhaustive grid)",
            criterion_1,
        ),
        ("numerical gap at most 3.5 (sampled grid)", criterion_2),
        (
            "centralized over decentralized GDoF at most 1.5",
            criterion_3,
        ),
        ("decentralized time below its upper bound", criterion_4),
        ("u at most K mu", criterion_5),
        ("f non-decreasing in delta", criterion_6),
        ("bit-exact scheme recovery", criterion_7),
        ("measured against analytic delivery time", criterion_8),
        ("Monte Carlo common/private slopes", criterion_9),
        ("closed-form cross-checks", criterion_10),
        ("byte-identical CLI reruns", criterion_11),
    ];
    let filter: Vec<usize> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut stdout = std::io::stdout();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let n = i + 1;
        if !filter.is_empty() && !filter.contains(&n) {
            continue;
        }
        let o = check();
        if !o.pass {
            failed += 1;
        }
        let status = if o.pass { "PASS" } else { "FAIL" };
        writeln!(stdout, "criterion {n:>2} {status}: {name}: {}", o.detail).unwrap();
        stdout.flush().unwrap();
    }
    if failed > 0 {
        writeln!(stdout, "{failed} criteria failed").unwrap();
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

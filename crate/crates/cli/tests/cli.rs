use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_miso-cache"));
    cmd.env_remove("MISO_CACHE_SEED");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout)
        .unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn assert_schema(name: &str, value: &Value) {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("schema")
        .join(format!("{name}.schema.json"));
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let errors: Vec<String> = validator
        .iter_errors(value)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "{name}: {errors:?}");
}

#[test]
fn analyze_examples() {
    let out = run(&[
        "analyze", "--K", "4", "--mu", "0.5", "--delta", "1", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("analyze", &v);
    assert!((v[0]["gndt_centralized"].as_f64().unwrap() - 2.0 / 3.0).abs() < 1e-12);

    let out = run(&[
        "analyze", "--K", "4", "--mu", "0:1:0.25", "--alpha", "0.8", "--beta", "0.8",
    ]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "K,mu,alpha,beta,delta,gndt_centralized,gdof_centralized,gndt_decentralized,gdof_decentralized,gndt_decentralized_ub,gdof_decentralized_ub,degenerate"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 5);
    assert!(rows[4].ends_with("zero_time"));
}

#[test]
fn bounds_examples() {
    let out = run(&[
        "bounds", "--K", "4", "--N", "4", "--M", "0:4:1", "--delta", "1", "--format", "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("bounds", &v);
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert_eq!(rows[3]["gndt_lower_bound"], 0.25);
    assert_eq!(rows[3]["best_s"], 1);
    assert_eq!(rows[4]["degenerate"], "zero_bound");
}

#[test]
fn gap_scan_outputs_validate() {
    let out = run(&[
        "gap-scan",
        "--K-max",
        "3",
        "--N-max",
        "4",
        "--delta-steps",
        "4",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    assert_schema("gap-scan", &json(&out));

    let out = run(&[
        "gap-scan",
        "--grid",
        "sampled",
        "--K-max",
        "5",
        "--samples-per-K",
        "20",
        "--summary-only",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("gap-scan", &v);
    assert!(v.get("records").is_none());

    let out = run(&[
        "gap-scan",
        "--check-cen-decen",
        "--K-max",
        "4",
        "--mu-steps",
        "10",
        "--delta-steps",
        "10",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("cen-decen", &v);
    assert!((v["summary"]["max_ratio"].as_f64().unwrap() - 1.5).abs() < 1e-9);
    assert!(String::from_utf8_lossy(&out.stderr).contains("max_ratio"));
}

#[test]
fn simulate_examples() {
    let out = run(&[
        "simulate",
        "--mode",
        "centralized",
        "--K",
        "2",
        "--N",
        "2",
        "--F",
        "8",
        "--t",
        "1",
        "--delta",
        "1",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("simulate", &v);
    assert_eq!(v["measured_gndt"], 0.5);
    assert_eq!(v["recovery_ok"], true);
    assert_eq!(v["demands"], serde_json::json!([1, 2]));

    let out = run(&[
        "simulate",
        "--mode",
        "decentralized",
        "--K",
        "3",
        "--N",
        "4",
        "--F",
        "900",
        "--mu",
        "0.4",
        "--alpha",
        "0.9",
        "--beta",
        "0.2",
        "--demands",
        "4,1,2",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("simulate", &v);
    assert_eq!(v["mode"], "decentralized");
    assert_eq!(v["demands"], serde_json::json!([4, 1, 2]));

    let out = run(&[
        "simulate",
        "--mode",
        "centralized",
        "--K",
        "4",
        "--F",
        "10",
        "--t",
        "2",
        "--delta",
        "0.5",
    ]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("multiple of 6"));
}

#[test]
fn simulate_dump_roundtrips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("log.bin");
    let out = run(&[
        "simulate",
        "--mode",
        "centralized",
        "--K",
        "3",
        "--F",
        "30",
        "--t",
        "1",
        "--delta",
        "0.5",
        "--dump",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let bytes = std::fs::read(&path).unwrap();
    assert_eq!(&bytes[..4], b"MCLG");
    let log = miso_cache::scheme::dump::decode(&bytes).unwrap();
    assert_eq!(log.k, 3);
    assert_eq!(log.file_bits, 30);
}

#[test]
fn phy_slope_examples() {
    let out = run(&[
        "phy-slope",
        "--K",
        "2",
        "--alpha",
        "1",
        "--beta",
        "0",
        "--format",
        "json",
    ]);
    assert_eq!(code(&out), 0);
    let v = json(&out);
    assert_schema("phy-slope", &v);
    assert!((v[0]["common"]["slope"].as_f64().unwrap() - 1.0).abs() <= 0.05);

    let out = run(&["phy-slope", "--K", "2", "--alpha", "0.5", "--beta", "0.5"]);
    assert_eq!(code(&out), 0);

    // An impossible tolerance is a failed check, not a usage error.
    let out = run(&[
        "phy-slope",
        "--K",
        "2",
        "--alpha",
        "0.8",
        "--beta",
        "0.4",
        "--tolerance",
        "0",
    ]);
    assert_eq!(code(&out), 1);
}

#[test]
fn usage_errors_exit_two() {
    let cases: &[&[&str]] = &[
        &[],
        &["analyze", "--K", "4", "--mu", "1:0:0.5", "--delta", "1"],
        &[
            "analyze", "--K", "4", "--mu", "0.5", "--delta", "1", "--alpha", "1", "--beta", "0",
        ],
        &["analyze", "--K", "4", "--mu", "0.5", "--alpha", "1"],
        &["analyze", "--K", "4", "--mu", "1.5", "--delta", "1"],
        &["analyze", "--K", "2.5", "--mu", "0.5", "--delta", "1"],
        &["bounds", "--K", "4", "--N", "3", "--M", "1", "--delta", "1"],
        &[
            "bounds", "--K", "4", "--N", "8", "--M", "4", "--alpha", "0.5", "--beta", "0.7",
        ],
        &[
            "simulate",
            "--mode",
            "centralized",
            "--K",
            "2",
            "--F",
            "8",
            "--t",
            "1",
            "--delta",
            "1",
            "--demands",
            "1,1",
        ],
        &[
            "simulate",
            "--mode",
            "centralized",
            "--K",
            "2",
            "--F",
            "8",
            "--mu",
            "0.5",
            "--delta",
            "1",
        ],
        &[
            "phy-slope",
            "--K",
            "2",
            "--delta",
            "1",
            "--log10-snr",
            "8:9:1",
        ],
        &["no-such-command"],
    ];
    for args in cases {
        let out = run(args);
        assert_eq!(
            code(&out),
            2,
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    }
}

#[test]
fn output_file_and_format_inference() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("a.json");
    let out = run(&[
        "analyze",
        "--K",
        "3",
        "--mu",
        "0,0.5",
        "--delta",
        "0.5",
        "-o",
        path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_slice(&std::fs::read(&path).unwrap()).unwrap();
    assert_schema("analyze", &v);
}

#[test]
fn seed_from_environment() {
    let args = [
        "simulate",
        "--mode",
        "decentralized",
        "--K",
        "2",
        "--F",
        "64",
        "--mu",
        "0.5",
        "--delta",
        "0.5",
    ];
    let a = bin()
        .args(args)
        .env("MISO_CACHE_SEED", "17")
        .output()
        .unwrap();
    let b = bin().args(args).args(["--seed", "17"]).output().unwrap();
    let c = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    assert_eq!(json(&c)["seed"], miso_cache::rng::DEFAULT_SEED);
}

#[test]
fn thread_count_does_not_change_output() {
    let args = [
        "gap-scan",
        "--grid",
        "sampled",
        "--K-max",
        "6",
        "--samples-per-K",
        "50",
    ];
    let one = bin().args(["--threads", "1"]).args(args).output().unwrap();
    let three = bin().args(["--threads", "3"]).args(args).output().unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, three.stdout);
}

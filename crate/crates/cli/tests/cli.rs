use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

use qnoise::RunConfig;

const SMALL: &str = r#"{
  "sampler": { "n_samples": 32768 },
  "adc": { "n_bits": 120000 },
  "power_scan": { "powers_mw": [1, 2, 4, 8] }
}"#;

fn example_path() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs/example.json")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let path = dir.join("config.json");
    fs::write(&path, text).unwrap();
    path
}

fn qnoise(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_qnoise"))
        .args(args)
        .output()
        .unwrap()
}

fn run_cmd(sub: &str, config: &Path, out: &Path, extra: &[&str]) -> std::process::Output {
    let mut args = vec![
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "--quiet",
    ];
    args.extend_from_slice(extra);
    qnoise(&args)
}

fn sidecar(out: &Path, name: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join(name)).unwrap()).unwrap()
}

fn dir_contents(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().into_string().unwrap(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    files.sort();
    files
}

#[test]
fn every_subcommand_is_byte_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    for sub in ["fringe", "balance", "psd", "power-scan", "qrng"] {
        let a = tmp.path().join(format!("{sub}-a"));
        let b = tmp.path().join(format!("{sub}-b"));
        for out in [&a, &b] {
            let o = run_cmd(sub, &cfg, out, &[]);
            assert!(
                o.status.success(),
                "{sub}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
        let (fa, fb) = (dir_contents(&a), dir_contents(&b));
        assert!(!fa.is_empty());
        assert_eq!(fa, fb, "{sub} outputs differ between identical runs");
    }
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(run_cmd("qrng", &cfg, &a, &["--seed", "5"]).status.success());
    assert!(run_cmd("qrng", &cfg, &b, &["--seed", "6"]).status.success());
    assert_ne!(
        fs::read(a.join("qrng_bits.bin")).unwrap(),
        fs::read(b.join("qrng_bits.bin")).unwrap()
    );
    assert_eq!(sidecar(&a, "qrng.json")["config"]["sampler"]["seed"], 5);
}

#[test]
fn qrng_writes_requested_bits_and_sidecar() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("q");
    assert!(run_cmd("qrng", &cfg, &out, &[]).status.success());
    assert_eq!(
        fs::read(out.join("qrng_bits.bin")).unwrap().len(),
        120_000 / 8
    );
    let s = sidecar(&out, "qrng.json");
    assert_eq!(s["results"]["n_bits"], 120_000);
    assert!(
        (s["results"]["min_entropy_bits_per_sample"]
            .as_f64()
            .unwrap()
            - 6.325982863095265)
            .abs()
            < 1e-9
    );
    assert_eq!(s["results"]["checks"]["pass"], true);
}

#[test]
fn fringe_reports_visibility() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"interferometer": {"eta1": 0.9, "eta2": 0.85}}"#,
    );
    let out = tmp.path().join("f");
    assert!(run_cmd("fringe", &cfg, &out, &[]).status.success());
    let v = sidecar(&out, "fringe.json")["results"]["visibility"]
        .as_f64()
        .unwrap();
    assert!((v - 2.0 * 0.9 * 0.85 / (0.81 + 0.7225)).abs() < 1e-12);
    let csv = fs::read_to_string(out.join("fringe.csv")).unwrap();
    assert!(csv.starts_with("phi_rad,output1,output2,difference\n"));
    assert_eq!(csv.lines().count(), 362);
}

#[test]
fn psd_self_test_is_flat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), r#"{"psd": {"self_test": true}}"#);
    let out = tmp.path().join("p");
    assert!(run_cmd("psd", &cfg, &out, &[]).status.success());
    let r = &sidecar(&out, "psd.json")["results"];
    assert_eq!(r["flat_within_5_percent"], true);
}

#[test]
fn lo_off_spectrum_is_the_floor() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let out = tmp.path().join("p");
    assert!(run_cmd("psd", &cfg, &out, &[]).status.success());
    let floor = sidecar(&out, "psd.json")["results"]["floor_w_per_hz"]
        .as_f64()
        .unwrap();
    let csv = fs::read_to_string(out.join("psd.csv")).unwrap();
    let off: Vec<f64> = csv
        .lines()
        .skip(2)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    let mean = off.iter().sum::<f64>() / off.len() as f64;
    assert!((mean / floor - 1.0).abs() < 0.05, "{mean} vs {floor}");
}

#[test]
fn exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");

    let cfg = write_config(tmp.path(), r#"{"lo": {"power_w": 1}}"#);
    assert_eq!(run_cmd("fringe", &cfg, &out, &[]).status.code(), Some(2));

    let cfg = write_config(tmp.path(), "{ not json");
    assert_eq!(run_cmd("fringe", &cfg, &out, &[]).status.code(), Some(2));

    let cfg = write_config(
        tmp.path(),
        r#"{"interferometer": {"r2_squared": 0.01, "eta1": 1.0, "eta2": 0.2}}"#,
    );
    let o = run_cmd("balance", &cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot be balanced"));

    let cfg = write_config(
        tmp.path(),
        r#"{"controller": {"max_iterations": 2}, "interferometer": {"phase_rad": 2.5}}"#,
    );
    assert_eq!(run_cmd("balance", &cfg, &out, &[]).status.code(), Some(3));
    assert!(out.join("balance_trace.csv").exists());

    let cfg = write_config(
        tmp.path(),
        r#"{"sampler": {"sigma2_vac": 0}, "adc": {"n_bits": 1000}}"#,
    );
    assert_eq!(run_cmd("qrng", &cfg, &out, &[]).status.code(), Some(4));

    let cfg = write_config(tmp.path(), r#"{"power_scan": {"powers_mw": []}}"#);
    assert_eq!(
        run_cmd("power-scan", &cfg, &out, &[]).status.code(),
        Some(2)
    );
}

#[test]
fn balance_reports_analytic_root() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        r#"{"interferometer": {"r2_squared": 0.51, "eta1": 0.9, "eta2": 0.85, "phase_rad": 1.8},
            "controller": {"tolerance": 1e-4}}"#,
    );
    let out = tmp.path().join("b");
    assert!(run_cmd("balance", &cfg, &out, &[]).status.success());
    let r = &sidecar(&out, "balance.json")["results"];
    let offset = r["root_offset_over_pi"].as_f64().unwrap();
    assert!((offset.abs() - 3.64e-4).abs() < 1e-6);
    assert!(r["residual_imbalance"].as_f64().unwrap() < 1e-3);
    let trace = fs::read_to_string(out.join("balance_trace.csv")).unwrap();
    assert!(trace.starts_with("iteration,voltage_v,phase_rad,dc_mean\n"));
}

#[test]
fn config_round_trip() {
    let cfg = RunConfig::load(&example_path()).unwrap();
    let again = RunConfig::from_json(&cfg.to_json()).unwrap();
    assert_eq!(cfg, again);
    assert_eq!(again.to_json(), cfg.to_json());
}

#[test]
fn example_config_spells_out_every_key() {
    let text = fs::read_to_string(example_path()).unwrap();
    let shipped: Value = serde_json::from_str(&text).unwrap();
    let full: Value =
        serde_json::from_str(&RunConfig::load(&example_path()).unwrap().to_json()).unwrap();
    assert_eq!(shipped, full);
}

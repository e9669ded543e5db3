use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};

use heisqc::cli::main_with_args;

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut full = vec!["heisqc"];
    full.extend_from_slice(args);
    let code = main_with_args(full, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn koebe_dilation_passes_and_reports_c_hat() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("koebe_dilation.json");
    let (code, out, err) = run(&["--out-dir", tmp.path().to_str().unwrap(), "koebe", cfg.to_str().unwrap()]);
    assert_eq!(code, 0, "{out}{err}");
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("koebe.json")).unwrap()).unwrap();
    assert_eq!(report["op"], "koebe");
    assert_eq!(report["pass"], true);
    let c_hat = report["detail"]["c_hat"].as_f64().unwrap();
    assert!((1.0..=1.05).contains(&c_hat));
    let csv = std::fs::read_to_string(tmp.path().join("koebe.csv")).unwrap();
    assert_eq!(csv.lines().count(), 201);
    assert!(csv.starts_with("x,y,t,boundary_distance,"));
}

#[test]
fn zero_q_missing_file_and_schema_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().to_str().unwrap();
    let q0 = configs().join("compare_zero_q.json");
    assert_eq!(run(&["--out-dir", out_dir, "compare-integrals", q0.to_str().unwrap()]).0, 2);
    let (code, _, err) = run(&["--out-dir", out_dir, "run", "/nonexistent/config.json"]);
    assert_eq!(code, 2);
    assert!(err.contains("cannot read config"));
    let bad = write_config(tmp.path(), "bad.json", "{\"version\": 1,\n \"experiment\": {\"kind\": \"sharpness\", \"k_exp\": 0.5, \"radius\": [0.1]}}");
    let (code, _, err) = run(&["--out-dir", out_dir, "run", &bad]);
    assert_eq!(code, 2);
    assert!(err.contains("line 2") && err.contains("radius"), "{err}");
}

#[test]
fn subcommand_must_match_config() {
    let cfg = configs().join("sharpness.json");
    let (code, _, err) = run(&["koebe", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("sharpness"));
}

#[test]
fn failed_audit_exits_1() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "stretch.json",
        r#"{"version": 1, "seed": 1, "experiment": {"kind": "koebe",
            "map": {"kind": "horizontal-stretch", "a": 2.0},
            "domain": {"kind": "punctured-space", "puncture": [0, 0, 0]},
            "points": 100, "mc_n": 8, "max_c_hat": 1.2}}"#,
    );
    let (code, out, _) = run(&["--out-dir", tmp.path().to_str().unwrap(), "koebe", &cfg]);
    assert_eq!(code, 1, "{out}");
    assert!(out.contains("FAIL") && out.contains("c_hat"));
}

#[test]
fn catalog_text_and_json() {
    let (code, out, _) = run(&["catalog"]);
    assert_eq!(code, 0);
    assert!(out.contains("HorizontalStretch"));
    assert!(out.contains("koebe"));
    let (code, out, _) = run(&["catalog", "--json"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert!(v["experiments"].as_array().unwrap().iter().any(|e| e["name"] == "koebe"));
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = configs().join("koebe_inversion_annulus.json");
    let dir = tmp.path().to_str().unwrap();
    run(&["--out-dir", dir, "--seed", "77", "run", cfg.to_str().unwrap()]);
    let report: serde_json::Value = serde_json::from_slice(&std::fs::read(tmp.path().join("koebe.json")).unwrap()).unwrap();
    assert_eq!(report["seed"], 77);
}

/// Same config and seed: identical CSV bytes whatever the worker count.
#[test]
fn csv_is_thread_count_invariant() {
    let bin = env!("CARGO_BIN_EXE_heisqc");
    for cfg in ["koebe_inversion_annulus.json", "compare_stretch.json"] {
        let mut outputs = Vec::new();
        for threads in ["1", "4", "8"] {
            let tmp = tempfile::tempdir().unwrap();
            let status = Command::new(bin)
                .args(["--threads", threads, "--out-dir", tmp.path().to_str().unwrap(), "run"])
                .arg(configs().join(cfg))
                .stdout(Stdio::null())
                .status()
                .unwrap();
            assert_eq!(status.code(), Some(0));
            let stem = if cfg.starts_with("koebe") { "koebe" } else { "compare-integrals" };
            outputs.push((std::fs::read(tmp.path().join(format!("{stem}.csv"))).unwrap(), std::fs::read(tmp.path().join(format!("{stem}.json"))).unwrap()));
        }
        assert!(outputs.windows(2).all(|w| w[0] == w[1]), "{cfg}");
    }
}

#[test]
fn every_shipped_config_parses() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let res = heisqc::config::RunConfig::load(&p);
        if p.file_name().unwrap() == "compare_zero_q.json" {
            assert!(res.is_err());
        } else {
            assert!(res.is_ok(), "{}: {:?}", p.display(), res.err());
        }
    }
}

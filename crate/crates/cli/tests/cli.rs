use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_first-spike"))
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).env("RUST_LOG", "warn").output().unwrap();
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// A short XOR configuration written to `dir`.
fn short_config(dir: &Path) -> String {
    let out = run(&["train", "--preset", "xor", "--runs", "1", "--out-dir", dir.join("full").to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&out.stdout).contains("xor: 1 networks"));
    let text = std::fs::read_to_string(dir.join("full/config.json")).unwrap();
    let mut cfg: serde_json::Value = serde_json::from_str(&text).unwrap();
    cfg["protocol"]["epochs"] = 20.into();
    cfg["runs"] = 2.into();
    let path = dir.join("short.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn train_eval_encode_and_sweep() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    let cfg = short_config(dir);

    let out_dir = dir.join("short");
    run(&["train", "--config", &cfg, "--out-dir", out_dir.to_str().unwrap()]);
    assert!(out_dir.join("summary.json").is_file());
    let ckpt = dir.join("full/checkpoints/run000_fold0.json");
    assert!(ckpt.is_file());

    let out = run(&["eval", "--config", &cfg, "--checkpoint", ckpt.to_str().unwrap()]);
    let metrics: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(metrics["presentations"], 40);
    assert!(metrics["accuracy"].as_f64().unwrap() >= 0.75);

    let encoded = dir.join("xor.json");
    run(&["encode", "--preset", "xor", "--out", encoded.to_str().unwrap()]);
    let file: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&encoded).unwrap()).unwrap();
    assert_eq!(file["inputs"], 3);
    assert_eq!(file["samples"].as_array().unwrap().len(), 4);

    let sweep_dir = dir.join("sweep");
    run(&["sweep", "--config", &cfg, "--param", "eta0", "--values", "0.1,0.5", "--out-dir", sweep_dir.to_str().unwrap()]);
    let csv = std::fs::read_to_string(sweep_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 3);
}

#[test]
fn bad_invocations_fail_cleanly() {
    let out = bin().args(["train"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--config or --preset"));

    let out = bin().args(["train", "--config", "/nonexistent/cfg.json"]).output().unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    let out = bin()
        .args(["sweep", "--preset", "xor", "--param", "nonsense", "--values", "1"])
        .output()
        .unwrap();
    assert!(!out.status.success());
}

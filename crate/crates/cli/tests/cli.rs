use std::process::Command;

fn lipvol(args: &[&str], workers: &str) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_lipvol"))
        .args(args)
        .env("LIPVOL_WORKERS", workers)
        .output()
        .expect("binary runs");
    (out.status.code().unwrap_or(-1), String::from_utf8(out.stdout).unwrap())
}

fn json(s: &str) -> serde_json::Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn pair_genus_two() {
    let (code, out) = lipvol(&["pair", "--genus", "2"], "2");
    assert_eq!(code, 0);
    let v = json(&out);
    assert!((v["result"]["value"].as_f64().unwrap() - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(v["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn lpnorm_round_zero_is_eight() {
    let (code, out) = lipvol(&["lpnorm", "--genus", "2", "--rounds", "0"], "2");
    assert_eq!(code, 0);
    assert_eq!(json(&out)["result"]["rounds"][0]["value"], "8");
}

#[test]
fn exit_codes() {
    assert_eq!(lipvol(&["pair", "--genus", "9"], "1").0, 1);
    assert_eq!(lipvol(&["frobnicate"], "1").0, 1);
    assert_eq!(lipvol(&["pair", "--config", "/nonexistent.json"], "1").0, 1);
    assert_eq!(lipvol(&["--help"], "1").0, 0);
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    std::fs::write(&cfg, r#"{"tolerance": 0.0, "mode": "quadrature"}"#).unwrap();
    assert_eq!(lipvol(&["pair", "--config", cfg.to_str().unwrap()], "1").0, 2);
    std::fs::write(&cfg, r#"{"unknown_field": 1}"#).unwrap();
    assert_eq!(lipvol(&["pair", "--config", cfg.to_str().unwrap()], "1").0, 1);
}

#[test]
fn smear_from_config_with_trace() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.json");
    let tsv = dir.path().join("trace.tsv");
    let rep = dir.path().join("r.json");
    std::fs::write(&cfg, r#"{"from": 2, "to": 3, "n": 3000, "block": 500, "seed": 3}"#).unwrap();
    let args =
        ["smear", "--config", cfg.to_str().unwrap(), "--tsv", tsv.to_str().unwrap(), "-o", rep.to_str().unwrap()];
    assert_eq!(lipvol(&args, "3").0, 0);
    let v = json(&std::fs::read_to_string(&rep).unwrap());
    assert_eq!(v["result"]["n"], 3000);
    assert!((v["result"]["ratio"].as_f64().unwrap() - 0.5).abs() < 0.05);
    let t = std::fs::read_to_string(&tsv).unwrap();
    assert_eq!(t.lines().count(), 7);
}

#[test]
fn selftest_is_byte_identical() {
    let (c1, a) = lipvol(&["selftest"], "1");
    let (c2, b) = lipvol(&["selftest"], "4");
    assert_eq!((c1, c2), (0, 0));
    assert_eq!(a, b);
    assert_eq!(json(&a)["result"]["failed"], serde_json::json!([]));
}

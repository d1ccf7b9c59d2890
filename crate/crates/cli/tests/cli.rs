use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fockmaj(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fockmaj"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).unwrap();
    let header = r.headers().unwrap().iter().map(String::from).collect();
    let rows = r
        .records()
        .map(|rec| rec.unwrap().iter().map(String::from).collect())
        .collect();
    (header, rows)
}

fn f(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn certify_small_grid_succeeds_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    let args = ["certify", "--dims", "2..4", "--lambdas", "0.5", "--noises", "0", "--trials", "50", "--seed", "7"];
    for path in [&a, &b] {
        let mut full = args.to_vec();
        full.extend(["--output", path.to_str().unwrap()]);
        assert_eq!(code(&fockmaj(&full)), 0);
    }
    let bytes = fs::read(&a).unwrap();
    assert_eq!(bytes, fs::read(&b).unwrap());
    let report: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
    assert_eq!(report["trials"], 150);
    assert_eq!(report["failures"], 0);
    assert_eq!(report["config"]["dims"], serde_json::json!([2, 3, 4]));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&fockmaj(&["certify", "--trials", "0"])), 2);
    assert_eq!(code(&fockmaj(&["certify", "--bogus"])), 2);
    assert_eq!(code(&fockmaj(&["certify", "--dims", "5..2"])), 2);
    assert_eq!(code(&fockmaj(&["params", "--lambda", "-1"])), 2);
    assert_eq!(code(&fockmaj(&["evolve", "--state", "squeezed"])), 2);
    assert_eq!(code(&fockmaj(&["nonsense"])), 2);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"dims": [2], "lambdas": [0.5], "noises": [0.0], "trials": 0, "seed": 1}"#).unwrap();
    let cfg = cfg.to_str().unwrap();
    assert_eq!(code(&fockmaj(&["certify", "--config", cfg])), 2);
    let out = fockmaj(&["certify", "--config", cfg, "--trials", "3"]);
    assert_eq!(code(&out), 0);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["trials"], 3);

    fs::write(dir.path().join("bad.json"), r#"{"unknown": 1}"#).unwrap();
    let bad = dir.path().join("bad.json");
    assert_eq!(code(&fockmaj(&["certify", "--config", bad.to_str().unwrap()])), 2);
}

#[test]
fn evolve_writes_partial_sum_trajectory() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("traj.csv");
    let out = fockmaj(&[
        "evolve", "--state", "fock:1", "--dim", "4", "--t-max", "2", "--steps", "200",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&path);
    assert_eq!(header.len(), 1 + 4 + 4 + 1);
    assert_eq!(header[0], "t");
    assert_eq!(header[9], "degenerate");
    assert_eq!(rows.len(), 201);
    for row in &rows {
        let t = f(&row[0]);
        let decay = (-t).exp();
        // The state stays diagonal with populations (1 - e^{-t}, e^{-t}).
        assert!((f(&row[1]) - decay.max(1.0 - decay)).abs() < 1e-8);
        assert!((f(&row[4]) - 1.0).abs() < 1e-12);
        // The passive input is the vacuum, which the attenuator fixes.
        assert!((f(&row[5]) - 1.0).abs() < 1e-12);
    }
    assert_eq!(rows[0][1..5], rows[0][5..9]);
}

#[test]
fn evolve_random_state_starts_equal() {
    let out = fockmaj(&["evolve", "--state", "random", "--dim", "3", "--steps", "50", "--seed", "4"]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let first = r.records().next().unwrap().unwrap();
    for n in 0..3 {
        assert!((f(&first[1 + n]) - f(&first[4 + n])).abs() < 1e-12);
    }
}

#[test]
fn thin_reports_distributions_and_entropies() {
    let out = fockmaj(&["thin", "--builtin", "delta:2", "--len", "3", "--lambda", "0.5"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["output"], serde_json::json!([0.25, 0.5, 0.25]));
    assert!((v["output_entropy"].as_f64().unwrap() - 1.5 * 2f64.ln()).abs() < 1e-15);

    let out = fockmaj(&["thin", "--builtin", "geometric:1", "--len", "80", "--lambda", "1"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["input"], v["output"]);

    let out = fockmaj(&["thin", "--builtin", "geometric:1", "--len", "10", "--lambda", "0.5"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["output_entropy"].is_null());

    let out = fockmaj(&["thin", "--builtin", "poisson:1", "--len", "60", "--lambda", "0.5"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(v["poisson_l1_distance"].as_f64().unwrap() < 1e-12);
}

#[test]
fn thin_validates_input_files() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.txt");
    let bad = dir.path().join("bad.txt");
    fs::write(&good, "0.5, 0.25\n0.25\n").unwrap();
    fs::write(&bad, "0.5 0.4").unwrap();
    let out = fockmaj(&["thin", "--file", good.to_str().unwrap(), "--lambda", "0.5", "--format", "csv"]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(r.records().count(), 3);
    assert_eq!(code(&fockmaj(&["thin", "--file", bad.to_str().unwrap(), "--lambda", "0.5"])), 2);
}

#[test]
fn sweep_csv_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let out = fockmaj(&[
        "sweep", "--dim", "6", "--lambdas", "0.2,0.5,0.8", "--noises", "0,0.5,1", "--seed", "3",
        "--output", path.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0);
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["lambda", "noise", "input_family", "von_neumann_out", "renyi2_out", "ordered"]);
    assert_eq!(rows.len(), 18);
    assert!(rows.iter().all(|r| r[5] == "true"));
    for pair in rows.chunks(2) {
        assert_eq!((pair[0][2].as_str(), pair[1][2].as_str()), ("passive", "rotated"));
        assert!(f(&pair[0][3]) <= f(&pair[1][3]) + 1e-9);
    }

    // Printing with 17 significant digits and parsing back is lossless.
    let json = fockmaj(&[
        "sweep", "--dim", "6", "--lambdas", "0.2,0.5,0.8", "--noises", "0,0.5,1", "--seed", "3", "--format", "json",
    ]);
    let exact: Vec<serde_json::Value> = serde_json::from_slice(&json.stdout).unwrap();
    for (row, value) in rows.iter().zip(&exact) {
        assert_eq!(f(&row[3]), value["von_neumann_out"].as_f64().unwrap());
        assert_eq!(f(&row[4]), value["renyi2_out"].as_f64().unwrap());
    }
}

#[test]
fn sweep_identity_channel_keeps_entropy() {
    let out = fockmaj(&["sweep", "--dim", "5", "--lambdas", "1", "--noises", "0", "--seed", "2"]);
    assert_eq!(code(&out), 0);
    let mut r = csv::Reader::from_reader(out.stdout.as_slice());
    let rows: Vec<_> = r.records().map(|x| x.unwrap()).collect();
    assert_eq!(rows.len(), 2);
    assert!((f(&rows[0][3]) - f(&rows[1][3])).abs() < 1e-12);
}

#[test]
fn params_prints_decomposition() {
    let out = fockmaj(&["params", "--lambda", "0.5", "--noise", "1"]);
    assert_eq!(code(&out), 0);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((v["kappa"].as_f64().unwrap() - 1.5).abs() < 1e-15);
    assert!((v["eta"].as_f64().unwrap() - 1.0 / 3.0).abs() < 1e-15);
}

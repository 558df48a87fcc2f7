use std::path::Path;
use std::process::{Command, Output};

fn sudbell(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sudbell"))
        .args(args)
        .env_remove("SUDBELL_WORKERS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

/// Data rows of a CSV with `#` manifest lines, header dropped.
fn rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

#[test]
fn check_algebra_passes_and_rejects_trivial_dimension() {
    let ok = sudbell(&["check-algebra", "--d", "2..5", "--samples", "20"]);
    assert_eq!(ok.status.code(), Some(0), "{}", String::from_utf8_lossy(&ok.stderr));
    let table = rows(&stdout(&ok));
    assert!(table.iter().all(|r| r[4] == "true"));
    assert!(table.iter().any(|r| r[0] == "5"));

    let bad = sudbell(&["check-algebra", "--d", "1"]);
    assert_eq!(bad.status.code(), Some(1));
}

#[test]
fn check_algebra_six_is_quick() {
    let started = std::time::Instant::now();
    let o = sudbell(&["check-algebra", "--d", "6"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(started.elapsed().as_secs() < 30);
}

#[test]
fn optimize_maximally_entangled_qubits() {
    let o = sudbell(&["optimize", "--d", "2", "--state", "maxent", "--restarts", "8"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    let best = v["result"]["best_value"].as_f64().unwrap();
    assert!((best - 2.82843).abs() < 1e-4, "{best}");
    assert_eq!(v["manifest"]["command"], "optimize");
    assert_eq!(v["manifest"]["parameters"]["state"], "maxent");
    assert_eq!(v["result"]["trace"].as_array().unwrap().len(), 8);
}

#[test]
fn vacuum_is_classical() {
    let o = sudbell(&["optimize", "--d", "3", "--state", "tmsv:r=0", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(json(&o)["result"]["best_value"].as_f64().unwrap() <= 2.0 + 1e-6);
}

#[test]
fn usage_errors_exit_with_one() {
    for args in [
        vec!["optimize", "--state", "ghz"],
        vec!["optimize", "--d", "3", "--state", "pure2:phi=0.1"],
        vec!["optimize", "--method", "newton"],
        vec!["optimize", "--mode", "half"],
        vec!["fig1", "--phi-grid", "2.0"],
        vec!["table1", "--d", "7"],
        vec!["no-such-command"],
        vec!["optimize", "--restarts", "zero"],
    ] {
        assert_eq!(sudbell(&args).status.code(), Some(1), "{args:?}");
    }
}

#[test]
fn required_convergence_exit_code() {
    let o = sudbell(&[
        "optimize", "--d", "3", "--state", "maxent", "--restarts", "1", "--max-iterations", "1", "--require-converged",
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(json(&o)["result"]["best_value"].is_f64());
}

#[test]
fn fig1_row_matches_single_optimization() {
    let fig = sudbell(&["fig1", "--phi-grid", "0.3", "--restarts", "6", "--seed", "4"]);
    assert_eq!(fig.status.code(), Some(0));
    let row = &rows(&stdout(&fig))[0];
    let su2: f64 = row[2].parse().unwrap();
    let qft: f64 = row[3].parse().unwrap();
    assert!(su2 >= qft);
    assert!((row[1].parse::<f64>().unwrap() - 2f64.sqrt() * 0.3f64.sin()).abs() < 1e-15);

    let single = sudbell(&["optimize", "--d", "2", "--state", "pure2:phi=0.3", "--restarts", "6", "--seed", "4"]);
    assert_eq!(json(&single)["result"]["best_value"].as_f64().unwrap(), su2);
}

#[test]
fn sweeps_are_reproducible() {
    let args = ["fig1", "--phi-grid", "0.2,0.7,1.2", "--restarts", "3"];
    let (a, b) = (stdout(&sudbell(&args)), stdout(&sudbell(&args)));
    let strip = |s: &str| s.lines().filter(|l| !l.starts_with("# duration")).collect::<Vec<_>>().join("\n");
    assert_eq!(strip(&a), strip(&b));
    assert!(a.contains("phi,epsilon,b_su2,b_qft,converged"));
}

#[test]
fn fig2_writes_csv_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig2.csv");
    let o = sudbell(&[
        "fig2", "--d", "2,3", "--tanh-grid", "0.5,1", "--restarts", "4", "--out", out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert!(csv.starts_with("# command=fig2\n"));
    let table = rows(&csv);
    assert_eq!(table.len(), 4);
    for r in &table {
        assert!(r[3].parse::<f64>().unwrap() > 2.0);
    }
    let infinite = table.iter().find(|r| r[0] == "3" && r[2] == "inf").unwrap();
    assert!((infinite[3].parse::<f64>().unwrap() - 2.87293).abs() < 1e-4);

    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(Path::new(&format!("{}.configs.json", out.display()))).unwrap()).unwrap();
    assert_eq!(sidecar["configs"].as_array().unwrap().len(), 4);
    assert!(sidecar["configs"][0]["config"]["a1"]["values"].is_array());
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "restarts = 5\nseed = 12\nformat = json\n").unwrap();
    let o = sudbell(&["optimize", "--config", cfg.to_str().unwrap(), "--restarts", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["manifest"]["parameters"]["restarts"], "2");
    assert_eq!(v["manifest"]["parameters"]["seed"], "12");
}

#[test]
fn table1_qubits_hit_the_grid_boundary() {
    let o = sudbell(&["table1", "--d", "2", "--r-grid", "0.5,1,2", "--restarts", "4"]);
    assert_eq!(o.status.code(), Some(0));
    let row = &rows(&stdout(&o))[0];
    assert_eq!(row[1].parse::<f64>().unwrap(), 2.0);
    assert_eq!(row[5], "true");
    assert!((row[3].parse::<f64>().unwrap() - 2.82843).abs() < 1e-4);
}

#[test]
fn table1_qutrits_locate_optimal_squeezing() {
    let o = sudbell(&[
        "table1", "--d", "3", "--r-grid", "1.2,1.4,1.6", "--refine-steps", "8", "--restarts", "4", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let row = &json(&o)["rows"][0];
    let r_m: f64 = row["r_m"].as_str().unwrap().parse().unwrap();
    let b: f64 = row["b_rm"].as_str().unwrap().parse().unwrap();
    assert!((r_m - 1.407).abs() < 0.03, "{r_m}");
    assert!((b - 2.90638).abs() < 1e-3, "{b}");
    assert_eq!(row["boundary"], "false");
}

#[test]
fn worker_count_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_sudbell"))
        .args(["optimize", "--d", "2", "--restarts", "2"])
        .env("SUDBELL_WORKERS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
}

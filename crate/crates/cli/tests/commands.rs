use std::path::Path;
use std::process::{Command, Output};

fn casimir(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    assert!(!text.contains('\r'));
    let mut lines = text.lines();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (header, rows)
}

fn json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn force_reports_json_and_exit_codes() {
    let out = casimir(&["force", "--mode", "reflecting", "--beta", "1", "--L", "1"]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["mode"], "reflecting");
    assert_eq!(v["method"], "closed-form");
    assert!((v["value"].as_f64().unwrap() - 0.276_578_195_396_273_7).abs() < 1e-15);

    let bad = casimir(&["force", "--mode", "reflecting", "--beta", "-1", "--L", "1"]);
    assert_eq!(bad.status.code(), Some(2));
    let wrong = casimir(&["force", "--mode", "reflecting", "--beta", "1", "--L", "1", "--method", "flux-limit"]);
    assert_eq!(wrong.status.code(), Some(2));
    let unknown = casimir(&["force", "--mode", "sideways", "--beta", "1", "--L", "1"]);
    assert_eq!(unknown.status.code(), Some(2));
}

#[test]
fn flux_limit_agrees_with_closed_method() {
    let get = |method: &str| {
        let out = casimir(&["force", "--mode", "absorbing", "--beta", "1", "--L", "1", "--method", method]);
        assert!(out.status.success());
        json(&out)["value"].as_f64().unwrap()
    };
    let (closed, limit) = (get("closed"), get("flux-limit"));
    assert!((limit / closed - 1.0).abs() < 1e-4);
}

#[test]
fn unreachable_tolerance_is_a_numerical_failure() {
    let out = casimir(&["force", "--mode", "absorbing", "--beta", "1", "--L", "1", "--method", "flux-limit", "--tol", "1e-15"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn sweep_is_decreasing_and_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sweep.csv");
    let p = path.to_str().unwrap();
    let out = casimir(&["sweep", "--mode", "reflecting", "--beta", "1", "--l-min", "0.1", "--l-max", "5", "--points", "50", "--out", p]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["L", "force", "method", "beta"]);
    assert_eq!(rows.len(), 50);
    let forces: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(forces.windows(2).all(|w| w[1] < w[0]));
    assert!(forces[0] > forces[49]);
    let core = casimir_core::ModelParams::reflecting(1.0, 0.1).unwrap();
    let first = casimir_core::closed_form::force_reflecting(&core).unwrap().value;
    assert_eq!(forces[0].to_bits(), first.to_bits());
    assert_eq!(rows[0][0].parse::<f64>().unwrap(), 0.1);
    assert_eq!(rows[49][0].parse::<f64>().unwrap(), 5.0);
}

#[test]
fn sweep_validates_its_grid_and_output() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("s.csv");
    let p = p.to_str().unwrap();
    let reversed = casimir(&["sweep", "--mode", "reflecting", "--beta", "1", "--l-min", "2", "--l-max", "1", "--points", "5", "--out", p]);
    assert_eq!(reversed.status.code(), Some(2));
    let single = casimir(&["sweep", "--mode", "reflecting", "--beta", "1", "--l-min", "1", "--l-max", "2", "--points", "1", "--out", p]);
    assert_eq!(single.status.code(), Some(2));
    let missing = dir.path().join("no/such/dir/s.csv");
    let io = casimir(&["sweep", "--mode", "reflecting", "--beta", "1", "--l-min", "1", "--l-max", "2", "--points", "3", "--out", missing.to_str().unwrap()]);
    assert_eq!(io.status.code(), Some(4));
}

#[test]
fn density_profiles_have_the_expected_shape() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("absorbing.csv");
    let out = casimir(&["density", "--mode", "absorbing", "--beta", "1", "--L", "1", "--grid", "21", "--out", path.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let (header, rows) = read_csv(&path);
    assert_eq!(header, ["x", "rho", "source"]);
    let inside: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r[2] == "inside")
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect();
    assert_eq!(inside.len(), 21);
    assert_eq!(inside[0], (0.0, 0.0));
    assert_eq!(inside[20], (1.0, 0.0));
    let far: f64 = rows.iter().find(|r| r[2] == "outside").unwrap()[1].parse().unwrap();
    assert!((far - 0.5f64.sqrt()).abs() < 1e-6);

    let path = dir.path().join("reflecting.csv");
    let out = casimir(&["density", "--mode", "reflecting", "--beta", "1", "--L", "1", "--grid", "11", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    let (_, rows) = read_csv(&path);
    let inside: Vec<f64> = rows.iter().filter(|r| r[2] == "inside").map(|r| r[1].parse().unwrap()).collect();
    for k in 0..inside.len() {
        assert_eq!(inside[k], inside[inside.len() - 1 - k]);
    }
}

#[test]
fn simulate_is_reproducible_and_conserves_parity() {
    let dir = tempfile::tempdir().unwrap();
    let args = |stem: &str| -> Vec<String> {
        ["simulate", "--mode", "reflecting", "--beta", "1", "--L", "1", "--eps", "0.1", "--w-out", "4", "--t-sample", "10", "--replicas", "4", "--seed", "9", "--out"]
            .iter()
            .map(|s| s.to_string())
            .chain([dir.path().join(stem).to_str().unwrap().to_string()])
            .collect()
    };
    for stem in ["a", "b"] {
        let a = args(stem);
        let out = casimir(&a.iter().map(String::as_str).collect::<Vec<_>>());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for ext in ["json", "csv"] {
        let a = std::fs::read(dir.path().join(format!("a.{ext}"))).unwrap();
        let b = std::fs::read(dir.path().join(format!("b.{ext}"))).unwrap();
        assert_eq!(a, b, "{ext}");
    }
    let v: serde_json::Value = serde_json::from_slice(&std::fs::read(dir.path().join("a.json")).unwrap()).unwrap();
    let parity = &v["estimate"]["parity"][0];
    assert_eq!(parity["mean"].as_f64(), Some(1.0));
    assert_eq!(v["params"]["seed"], 9);
    assert!(v["estimate"]["metadata"]["events"][0]["events"].as_u64().unwrap() > 0);
    let (header, _) = read_csv(&dir.path().join("a.csv"));
    assert_eq!(header, ["x", "rho", "sigma", "source"]);
}

#[test]
fn simulate_rejects_bad_geometry() {
    let out = casimir(&["simulate", "--mode", "reflecting", "--beta", "1", "--L", "1", "--eps", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    let out = casimir(&["simulate", "--mode", "reflecting", "--beta", "1", "--L", "1", "--t-burn", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_closed_form_suite_passes_with_full_schema() {
    let out = casimir(&["verify", "--suite", "closed-form"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["suite"], "closed-form");
    assert_eq!(v["overall"], true);
    for c in v["checks"].as_array().unwrap() {
        for key in ["id", "description", "expected", "observed", "tolerance", "pass"] {
            assert!(c.get(key).is_some(), "{key} missing in {c}");
        }
    }
}

#[test]
fn bad_thread_count_is_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_casimir"))
        .args(["force", "--mode", "reflecting", "--beta", "1", "--L", "1"])
        .env("CASIMIR_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

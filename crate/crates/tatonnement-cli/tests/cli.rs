//! End-to-end subcommand tests against the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tempfile::TempDir;

fn preset(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("presets").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tatonnement")).args(args).output().unwrap()
}

fn run_in(dir: &TempDir, config: &Value, subcommand: &str, extra: &[&str]) -> (Output, PathBuf) {
    let config_path = dir.path().join("scenario.json");
    std::fs::write(&config_path, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let out_dir = dir.path().join("out");
    let mut args = vec![
        subcommand.to_string(),
        "--config".into(),
        config_path.display().to_string(),
        "--out".into(),
        out_dir.display().to_string(),
    ];
    args.extend(extra.iter().map(|s| s.to_string()));
    let output = Command::new(env!("CARGO_BIN_EXE_tatonnement")).args(&args).output().unwrap();
    (output, out_dir)
}

fn summary(out_dir: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out_dir.join("summary.json")).unwrap()).unwrap()
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap()
}

#[test]
fn simulate_converges_on_the_damped_preset() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let output = run(&[
        "simulate",
        "--config",
        preset("simulate-cobb-douglas.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let s = summary(&out_dir);
    assert_eq!(s["completed"], json!(true));
    assert!(s["final_angle_eq"].as_f64().unwrap() < 1e-6);
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2002, "header plus one row per state");
    assert!(csv.starts_with("step,time,p_1,p_2,xi_norm,angle_prev,angle_eq,scale\n"));
}

#[test]
fn simulate_writes_partial_trajectory_on_orthant_exit() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": {
            "mechanism": "classical_discrete",
            "k": 5.94, "dt": 0.25, "steps": 500
        },
        "initial_price": [0.72, 0.69]
    });
    let (output, out_dir) = run_in(&dir, &config, "simulate", &[]);
    assert_eq!(code(&output), 3);
    let s = summary(&out_dir);
    assert_eq!(s["completed"], json!(false));
    assert!(s["error"].as_str().unwrap().contains("orthant"));
    let completed = s["steps_completed"].as_u64().unwrap();
    assert!(completed > 0 && completed < 500);
    let csv = std::fs::read_to_string(out_dir.join("trajectory.csv")).unwrap();
    assert_eq!(csv.lines().count() as u64, completed + 2);
}

#[test]
fn simulate_reports_the_two_point_cycle() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": {
            "mechanism": "second_order_discrete",
            "k": 0.1, "gamma_hat": 2.5, "dt": 1.0, "steps": 30000
        },
        "initial_price": [0.72, 0.69],
        "analysis": { "cycles": true }
    });
    let (output, out_dir) = run_in(&dir, &config, "simulate", &["--quiet"]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let s = summary(&out_dir);
    let alpha = s["cycle"]["alpha"].as_f64().expect("cycle report attached");
    assert!((alpha - 0.9094317606683077).abs() < 1e-9);
    assert!(s["cycle"]["balance_residual"].as_f64().unwrap().abs() < 1e-8);
}

#[test]
fn cycle_reports_require_the_discrete_damped_mechanism() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": { "mechanism": "classical_discrete", "k": 0.1, "dt": 0.1, "steps": 100 },
        "analysis": { "cycles": true }
    });
    let (output, _) = run_in(&dir, &config, "simulate", &[]);
    assert_eq!(code(&output), 2);
}

#[test]
fn identical_seeds_reproduce_bytes_and_different_seeds_do_not() {
    let dir = TempDir::new().unwrap();
    let config_path = dir.path().join("scenario.json");
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": {
            "mechanism": "second_order_discrete",
            "k": 0.1, "gamma_hat": 0.5, "dt": 1.0, "steps": 200
        },
        "seed": 11
    });
    std::fs::write(&config_path, serde_json::to_string(&config).unwrap()).unwrap();
    let mut bytes = Vec::new();
    for (i, seed_args) in [vec![], vec![], vec!["--seed", "99"]].iter().enumerate() {
        let out_dir = dir.path().join(format!("out{i}"));
        let mut args = vec![
            "simulate",
            "--config",
            config_path.to_str().unwrap(),
            "--out",
            out_dir.to_str().unwrap(),
            "--quiet",
        ];
        args.extend(seed_args);
        let output = run(&args);
        assert_eq!(code(&output), 0);
        bytes.push(std::fs::read(out_dir.join("trajectory.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1], "same config and seed must reproduce bytes");
    assert_ne!(bytes[0], bytes[2], "the seed flag must change the initial draw");
}

#[test]
fn scarf_classical_run_completes_without_converging() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let output = run(&[
        "simulate",
        "--config",
        preset("simulate-scarf-classical.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&output), 0);
    let s = summary(&out_dir);
    assert_eq!(s["completed"], json!(true));
    assert!(s["final_xi_norm"].as_f64().unwrap() > 1e-3, "orbit must not reach equilibrium");
}

#[test]
fn missing_economy_file_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": "does-not-exist.json",
        "dynamics": { "mechanism": "classical_discrete", "k": 1.0, "dt": 0.1, "steps": 10 }
    });
    let (output, _) = run_in(&dir, &config, "simulate", &[]);
    assert_eq!(code(&output), 2);
}

#[test]
fn malformed_json_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config_path = dir.path().join("broken.json");
    std::fs::write(&config_path, "{ not json").unwrap();
    let output = run(&["simulate", "--config", config_path.to_str().unwrap()]);
    assert_eq!(code(&output), 2);
}

#[test]
fn sweep_writes_rows_in_input_order() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let output = run(&[
        "sweep",
        "--config",
        preset("sweep-cobb-douglas.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&output), 0);
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    let gammas: Vec<f64> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').next().unwrap().parse().unwrap())
        .collect();
    assert_eq!(gammas, vec![2.0, 5.0, 10.0, 20.0]);
}

#[test]
fn single_element_undamped_sweep_is_allowed() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": {
            "mechanism": "second_order_discrete",
            "k": 0.1, "gamma_hat": 0.0, "dt": 1.0, "steps": 2000
        },
        "initial_price": [0.72, 0.69],
        "analysis": { "sweep_gamma_hats": [0.0] }
    });
    let (output, out_dir) = run_in(&dir, &config, "sweep", &[]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let csv = std::fs::read_to_string(out_dir.join("sweep.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    assert!(csv.lines().nth(1).unwrap().starts_with("0.0000000000000000e0,"));
}

#[test]
fn sweep_without_damping_values_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let config = json!({
        "economy": preset("cobb-douglas-2good.json"),
        "dynamics": {
            "mechanism": "second_order_discrete",
            "k": 0.1, "gamma_hat": 0.5, "dt": 1.0, "steps": 100
        }
    });
    let (output, _) = run_in(&dir, &config, "sweep", &[]);
    assert_eq!(code(&output), 2);
}

#[test]
fn verify_passes_on_every_bundled_economy() {
    for name in ["cobb-douglas-2good.json", "scarf.json", "linearized-2good.json"] {
        let output = run(&["verify", "--config", preset(name).to_str().unwrap()]);
        assert_eq!(code(&output), 0, "{name}");
        let stdout = String::from_utf8_lossy(&output.stdout);
        assert!(stdout.contains("PASS"), "{name}: {stdout}");
        assert!(!stdout.contains("FAIL"), "{name}: {stdout}");
    }
}

#[test]
fn verify_rejects_a_field_with_a_broken_zero_mode() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("broken.json");
    let economy = json!({
        "kind": "linearized",
        "p_star": [1.0, 1.0],
        "jacobian": [[-0.5, 0.2], [0.5, -0.5]],
        "project": false
    });
    std::fs::write(&path, serde_json::to_string(&economy).unwrap()).unwrap();
    let output = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&output), 1);
    assert!(String::from_utf8_lossy(&output.stdout).contains("FAIL"));
}

#[test]
fn verify_passes_on_a_random_three_good_economy() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut consumers = Vec::new();
    for _ in 0..3 {
        let raw: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..1.0)).collect();
        let total: f64 = raw.iter().sum();
        let alphas: Vec<f64> = raw.iter().map(|a| a / total).collect();
        let endowments: Vec<f64> = (0..3).map(|_| rng.gen_range(0.1..2.0)).collect();
        consumers.push(json!({ "alphas": alphas, "endowments": endowments }));
    }
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("random-cd.json");
    let economy = json!({ "kind": "cobb_douglas", "consumers": consumers });
    std::fs::write(&path, serde_json::to_string(&economy).unwrap()).unwrap();
    let output = run(&["verify", "--config", path.to_str().unwrap()]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stdout));
}

#[test]
fn analyze_reports_the_tangent_spectrum() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let output = run(&[
        "analyze",
        "--config",
        preset("simulate-cobb-douglas.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&output), 0, "{}", String::from_utf8_lossy(&output.stderr));
    let s: Value =
        serde_json::from_str(&std::fs::read_to_string(out_dir.join("stability.json")).unwrap())
            .unwrap();
    let lambda_m = s["report"]["lambda_m"].as_f64().unwrap();
    assert!((lambda_m - std::f64::consts::SQRT_2).abs() < 1e-6);
    assert_eq!(s["report"]["stable"], json!(true));
    // gamma_hat 0.5 at dt 1 converts to gamma 0.5, an underdamped pair.
    assert!((s["report"]["predicted_rate"]["re"].as_f64().unwrap() + 0.25).abs() < 1e-9);
}

#[test]
fn quiet_suppresses_informational_output() {
    let dir = TempDir::new().unwrap();
    let out_dir = dir.path().join("out");
    let output = run(&[
        "simulate",
        "--config",
        preset("simulate-cobb-douglas.json").to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
        "--quiet",
    ]);
    assert_eq!(code(&output), 0);
    assert!(output.stdout.is_empty());
}

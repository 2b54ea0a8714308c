use std::process::{Command, Output};

use aap_cli::record::{read_csv, Document, Value};

fn aap(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aap")).args(args).env_remove("AAP_THREADS").output().unwrap()
}

fn json(args: &[&str]) -> Document {
    let out = aap(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    Document::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap()
}

fn field(doc: &Document, key: &str) -> f64 {
    doc.records[0].float(key).unwrap_or_else(|| panic!("no float {key} in {:?}", doc.records[0]))
}

#[test]
fn exact_current_at_four_two() {
    let d = json(&["exact", "--N", "4", "--p", "2", "--q", "-1/2"]);
    assert_eq!(field(&d, "J"), 4.0);
    let d = json(&["exact", "--N", "4", "--p", "2", "--q", "-1/2", "--backend", "exact"]);
    assert_eq!(d.records[0].get("J_exact"), Some(&Value::from("4")));
    assert_eq!(d.records[0].get("Delta_exact"), Some(&Value::from("56/3")));
}

#[test]
fn one_particle_closed_form() {
    let d = json(&["exact", "--N", "8", "--p", "1", "--q", "-0.3", "--R", "0.7"]);
    assert!((field(&d, "J") - 0.4).abs() < 1e-12);
    assert!((field(&d, "Delta") - 1.0).abs() < 1e-12);
}

#[test]
fn oracle_matches_exact() {
    let d = json(&["oracle", "--N", "4", "--p", "2"]);
    assert!((field(&d, "J") - 4.0).abs() < 1e-8);
    assert!((field(&d, "Delta") / (56.0 / 3.0) - 1.0).abs() < 1e-6);
}

#[test]
fn config_errors_name_the_field() {
    let out = aap(&["exact", "--N", "4", "--p", "2", "--q", "abc"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`q`"));
    let out = aap(&["exact", "--N", "4", "--p", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("`p`"));
    let out = aap(&["exact", "--N", "4", "--p", "2", "--q", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(aap(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(aap(&["--help"]).status.code(), Some(0));
}

#[test]
fn scaling_single_row() {
    let out = aap(&["scaling", "--curve", "G", "--beta-min", "0", "--steps", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    assert_eq!(rows.len(), 1);
    let g = rows[0].float("G").unwrap();
    assert!((g - std::f64::consts::PI.sqrt()).abs() < 1e-12);
}

#[test]
fn simulate_is_reproducible_and_echoes_seed() {
    let args = ["simulate", "--N", "4", "--p", "2", "--t-max", "1e5", "--batches", "50", "--seed", "7"];
    let (a, b) = (aap(&args), aap(&args));
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stderr));
    assert_eq!(a.stdout, b.stdout);
    let d = Document::from_json(&String::from_utf8(a.stdout).unwrap()).unwrap();
    assert_eq!(d.records[0].get("seed"), Some(&Value::Int(7)));
    assert_eq!(d.config.get("seed"), Some(&Value::Int(7)));
    let z = (field(&d, "J_hat") - 4.0) / field(&d, "J_se");
    assert!(z.abs() < 5.0, "{z}");
}

#[test]
fn ou_small_alpha() {
    let d = json(&["ou", "--alpha", "1e-3", "--beta", "0"]);
    assert!((field(&d, "A1_over_alpha") - 1.0).abs() < 0.01);
    assert!((field(&d, "A2_over_alpha") / (2.0 * std::f64::consts::PI).sqrt() - 1.0).abs() < 0.01);
    assert_eq!(d.records[0].get("mc_A1"), Some(&Value::Null));
}

#[test]
fn config_file_precedence() {
    let dir = std::env::temp_dir().join(format!("aap-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(&path, "# ring\nN = 6\np = 3\nq = -1/3\n").unwrap();
    let cfg = path.to_str().unwrap();
    let d = json(&["--config", cfg, "exact", "--p", "2"]);
    assert_eq!(d.config.get("N"), Some(&Value::Int(6)));
    assert_eq!(d.config.get("p"), Some(&Value::Int(2)));
    assert!((d.config.float("q").unwrap() + 1.0 / 3.0).abs() < 1e-15);
    std::fs::write(&path, "colour = blue\n").unwrap();
    let out = aap(&["--config", cfg, "exact"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("colour"));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn golden_schema_round_trip() {
    let out = aap(&["exact", "--N", "5", "--p", "3", "--q", "-0.25", "--R", "0.8"]);
    let text = String::from_utf8(out.stdout).unwrap();
    let doc = Document::from_json(&text).unwrap();
    assert_eq!(doc.command, "exact");
    let keys: Vec<&str> = doc.records[0].0.iter().map(|(k, _)| k.as_str()).collect();
    assert_eq!(
        keys,
        [
            "N", "p", "q", "R", "L", "rho", "rho_c", "beta", "backend", "J", "Delta", "j_per_site", "delta_per_site", "J_R", "J_L",
            "Delta_R", "Delta_L", "truncation_i", "vanishing_residual"
        ]
    );
    assert_eq!(doc.to_json(), text);

    let out = aap(&["--format", "csv", "exact", "--N", "5", "--p", "3", "--q", "-0.25", "--R", "0.8"]);
    let csv_text = String::from_utf8(out.stdout).unwrap();
    assert!(csv_text.starts_with("schema_version,command,config.format,"));
    let rows = read_csv(&csv_text).unwrap();
    // every float survives the text round trip bit for bit
    for key in ["J", "Delta", "rho_c", "beta", "Delta_L"] {
        assert_eq!(rows[0].float(key).unwrap().to_bits(), doc.records[0].float(key).unwrap().to_bits(), "{key}");
    }
}

#[test]
fn output_file() {
    let path = std::env::temp_dir().join(format!("aap-out-{}.json", std::process::id()));
    let out = aap(&["--output", path.to_str().unwrap(), "exact"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let doc = Document::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc.records[0].float("J"), Some(4.0));
    std::fs::remove_file(path).unwrap();
}

#[test]
fn selftest_quick_passes() {
    let out = aap(&["selftest", "quick"]);
    let err = String::from_utf8_lossy(&out.stderr);
    assert_eq!(out.status.code(), Some(0), "{err}");
    assert!(err.lines().filter(|l| l.starts_with("[PASS]")).count() >= 12, "{err}");
}

#[test]
fn selftest_detects_broken_table() {
    let out = aap(&["selftest", "quick", "--break-mu2", "1"]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.lines().any(|l| l.starts_with("[FAIL] stationarity")), "{err}");
}

#[test]
fn selftest_full_emits_regime_tables() {
    let out = aap(&["--format", "csv", "selftest", "full", "--only", "C7"]);
    assert_eq!(out.status.code(), Some(0));
    let rows = read_csv(&String::from_utf8(out.stdout).unwrap()).unwrap();
    let regimes: Vec<_> = rows.iter().filter(|r| r.get("table") == Some(&Value::from("regimes"))).collect();
    for name in ["sub", "super", "critical"] {
        assert!(regimes.iter().any(|r| r.get("regime") == Some(&Value::from(name))), "{name}");
    }
    assert_eq!(aap(&["selftest", "--only", "C99"]).status.code(), Some(2));
}

#[test]
fn numerical_failures_exit_three() {
    let out = aap(&["ou", "--alpha", "1", "--beta", "0", "--tol", "1e-30"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("numerical failure"));
    assert_eq!(aap(&["scaling", "--curve", "F", "--beta-min", "-39", "--steps", "1"]).status.code(), Some(3));
    // outside the finite-difference window is a configuration problem, not a numerical one
    assert_eq!(aap(&["oracle", "--N", "4", "--p", "2", "--h", "0.5"]).status.code(), Some(2));
}

#[test]
fn thread_override_from_environment() {
    let run = |v: &str| Command::new(env!("CARGO_BIN_EXE_aap")).arg("exact").env("AAP_THREADS", v).output().unwrap();
    let (one, four) = (run("1"), run("4"));
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, four.stdout);
    let bad = run("many");
    assert_eq!(bad.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("AAP_THREADS"));
}

use std::path::Path;
use std::process::{Command, Output};

fn splitspec(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_splitspec")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.toml");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

const SWEEP: &str = r#"
scenario = "field_sweep"
sizes = [5, 7]
fields = [0.0, 0.5, 1.5]
states = ["gs", "mid"]

[model]
model = "xy"
alpha = 1.0
"#;

#[test]
fn separable_spectrum_is_one_line() {
    let out = stdout(&splitspec(&["spectrum", "--L", "7", "--h", "1.5"]));
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "omega,weight");
    assert_eq!(lines.len(), 2);
    let omega: f64 = lines[1].split(',').next().unwrap().parse().unwrap();
    assert!((omega - 0.75).abs() < 1e-9);
}

#[test]
fn spectrum_json_carries_the_broadened_curve() {
    let out =
        stdout(&splitspec(&["--format", "json", "spectrum", "--L", "5", "--alpha", "1", "--h", "1", "--eta", "0.1"]));
    let v: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(v["eta"], 0.1);
    assert!(v["peaks"].as_array().unwrap().len() > 1);
    assert_eq!(v["grid"].as_array().unwrap().len(), v["values"].as_array().unwrap().len());
}

#[test]
fn run_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let a = stdout(&splitspec(&["--threads", "1", "run", &cfg]));
    let b = stdout(&splitspec(&["--threads", "3", "run", &cfg]));
    assert_eq!(a, b);
    assert!(a.starts_with("L,model,J,alpha,field,state,state_index,energy"));
    assert_eq!(a.lines().count(), 1 + 2 * 3 * 2);
}

#[test]
fn run_writes_to_the_requested_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SWEEP);
    let target = dir.path().join("nested/out.json");
    let o = splitspec(&["--format", "json", "run", &cfg, "--out", target.to_str().unwrap()]);
    assert!(stdout(&o).is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(target).unwrap()).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 12);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &format!("colour = \"red\"\n{SWEEP}"));
    let o = splitspec(&["run", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn disorder_sweep_depends_only_on_the_seed() {
    let args = |seed: &'static str, threads: &'static str| {
        vec!["--seed", seed, "--threads", threads, "sweep-disorder", "--L", "6", "--H", "1,4", "--realizations", "3"]
    };
    let a = stdout(&splitspec(&args("5", "1")));
    let b = stdout(&splitspec(&args("5", "2")));
    let c = stdout(&splitspec(&args("6", "1")));
    assert_eq!(a, b);
    assert_ne!(a, c);
    assert!(a.starts_with("L,H,mean_e_ent,sem_e_ent,mean_e_sq,sem_e_sq,n_samples"));
    assert_eq!(a.lines().count(), 3);
}

#[test]
fn rf_check_overlays_the_split_curve() {
    let out = stdout(&splitspec(&["rf-check", "--L", "5", "--h", "1.5", "--t-final", "60", "--step", "0.02"]));
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("L,field,state,omega,rf_rate,split_value"));
    assert!(lines.count() > 10);
}

#[test]
fn rf_check_refuses_long_chains() {
    let o = splitspec(&["rf-check", "--L", "9"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_grid_is_a_usage_error() {
    let o = splitspec(&["sweep-disorder", "--H", "1:2"]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("start:stop:step"));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const DESIGN: &str = r#"
[experiment]
mode = "design"
predictor = "ridge"
methods = ["standard", "one-step", "mfcs", "aci"]
alpha = 0.1
n_train = 16
n_cal = 16
lambda = 2.0
d = [1]
steps = 5
seeds = "0..3"

[pool]
length = 6
seed = 7
noise_scale = 0.1
"#;

const ACTIVE: &str = r#"
[experiment]
mode = "active-learning"
predictor = "gp"
methods = ["standard", "mfcs"]
alpha = 0.1
n_train = 12
n_cal = 16
lambda = 20.0
d = [2]
steps = 2
seeds = "0..2"
holdout_size = 40

[pool]
kind = "continuous"
length = 4
size = 150
seed = 2
noise_scale = 0.3
"#;

fn mfcs(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mfcs"))
        .args(args)
        .env_remove("MFCS_WORKERS")
        .output()
        .expect("binary runs")
}

fn run_config(dir: &Path, sub: &str, text: &str, out: &str, extra: &[&str]) -> Output {
    let config = dir.join(format!("{out}.toml"));
    fs::write(&config, text).unwrap();
    let out_dir = dir.join(out);
    let mut args = vec![
        sub,
        "--config",
        config.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ];
    args.extend_from_slice(extra);
    mfcs(&args)
}

fn column(csv: &str, name: &str) -> Vec<String> {
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|h| *h == name).unwrap();
    lines.map(|l| l.split(',').nth(k).unwrap().to_string()).collect()
}

#[test]
fn design_run_writes_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "design", DESIGN, "run", &["--parallelism", "2"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("run/records.csv")).unwrap();
    assert_eq!(
        records.lines().next().unwrap(),
        "seed,t,method,covered,width,metric,bound_relative,wall_ms"
    );
    assert_eq!(records.lines().count(), 1 + 3 * 5 * 4);
    assert!(column(&records, "bound_relative").iter().all(String::is_empty));
    let summary = fs::read_to_string(dir.path().join("run/summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 1 + 5 * 4);
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["seeds"], "0..3");
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
    assert!(!dir.path().join("run/errors.csv").exists());
    let log = String::from_utf8_lossy(&out.stderr);
    assert!(log.contains("seed 0 ok") && log.contains("seed 2 ok"));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run_config(dir.path(), "design", DESIGN, "a", &["--parallelism", "1"]).status.success());
    assert!(run_config(dir.path(), "design", DESIGN, "b", &["--parallelism", "3"]).status.success());
    for file in ["records.csv", "summary.csv"] {
        let a = fs::read(dir.path().join("a").join(file)).unwrap();
        let b = fs::read(dir.path().join("b").join(file)).unwrap();
        assert_eq!(a, b, "{file}");
    }
}

#[test]
fn seeds_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "design", DESIGN, "run", &["--seeds", "10..11"]);
    assert!(out.status.success());
    let records = fs::read_to_string(dir.path().join("run/records.csv")).unwrap();
    assert!(column(&records, "seed").iter().all(|s| s == "10"));
    assert_eq!(records.lines().count(), 1 + 5 * 4);
}

#[test]
fn bounded_flag_populates_bound_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "active-learning", ACTIVE, "run", &["--bounded"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = fs::read_to_string(dir.path().join("run/records.csv")).unwrap();
    let bounds = column(&records, "bound_relative");
    assert_eq!(bounds.len(), 2 * 2 * 2);
    for b in bounds {
        let v: f64 = b.parse().unwrap();
        assert!(v > 0.0 && v <= 1.0);
    }
}

#[test]
fn missing_field_exits_with_usage_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "design", &DESIGN.replace("alpha = 0.1\n", ""), "run", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("alpha"));
    assert!(!dir.path().join("run/records.csv").exists());
}

#[test]
fn wrong_subcommand_for_mode_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_config(dir.path(), "active-learning", DESIGN, "run", &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("experiment.mode"));
}

#[test]
fn missing_config_file_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = mfcs(&[
        "design",
        "--config",
        dir.path().join("absent.toml").to_str().unwrap(),
        "--out",
        dir.path().join("run").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn verify_weights_passes() {
    let out = mfcs(&["verify-weights", "--n", "3", "--t", "2", "--d", "1,2", "--trials", "20"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.lines().last().unwrap() == "PASS", "{text}");
    assert!(text.contains("\n1,5,5,") && text.contains("\n2,20,20,"), "{text}");
}

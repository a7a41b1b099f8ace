use mfcs_core::report::{write_records, write_summary};
use mfcs_core::sim::{
    aggregate, interpolated_quantile, mean_se, run_experiment, run_seeds, ExperimentConfig,
    ExperimentContext, StepRecord,
};
use mfcs_core::{Error, Extended};

const DESIGN: &str = r#"
[experiment]
mode = "design"
predictor = "ridge"
methods = ["standard", "one-step", "mfcs", "aci"]
alpha = 0.1
n_train = 16
n_cal = 16
lambda = 3.0
d = [1, 2]
steps = 3
seeds = "0..6"

[pool]
length = 6
seed = 7
noise_scale = 0.2
"#;

const FULL: &str = r#"
[experiment]
mode = "design"
predictor = "ridge"
cp = "full"
methods = ["standard", "one-step", "mfcs"]
alpha = 0.2
n_train = 6
n_cal = 6
lambda = 2.0
d = [2]
steps = 2
seeds = "0..3"

[pool]
length = 5
seed = 3
noise_scale = 0.2

[conformal]
grid_points = 40
"#;

const ACTIVE: &str = r#"
[experiment]
mode = "active-learning"
predictor = "gp"
methods = ["standard", "one-step", "mfcs"]
alpha = 0.1
n_train = 12
n_cal = 16
lambda = 20.0
d = [2]
steps = 3
seeds = "0..3"
bounded = true
holdout_size = 50

[pool]
kind = "continuous"
length = 4
size = 200
seed = 2
noise_scale = 0.3
"#;

fn context(text: &str) -> ExperimentContext {
    ExperimentContext::new(ExperimentConfig::from_toml_str(text).unwrap()).unwrap()
}

fn run(text: &str, threads: usize) -> Vec<StepRecord> {
    let ctx = context(text);
    let out = run_seeds(&ctx, ctx.config.experiment.seeds, threads).unwrap();
    assert!(out.failures.is_empty(), "{:?}", out.failures);
    out.records
}

fn check_consistency(records: &[StepRecord]) {
    for r in records {
        match &r.interval {
            Some(iv) => {
                assert_eq!(r.covered, iv.contains(r.label), "{r:?}");
                assert_eq!(r.width, iv.width());
            }
            None => {
                assert!(!r.covered);
                assert_eq!(r.width, Extended::Finite(0.0));
            }
        }
        assert!(r.width.to_f64() >= 0.0);
    }
}

#[test]
fn split_design_records_are_complete_and_consistent() {
    let records = run(DESIGN, 1);
    assert_eq!(records.len(), 6 * 3 * 5);
    check_consistency(&records);
    for r in &records {
        assert!(r.bound_relative.is_none());
        assert!(r.wall_ms.is_none());
    }
}

#[test]
fn full_design_records_are_consistent() {
    let records = run(FULL, 1);
    assert_eq!(records.len(), 3 * 2 * 3);
    check_consistency(&records);
}

#[test]
fn bounded_active_learning_reports_the_bound() {
    let records = run(ACTIVE, 1);
    assert_eq!(records.len(), 3 * 3 * 3);
    check_consistency(&records);
    for r in &records {
        assert!(r.metric.is_finite() && r.metric >= 0.0);
        let b = r.bound_relative.expect("bounded run records the bound");
        assert!(b > 0.0 && b <= 1.0);
    }
}

#[test]
fn runs_are_deterministic_across_thread_counts() {
    for text in [DESIGN, ACTIVE] {
        let a = run(text, 1);
        let b = run(text, 3);
        assert_eq!(a, b);
        let mut csv_a = Vec::new();
        let mut csv_b = Vec::new();
        write_records(&mut csv_a, &a).unwrap();
        write_records(&mut csv_b, &run(text, 1)).unwrap();
        assert_eq!(csv_a, csv_b);
    }
}

#[test]
fn single_seed_matches_runner() {
    let ctx = context(DESIGN);
    let direct = run_experiment(&ctx, 4).unwrap();
    let all = run(DESIGN, 2);
    let from_runner: Vec<StepRecord> = all.into_iter().filter(|r| r.seed == 4).collect();
    assert_eq!(direct, from_runner);
}

#[test]
fn zero_lambda_weighted_methods_match_standard() {
    let text = DESIGN
        .replace("lambda = 3.0", "lambda = 0.0")
        .replace("methods = [\"standard\", \"one-step\", \"mfcs\", \"aci\"]", "methods = [\"standard\", \"one-step\", \"mfcs\"]");
    let records = run(&text, 1);
    for s in records.iter().filter(|r| r.method == "standard") {
        for r in records
            .iter()
            .filter(|r| r.seed == s.seed && r.t == s.t && r.method != "standard")
        {
            assert_eq!(r.interval, s.interval, "{} at seed {} t {}", r.method, r.seed, r.t);
        }
    }
}

#[test]
fn timing_flag_fills_wall_clock_column() {
    let text = DESIGN.replace("seeds = \"0..6\"", "seeds = \"0..1\"\ntiming = true");
    for r in run(&text, 1) {
        assert!(r.wall_ms.is_some_and(|ms| ms >= 0.0));
    }
}

#[test]
fn config_round_trips_and_hash_tracks_content() {
    let cfg = ExperimentConfig::from_toml_str(DESIGN).unwrap();
    let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
    assert_eq!(cfg.hash(), again.hash());
    assert_eq!(cfg.hash().len(), 64);
    let other = ExperimentConfig::from_toml_str(&DESIGN.replace("alpha = 0.1", "alpha = 0.2")).unwrap();
    assert_ne!(cfg.hash(), other.hash());
}

#[test]
fn invalid_configs_name_the_field() {
    let cases = [
        (DESIGN.replace("alpha = 0.1", "alpha = 1.5"), "experiment.alpha"),
        (DESIGN.replace("d = [1, 2]", "d = [0]"), "experiment.d"),
        (DESIGN.replace("lambda = 3.0", "lambda = -1.0"), "experiment.lambda"),
        (DESIGN.replace("steps = 3\n", ""), "steps"),
    ];
    for (text, want) in cases {
        match ExperimentConfig::from_toml_str(&text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, want),
            other => panic!("expected a config error for {want}, got {other:?}"),
        }
    }
}

#[test]
fn summary_matches_manual_aggregation() {
    let records = run(DESIGN, 1);
    let rows = aggregate(&records);
    assert_eq!(rows.len(), 5 * 3);
    for row in &rows {
        let group: Vec<&StepRecord> = records
            .iter()
            .filter(|r| r.method == row.method && r.t == row.t)
            .collect();
        assert_eq!(row.count, group.len());
        let covered: Vec<f64> = group.iter().map(|r| f64::from(u8::from(r.covered))).collect();
        let (mean, se) = mean_se(&covered);
        assert_eq!(row.coverage_mean, mean);
        assert_eq!(row.coverage_se, se);
    }
    let mut out = Vec::new();
    write_summary(&mut out, &rows).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), rows.len() + 1);
}

#[test]
fn quantiles_interpolate_and_propagate_infinity() {
    let v = [1.0, 2.0, 3.0, 5.0].map(Extended::Finite);
    assert_eq!(interpolated_quantile(&v, 0.5), Extended::Finite(2.5));
    assert_eq!(interpolated_quantile(&v, 0.0), Extended::Finite(1.0));
    let w = [
        Extended::Finite(1.0),
        Extended::Finite(2.0),
        Extended::PosInf,
    ];
    assert_eq!(interpolated_quantile(&w, 0.5), Extended::Finite(2.0));
    assert_eq!(interpolated_quantile(&w, 0.75), Extended::PosInf);
    let (mean, se) = mean_se(&[1.0, 0.0, 1.0, 0.0]);
    assert_eq!(mean, 0.5);
    assert!((se - (1.0f64 / 3.0).sqrt() / 2.0).abs() < 1e-15);
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn combcool(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_combcool"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn with_config(text: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.json"), text).unwrap();
    dir
}

const SMALL_MC: &str = r#"{
  "species": "hydrogen",
  "beam": { "geometry": { "kind": "pair", "axis": "z" }, "detuning_hz": -25e6 },
  "run": { "n_atoms": 1500, "initial_temperature": 0.05, "max_time": 0.02, "samples": 5 }
}"#;

#[test]
fn rates_table_shows_hydrogen_rate() {
    let dir = with_config(r#"{ "species": "hydrogen" }"#);
    let o = combcool(dir.path(), &["--config", "c.json", "rates"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("R2 = 2.800 kHz"), "{out}");
    assert!(out.contains("survival after 100 scatters = 0.1023"), "{out}");
}

#[test]
fn empty_and_incomplete_configs_are_validation_errors() {
    for text in ["", "{}", "[1, 2]", "{ \"species\": \"hydrogen\" } trailing"] {
        let dir = with_config(text);
        let o = combcool(dir.path(), &["--config", "c.json", "rates"]);
        assert_eq!(o.status.code(), Some(2), "input {text:?}");
        assert!(stderr(&o).starts_with("error[validation]"), "{}", stderr(&o));
    }
}

#[test]
fn missing_config_flag_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = combcool(dir.path(), &["rates"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_keys_warn_or_fail_under_strict() {
    let dir = with_config(r#"{ "species": "hydrogen", "beam": { "intensity": 5 } }"#);
    let lax = combcool(dir.path(), &["--config", "c.json", "rates"]);
    assert!(lax.status.success());
    assert!(stderr(&lax).contains("warning[config]"), "{}", stderr(&lax));
    assert!(stderr(&lax).contains("beam.intensity"));

    let strict = combcool(dir.path(), &["--config", "c.json", "--strict", "rates"]);
    assert_eq!(strict.status.code(), Some(2));
    assert!(stderr(&strict).contains("beam.intensity"));
}

#[test]
fn type_errors_name_the_offending_key() {
    let dir = with_config(r#"{ "species": "hydrogen", "run": { "n_atoms": "many" } }"#);
    let o = combcool(dir.path(), &["--config", "c.json", "mc"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("`run.n_atoms`"), "{}", stderr(&o));
}

#[test]
fn out_of_range_values_are_rejected_before_running() {
    let dir = with_config(r#"{ "species": "hydrogen", "run": { "n_atoms": 0 } }"#);
    let o = combcool(dir.path(), &["--config", "c.json", "mc"]);
    assert_eq!(o.status.code(), Some(2));
    let dir = with_config(r#"{ "species": "tritium" }"#);
    let o = combcool(dir.path(), &["--config", "c.json", "rates"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn mc_writes_series_and_summary() {
    let dir = with_config(SMALL_MC);
    let o = combcool(dir.path(), &["--config", "c.json", "--out", "run", "mc"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("run/mc_series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("# schema=v1"));
    let columns = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(columns, "time_s,Tx_K,Ty_K,Tz_K,survival,mean_scatters");
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 1 + 6);

    let summary: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("run/mc_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema"], "v1");
    assert_eq!(summary["tool"], "combcool");
    assert_eq!(summary["kind"], "mc");
    assert_eq!(summary["report"]["n_atoms"], 1500);
    assert_eq!(summary["config_hash"].as_str().unwrap().len(), 64);
    let printed: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(printed, summary);
}

#[test]
fn normalized_config_reproduces_the_run_bit_for_bit() {
    let dir = with_config(SMALL_MC);
    let first = combcool(dir.path(), &["--config", "c.json", "--out", "a", "--threads", "4", "mc"]);
    assert!(first.status.success());
    let again = combcool(
        dir.path(),
        &["--config", "a/config.normalized.json", "--out", "b", "--threads", "1", "mc"],
    );
    assert!(again.status.success(), "{}", stderr(&again));
    for name in ["mc_series.csv", "mc_summary.json"] {
        let a = fs::read(dir.path().join("a").join(name)).unwrap();
        let b = fs::read(dir.path().join("b").join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

#[test]
fn seed_override_changes_the_ensemble() {
    let dir = with_config(SMALL_MC);
    let a = combcool(dir.path(), &["--config", "c.json", "--out", "a", "mc"]);
    let b = combcool(dir.path(), &["--config", "c.json", "--out", "b", "--seed", "7", "mc"]);
    assert!(a.status.success() && b.status.success());
    let a: Value = serde_json::from_slice(&a.stdout).unwrap();
    let b: Value = serde_json::from_slice(&b.stdout).unwrap();
    assert_eq!(b["seed"], 7);
    assert_ne!(a["report"]["temperature"], b["report"]["temperature"]);
    assert_ne!(a["config_hash"], b["config_hash"]);
}

#[test]
fn oracle_runs_on_one_axis_and_refuses_three() {
    let dir = with_config(SMALL_MC);
    let o = combcool(dir.path(), &["--config", "c.json", "--out", "o", "oracle"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(dir.path().join("o/oracle_series.csv").exists());

    let dir = with_config(r#"{ "species": "hydrogen" }"#);
    let o = combcool(dir.path(), &["--config", "c.json", "oracle"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("one-dimensional"));
}

#[test]
fn zero_threads_is_rejected() {
    let dir = with_config(SMALL_MC);
    let o = combcool(dir.path(), &["--config", "c.json", "--threads", "0", "mc"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn optimize_finds_an_interior_hydrogen_intensity() {
    let dir = with_config(
        r#"{ "species": "hydrogen",
             "beam": { "geometry": { "kind": "single", "axis": "z" }, "detuning_hz": 0 } }"#,
    );
    let o = combcool(dir.path(), &["--config", "c.json", "--out", "opt", "optimize"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    let i = v["result"]["intensity"].as_f64().unwrap();
    assert!((3e4..=3e5).contains(&i), "{i}");
    assert!(v["result"]["boundary"].is_null());
    assert!(dir.path().join("opt/optimize.json").exists());
}

const LEVELS: &str = r#"{
  "name": "test",
  "levels": [ { "label": "a" }, { "label": "b" }, { "label": "c" } ],
  "transitions": [
    { "lower": "a", "upper": "b", "frequency": 1.2336005e15 },
    { "lower": "a", "upper": "c", "frequency": FREQ },
    { "lower": "b", "upper": "c", "frequency": 1.2336e15 }
  ]
}"#;

const SCHEDULE: &str = r#"{
  "species": "hydrogen",
  "comb": { "carrier_hz": 6.168e14, "rep_rate_hz": 1e8, "duty_cycle": 1e-3, "mean_intensity": 1e4 },
  "schedule": { "levels": "levels.json", "eom_band_hz": { "min": 1e6, "max": 4e7 }, "merge_tolerance_hz": 1e3 }
}"#;

#[test]
fn schedule_prints_plan_and_flags_unreachable_offsets() {
    let dir = with_config(SCHEDULE);
    fs::write(dir.path().join("levels.json"), LEVELS.replace("FREQ", "1.23360053e15")).unwrap();
    let o = combcool(dir.path(), &["--config", "c.json", "--out", "s", "schedule"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("drives: 1"), "{out}");
    assert!(out.lines().any(|l| l.starts_with("a->c") && l.contains("3.000000e7")));
    let plan: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("s/schedule.json")).unwrap()).unwrap();
    assert_eq!(plan["plan"]["entries"].as_array().unwrap().len(), 3);

    fs::write(dir.path().join("levels.json"), LEVELS.replace("FREQ", "1.233600545e15")).unwrap();
    let o = combcool(dir.path(), &["--config", "c.json", "--out", "s", "schedule"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("a->c"), "{}", stderr(&o));
}

#[test]
fn schedule_without_comb_is_a_validation_error() {
    let dir = with_config(
        r#"{ "species": "hydrogen", "schedule": { "eom_band_hz": { "min": 1e6, "max": 4e7 } } }"#,
    );
    let o = combcool(dir.path(), &["--config", "c.json", "schedule"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reproduce_survival_needs_no_config() {
    let dir = tempfile::tempdir().unwrap();
    let o = combcool(dir.path(), &["reproduce", "survival-100"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["schema"], "v1");
    assert_eq!(v["id"], "survival-100");
    assert_eq!(v["passed"], true);
    let s = v["measured"]["survival"].as_f64().unwrap();
    assert!((0.08..=0.12).contains(&s), "{s}");
}

#[test]
fn reproduce_accepts_criterion_numbers_and_rejects_unknown_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = combcool(dir.path(), &["reproduce", "1"]);
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["id"], "scatter-rate");

    let o = combcool(dir.path(), &["reproduce", "tweezers"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("error[validation]"));
}

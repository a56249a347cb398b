use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use winplan_core::{analyze, TrialData};

fn examples() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples")
}

fn winplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_winplan"))
        .args(args)
        .env("WINPLAN_QUIET", "1")
        .output()
        .expect("run winplan")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn records(out: &Output) -> Vec<Value> {
    stdout(out)
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn plan_reproduces_parkinsons_design() {
    let cfg = examples().join("pd_example.toml");
    let out = winplan(&[
        "plan",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "records",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rows = records(&out);
    assert_eq!(rows.len(), 1);
    let r = &rows[0]["result"];
    assert_eq!(r["n_total"], 492);
    assert_eq!(
        r["n_treated"].as_u64().unwrap() + r["n_control"].as_u64().unwrap(),
        492
    );
}

#[test]
fn plan_table_echoes_design() {
    let cfg = examples().join("pd_example.toml");
    let out = winplan(&["plan", "--config", cfg.to_str().unwrap()]);
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.starts_with("# design: "));
    assert!(text.contains("492"));
}

#[test]
fn command_line_sweep_over_correlation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "d.toml",
        "winps = [0.593, 0.556, 0.551, 0.544, 0.553]\ncorrelation = 0.0\nlower_bound = 0.5\nassurance = 0.9\n",
    );
    let out = winplan(&[
        "plan",
        "--config",
        &cfg,
        "--sweep",
        "correlation=0.1,0.3,0.5",
        "--format",
        "records",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let n: Vec<u64> = records(&out)
        .iter()
        .map(|r| r["result"]["n_total"].as_u64().unwrap())
        .collect();
    assert_eq!(n, [280, 438, 598]);
}

#[test]
fn table2_config_covers_every_cell() {
    let cfg = examples().join("table2.toml");
    let out = winplan(&[
        "plan",
        "--config",
        cfg.to_str().unwrap(),
        "--format",
        "records",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(records(&out).len(), 36);
}

#[test]
fn infeasible_design_exits_with_validation_code() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "bad.toml",
        "winps = [0.55, 0.52]\ncorrelation = 0.2\nlower_bound = 0.6\nassurance = 0.9\n",
    );
    let out = winplan(&["plan", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("infeasible"), "{}", stderr(&out));
}

#[test]
fn unknown_config_key_is_a_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "typo.toml",
        "winps = [0.6]\ncorelation = 0.2\nlower_bound = 0.5\nassurance = 0.9\n",
    );
    let out = winplan(&["plan", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn missing_config_file_is_an_io_error() {
    let out = winplan(&["plan", "--config", "/nonexistent/winplan.toml"]);
    assert_eq!(out.status.code(), Some(1));
}

const TOY: &str = "arm,a,b\n1,3,1\n1,4,2\n0,1,2\n0,3,1\n";

#[test]
fn estimate_toy_file_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "toy.csv", TOY);
    let out = winplan(&["estimate", "--data", &data, "--format", "records"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = &records(&out)[0];
    assert_eq!(rec["per_endpoint"][0].as_f64().unwrap(), 0.875);
    assert_eq!(rec["per_endpoint"][1].as_f64().unwrap(), 0.5);
    assert_eq!(rec["global_estimate"].as_f64().unwrap(), 0.6875);

    let lib = analyze(
        &TrialData::from_rows(
            &[vec![3.0, 1.0], vec![4.0, 2.0]],
            &[vec![1.0, 2.0], vec![3.0, 1.0]],
        )
        .unwrap(),
        0.95,
    )
    .unwrap();
    assert_eq!(
        rec["global_variance"].as_f64().unwrap(),
        lib.global_variance
    );
    assert_eq!(rec["ci_lower"].as_f64().unwrap(), lib.ci_lower);
    assert_eq!(rec["ci_upper"].as_f64().unwrap(), lib.ci_upper);
    for i in 0..2 {
        for j in 0..2 {
            assert_eq!(
                rec["covariance"][i][j].as_f64().unwrap(),
                lib.covariance[i][j]
            );
        }
    }
}

#[test]
fn estimate_arm_column_and_delimiter_options() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(
        dir.path(),
        "toy.tsv",
        "a\tgroup\tb\n3\t1\t1\n4\t1\t2\n1\t0\t2\n3\t0\t1\n",
    );
    let out = winplan(&[
        "estimate",
        "--data",
        &data,
        "--arm-column",
        "group",
        "--delimiter",
        "\t",
        "--format",
        "records",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert_eq!(
        records(&out)[0]["global_estimate"].as_f64().unwrap(),
        0.6875
    );
}

#[test]
fn identical_arms_give_one_half() {
    let dir = tempfile::tempdir().unwrap();
    let mut text = String::from("arm,y,z\n");
    for (i, v) in [1.0, 2.5, 4.0, 7.0, 9.5].iter().enumerate() {
        for arm in [0, 1] {
            text.push_str(&format!("{arm},{v},{}\n", i * i));
        }
    }
    let data = write(dir.path(), "same.csv", &text);
    let out = winplan(&["estimate", "--data", &data, "--format", "records"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = &records(&out)[0];
    assert_eq!(rec["global_estimate"].as_f64().unwrap(), 0.5);
    let (lo, hi) = (
        rec["ci_lower"].as_f64().unwrap(),
        rec["ci_upper"].as_f64().unwrap(),
    );
    assert!(lo < 0.5 && 0.5 < hi);
}

#[test]
fn complete_separation_reports_undefined_interval() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "sep.csv", "arm,y\n1,5\n1,6\n0,1\n0,2\n");
    let out = winplan(&["estimate", "--data", &data, "--format", "records"]);
    assert!(out.status.success(), "{}", stderr(&out));
    let rec = &records(&out)[0];
    assert_eq!(rec["global_estimate"].as_f64().unwrap(), 1.0);
    assert!(rec["ci_lower"].is_null());
    let table = winplan(&["estimate", "--data", &data]);
    assert!(stdout(&table).contains("CI: undefined"));
}

#[test]
fn non_numeric_value_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "bad.csv", "arm,y\n1,5\n1,6\n0,oops\n0,2\n");
    let out = winplan(&["estimate", "--data", &data]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));
}

#[test]
fn too_few_subjects_is_a_validation_error() {
    let dir = tempfile::tempdir().unwrap();
    let data = write(dir.path(), "small.csv", "arm,y\n1,5\n0,1\n0,2\n");
    let out = winplan(&["estimate", "--data", &data]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_zero_replicates() {
    let cfg = examples().join("desk_check.toml");
    let out = winplan(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--replicates",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_rejects_zero_threads() {
    let cfg = examples().join("desk_check.toml");
    let out = winplan(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--replicates",
        "10",
        "--threads",
        "0",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn non_positive_definite_scenario_is_reported_per_row() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "grid.toml",
        "master_seed = 1\nreplicates = 50\n\n[[scenario]]\nwinps = [0.7, 0.65, 0.6]\n\
         data_correlation = [0.3, -0.9]\nlower_bound = 0.55\nassurance = 0.8\n",
    );
    let out = winplan(&["simulate", "--config", &cfg, "--format", "records"]);
    assert_eq!(out.status.code(), Some(2));
    let rows = records(&out);
    assert_eq!(rows.len(), 2);
    assert!(rows[0]["result"].is_object());
    assert!(rows[1]["error"]
        .as_str()
        .unwrap()
        .contains("positive definite"));
}

#[test]
fn simulate_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = examples().join("desk_check.toml");
    let path = dir.path().join("sim.txt");
    let out = winplan(&[
        "simulate",
        "--config",
        cfg.to_str().unwrap(),
        "--replicates",
        "40",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(path).unwrap();
    assert!(text.starts_with("# master_seed: 20240601"));
    assert_eq!(text.lines().count(), 6);
}

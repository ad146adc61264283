use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn dine(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dine"))
        .args(args)
        .env_remove("DINE_WORKERS")
        .output()
        .expect("spawn dine")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON object")
}

fn generate(dir: &Path, name: &str, extra: &[&str]) -> PathBuf {
    let path = dir.join(name);
    let mut args = vec!["generate", "--output", path.to_str().unwrap()];
    args.extend_from_slice(extra);
    json(&dine(&args));
    path
}

#[test]
fn generate_writes_csv_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "s.csv", &["--n", "20", "--d", "2", "--d-z", "3", "--rho", "-0.5", "--f", "cube"]);
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("x0,x1,y0,y1,z0,z1,z2\n"));
    assert_eq!(text.lines().count(), 21);
    let meta = std::fs::read_to_string(dir.path().join("s.meta")).unwrap();
    assert!(meta.contains("rho=-0.5\n") && meta.contains("f=cube\n"));
    assert!(meta.contains("ground_truth_cmi=0.2876820724517809\n"));
}

#[test]
fn estimate_recovers_ground_truth_and_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", &["--n", "1000", "--d", "1", "--d-z", "1", "--rho", "0.8", "--seed", "3"]);
    let args = ["estimate", "--input", path.to_str().unwrap(), "--seed", "11"];
    let first = dine(&args);
    let v = json(&first);
    let est = v["estimate"].as_f64().unwrap();
    assert!((est - 0.5108).abs() < 0.15, "{est}");
    assert_eq!(v["n"], 1000);
    assert_eq!(v["dims"]["z"], 1);
    assert_eq!(v["seed"], 11);
    assert_eq!(v["diagnostics"]["x"].as_array().unwrap().len(), 1);
    assert_eq!(dine(&args).stdout, first.stdout);
}

#[test]
fn non_numeric_cell_is_reported_with_its_row() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    let mut text = String::from("x0,y0,z0\n");
    for i in 1..=10 {
        text += &if i == 7 { "0.1,oops,0.3\n".to_string() } else { format!("{i},{},{}\n", i * 2, i % 3) };
    }
    std::fs::write(&path, text).unwrap();
    let out = dine(&["estimate", "--input", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("row 7"), "{err}");
    assert!(out.stdout.is_empty());
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(dine(&["estimate", "--input", "/definitely/missing.csv"]).status.code(), Some(2));
    assert_eq!(dine(&["estimate"]).status.code(), Some(2));
    assert_eq!(dine(&["frobnicate"]).status.code(), Some(2));
    let out = dine(&["benchmark", "--task", "mi", "--runs", "1", "--n", "50", "--output", "/no/such/dir/out.csv"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(dine(&["benchmark", "--task", "xyz", "--output", "o.csv"]).status.code(), Some(2));
}

#[test]
fn divergent_training_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", &["--n", "200", "--rho", "0.5"]);
    let out = dine(&["estimate", "--input", path.to_str().unwrap(), "--lr", "1e300"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn citest_detects_strong_dependence() {
    let dir = tempfile::tempdir().unwrap();
    let path = generate(dir.path(), "d.csv", &["--n", "1000", "--rho", "0.9", "--seed", "4"]);
    let v = json(&dine(&["citest", "--input", path.to_str().unwrap()]));
    assert_eq!(v["decision"], "dependent");
    assert_eq!(v["p_value"], 0.0);
    let v = json(&dine(&["citest", "--input", path.to_str().unwrap(), "--permutations", "1"]));
    let p = v["p_value"].as_f64().unwrap();
    assert!(p == 0.0 || p == 1.0);
}

#[test]
fn citest_is_calibrated_under_independence() {
    let dir = tempfile::tempdir().unwrap();
    let mut accepted = 0;
    for seed in 0..100 {
        let s = seed.to_string();
        let path = generate(dir.path(), &format!("n{seed}.csv"), &["--n", "500", "--rho", "0", "--seed", &s]);
        let v = json(&dine(&["citest", "--input", path.to_str().unwrap(), "--seed", &s]));
        let p = v["p_value"].as_f64().unwrap();
        assert!((0.0..=1.0).contains(&p));
        accepted += (p > 0.05) as usize;
    }
    assert!(accepted >= 85, "{accepted}/100 accepted");
}

#[test]
fn benchmark_mi_grid() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mi.csv");
    let v = json(&dine(&[
        "benchmark", "--task", "mi", "--n", "1000", "--d", "2", "--rho", "-0.9,0,0.9", "--runs", "10", "--seed", "2",
        "--output", out.to_str().unwrap(),
    ]));
    assert_eq!(v["records"], 30);
    let summary = v["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 3);
    let null_mean = summary[1]["mean"].as_f64().unwrap();
    assert!(null_mean.abs() < 0.05, "{null_mean}");
    for cell in [&summary[0], &summary[2]] {
        let (mean, truth) = (cell["mean"].as_f64().unwrap(), cell["ground_truth"].as_f64().unwrap());
        assert!((mean - truth).abs() < 0.2, "{mean} vs {truth}");
    }
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.starts_with("task,cell,run,n,d,d_z,rho,f,g,z_family,method,label,estimate,p_value,decision,ground_truth,seed\n"));
    assert_eq!(text.lines().count(), 31);
    assert!(dir.path().join("mi.summary.csv").exists());
    assert!(dir.path().join("mi.timing.csv").exists());
}

#[test]
fn benchmark_records_are_byte_identical_across_reruns_and_workers() {
    let dir = tempfile::tempdir().unwrap();
    let run = |name: &str, workers: &str| {
        let out = dir.path().join(name);
        json(&dine(&[
            "benchmark", "--task", "cit", "--n", "200", "--d-z", "2", "--runs", "3", "--permutations", "20",
            "--epochs", "20", "--seed", "9", "--workers", workers, "--output", out.to_str().unwrap(),
        ]));
        std::fs::read(out).unwrap()
    };
    let a = run("a.csv", "1");
    assert_eq!(a, run("b.csv", "1"));
    assert_eq!(a, run("c.csv", "3"));
    let metrics = std::fs::read_to_string(dir.path().join("a.summary.csv")).unwrap();
    assert!(metrics.starts_with("cell,n,d,d_z,n_independent,n_dependent,f1,auc,type1_rate,type2_rate\n"));
}

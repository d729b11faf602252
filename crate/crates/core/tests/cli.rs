mod common;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use gpens::experiment::{output, GENERATIONS_FILE, SUMMARY_FILE};

fn gpens(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gpens")).args(args).output().unwrap()
}

fn write_config(dir: &Path, extra: &str) -> PathBuf {
    let path = dir.join("exp.conf");
    fs::write(
        &path,
        format!(
            "dataset = {}\npopulation_size = 10\nstgp_count = 10\ngsgp_count = 10\nseed = 3\n{extra}",
            common::fixture("yacht").display()
        ),
    )
    .unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn standard_run_writes_three_generations() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "runs = 1\ngenerations = 3\n");
    let out = dir.path().join("out");
    let o = gpens(&["run", "--config", s(&cfg), "--method", "standard", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(out.join(GENERATIONS_FILE)).unwrap();
    assert_eq!(text.lines().next().unwrap(), output::GENERATIONS_HEADER);
    let rows = output::read_generations(&out.join(GENERATIONS_FILE)).unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r.alive == 20 && r.method == "standard"));
    assert_eq!(rows.iter().map(|r| r.generation).collect::<Vec<_>>(), vec![1, 2, 3]);
}

#[test]
fn all_methods_summary_then_stats_and_size() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "runs = 3\ngenerations = 2\n");
    let out = dir.path().join("out");
    assert!(gpens(&["run", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let summary = out.join(SUMMARY_FILE);
    let rows = output::read_summary(&summary).unwrap();
    assert_eq!(rows.len(), 3 * 7);

    let matrix = dir.path().join("matrix.csv");
    let o = gpens(&["stats", "--summary", s(&summary), "--out", s(&matrix)]);
    assert!(o.status.success());
    let text = fs::read_to_string(&matrix).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], output::MATRIX_HEADER);
    assert_eq!(lines.len(), 1 + 42);
    let order: Vec<&str> = lines[1..].iter().step_by(6).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(order, ["standard", "random", "half", "correlation", "prob-correlation", "entropy", "prob-entropy"]);
    assert!(lines[1..].iter().all(|l| {
        let f: Vec<&str> = l.split(',').collect();
        f[0] != f[1] && (f[2].parse::<f64>().unwrap() < 0.05) == (f[3] == "true")
    }));

    let o = gpens(&["size", "--records", s(&out.join(GENERATIONS_FILE))]);
    assert!(o.status.success());
    let stdout = String::from_utf8(o.stdout).unwrap();
    let sizes: Vec<(String, f64)> = stdout
        .lines()
        .skip(1)
        .map(|l| {
            let (m, v) = l.split_once(',').unwrap();
            (m.to_string(), v.parse().unwrap())
        })
        .collect();
    assert_eq!(sizes[0], ("standard".to_string(), 20.0));
    assert_eq!(sizes[2], ("half".to_string(), 10.0));
    assert!(sizes.iter().all(|(_, v)| (1.0..=20.0).contains(v)));
}

#[test]
fn two_method_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("s.csv");
    fs::write(
        &summary,
        format!("{}\n1,entropy,3.0,4,5.0\n1,standard,1.0,20,20\n2,standard,2.0,20,20\n2,entropy,4.0,3,4.5\n", output::SUMMARY_HEADER),
    )
    .unwrap();
    let matrix = dir.path().join("m.csv");
    assert!(gpens(&["stats", "--summary", s(&summary), "--out", s(&matrix)]).status.success());
    let text = fs::read_to_string(&matrix).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("standard,entropy,"));
    assert!(lines[2].starts_with("entropy,standard,"));
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "runs = 1\ngenerations = 1\n");
    let o = gpens(&["run", "--config", s(&cfg), "--method", "bagging"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("bagging"));

    let bad = dir.path().join("bad.conf");
    fs::write(&bad, "dataset = x.csv\nfrobnicate = 1\n").unwrap();
    assert_eq!(gpens(&["run", "--config", s(&bad)]).status.code(), Some(2));
    fs::write(&bad, "dataset = x.csv\nruns = 0\n").unwrap();
    assert_eq!(gpens(&["run", "--config", s(&bad)]).status.code(), Some(2));
    assert_eq!(gpens(&["run", "--config", s(&dir.path().join("nope.conf"))]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "runs = 1\ngenerations = 1\n");
    let missing = dir.path().join("missing.csv");
    assert_eq!(gpens(&["run", "--config", s(&cfg), "--dataset", s(&missing)]).status.code(), Some(3));

    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = gpens(&["run", "--config", s(&cfg), "--method", "standard", "--out", s(&blocker.join("sub"))]);
    assert_eq!(o.status.code(), Some(3));

    let m = dir.path().join("m.csv");
    assert_eq!(gpens(&["stats", "--summary", s(&missing), "--out", s(&m)]).status.code(), Some(3));
}

#[test]
fn rerun_overwrites_identically() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "runs = 2\ngenerations = 3\nmethods = random, prob-correlation\nrandom_removal_prob = 0.3\n");
    let out = dir.path().join("out");
    assert!(gpens(&["run", "--config", s(&cfg), "--out", s(&out)]).status.success());
    let first = fs::read(out.join(GENERATIONS_FILE)).unwrap();
    assert!(gpens(&["run", "--config", s(&cfg), "--out", s(&out)]).status.success());
    assert_eq!(fs::read(out.join(GENERATIONS_FILE)).unwrap(), first);
    let leftovers: Vec<_> = fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name()).collect();
    assert_eq!(leftovers.len(), 3, "{leftovers:?}");
}

#[test]
fn shipped_configs_parse() {
    for name in ["airfoil", "concrete", "ppb", "slump", "yacht"] {
        let cfg = gpens::experiment::ExperimentConfig::from_file(common::config(name)).unwrap();
        cfg.validate().unwrap();
        assert!(cfg.dataset.exists(), "{}", cfg.dataset.display());
        assert_eq!((cfg.runs, cfg.generations, cfg.ensemble.gp.population_size), (30, 1000, 200));
    }
}

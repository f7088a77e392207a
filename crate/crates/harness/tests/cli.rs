use std::path::Path;
use std::process::{Command, Output};

use tdrl_harness::parse_plotdata;
use tdrl_harness::run::parse_records;

fn tdrl(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tdrl"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

const CONFIG: &str = "[env]\nname = \"random_walk\"\n[algorithm]\nname = \"td0\"\n[run]\nreplicates = 2\nepisodes = 10\n";

fn setup(config: &str) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("exp.toml"), config).unwrap();
    dir
}

#[test]
fn run_writes_records_and_summary() {
    let dir = setup(CONFIG);
    let out = tdrl(&["run", "exp.toml", "--out", "runs.csv"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let records = std::fs::read(dir.path().join("runs.csv")).unwrap();
    assert_eq!(parse_records(&records).unwrap().len(), 20);
    let summary = std::fs::read_to_string(dir.path().join("runs.summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 11);
    assert!(summary.starts_with("episode,replicates,return_mean,return_std,"));
}

#[test]
fn run_twice_gives_identical_bytes_and_seed_overrides() {
    let dir = setup(CONFIG);
    let a = tdrl(&["run", "exp.toml"], dir.path());
    let b = tdrl(&["run", "exp.toml"], dir.path());
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let c = tdrl(&["run", "exp.toml", "--seed", "5"], dir.path());
    assert!(c.status.success());
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn exit_codes() {
    let dir = setup("[env]\nname = \"maze\"\n[algorithm]\nname = \"td0\"\n");
    let out = tdrl(&["run", "exp.toml"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("maze"));

    let dir = setup("[env]\nname = \"random_walk\"\n[algorithm]\nname = \"td0\"\ngamma = 1.5\n");
    assert_eq!(tdrl(&["run", "exp.toml"], dir.path()).status.code(), Some(3));

    let dir = setup(CONFIG);
    let out = tdrl(&["sweep", "exp.toml", "--grid", "lamda=0,1"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = tdrl(&["sweep", "exp.toml", "--grid", "epsilon=0.1,7"], dir.path());
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(tdrl(&["run", "missing.toml"], dir.path()).status.code(), Some(1));

    let dir = setup(&format!("{CONFIG}typo = 1\n"));
    assert_eq!(tdrl(&["run", "exp.toml"], dir.path()).status.code(), Some(1));
}

#[test]
fn sweep_prints_a_table() {
    let dir = setup(CONFIG);
    let out = tdrl(&["sweep", "exp.toml", "--grid", "alpha=0.05,0.1", "--grid", "run.replicates=1,2"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], "algorithm.alpha,run.replicates,final_rms,mean_return");
}

#[test]
fn plotdata_round_trips() {
    let dir = setup(CONFIG);
    assert!(tdrl(&["run", "exp.toml", "--out", "runs.csv"], dir.path()).status.success());
    let out = tdrl(&["plotdata", "runs.csv", "--metric", "rms_error"], dir.path());
    assert!(out.status.success());
    let rows = parse_plotdata(&out.stdout).unwrap();
    let records = parse_records(&std::fs::read(dir.path().join("runs.csv")).unwrap()).unwrap();
    assert_eq!(rows.len(), 20);
    for (row, r) in rows.iter().zip(&records) {
        assert_eq!((row.replicate, row.episode, row.value), (r.replicate, r.episode, r.rms_error));
    }
    let out = tdrl(&["plotdata", "runs.csv", "--metric", "reward"], dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("episode_return") && err.contains("rms_error"), "{err}");
}

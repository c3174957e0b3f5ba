use std::io::Write;
use std::process::{Command, Output, Stdio};

fn hadq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hadq")).args(args).env_remove("HADQ_SEED").output().unwrap()
}

fn hadq_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_hadq"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child.stdin.take().unwrap().write_all(input.as_bytes()).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const SMALL_BURKE: [&str; 7] = ["burke", "--window", "3000", "--warmup", "500", "--replicas", "3"];

#[test]
fn evolve_writes_trajectory_and_duals() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let args = ["evolve", "--lines", "3", "--counts", "10,20,30", "--cycle", "50", "--time", "10", "--seed", "1", "--output", out];
    let o = hadq(&args);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let traj = std::fs::read_to_string(dir.path().join("trajectory.csv")).unwrap();
    let duals = std::fs::read_to_string(dir.path().join("duals.csv")).unwrap();
    assert!(traj.starts_with("time,line,position\n"));
    assert!(duals.starts_with("line,x,t\n"));
    // two snapshots of 60 particles
    assert_eq!(traj.lines().count(), 1 + 2 * 60);

    let again = tempfile::tempdir().unwrap();
    let mut args2 = args;
    args2[12] = again.path().to_str().unwrap();
    assert_eq!(hadq(&args2).status.code(), Some(0));
    assert_eq!(traj, std::fs::read_to_string(again.path().join("trajectory.csv")).unwrap());
    assert_eq!(duals, std::fs::read_to_string(again.path().join("duals.csv")).unwrap());
}

#[test]
fn evolve_line_count_mismatch_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = hadq(&["evolve", "--lines", "2", "--counts", "1,2,3", "--cycle", "5", "--time", "1", "--output", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lines"));
}

#[test]
fn reports_are_byte_identical() {
    let a = hadq(&[&SMALL_BURKE[..], &["--seed", "7"]].concat());
    let b = hadq(&[&SMALL_BURKE[..], &["--seed", "7"]].concat());
    let c = hadq(&[&SMALL_BURKE[..], &["--seed", "8"]].concat());
    assert_eq!(a.status.code(), b.status.code());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn jobs_do_not_change_output() {
    let a = hadq(&[&SMALL_BURKE[..], &["--jobs", "1"]].concat());
    let b = hadq(&[&SMALL_BURKE[..], &["--jobs", "3"]].concat());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn seed_falls_back_to_environment() {
    let env = Command::new(env!("CARGO_BIN_EXE_hadq")).args(SMALL_BURKE).env("HADQ_SEED", "11").output().unwrap();
    let flag = hadq(&[&SMALL_BURKE[..], &["--seed", "11"]].concat());
    assert_eq!(env.stdout, flag.stdout);
    let v: serde_json::Value = serde_json::from_slice(&env.stdout).unwrap();
    assert_eq!(v["seed"], 11);
    assert!(v["runtime_s"].is_null());
}

#[test]
fn unstable_queue_is_rejected() {
    let o = hadq(&["burke", "--lambda", "1.0", "--rho", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lambda"));
}

#[test]
fn unknown_flag_is_named() {
    let o = hadq(&["burke", "--lamda", "0.5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lamda"));
}

#[test]
fn config_file_then_flag_wins() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"seed": 3, "lambda": 0.2, "window": 3000, "warmup": 500, "replicas": 3}"#).unwrap();
    let o = hadq(&["--config", cfg.to_str().unwrap(), "burke", "--lambda", "0.4"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["params"]["lambda"], 0.4);
    assert_eq!(v["params"]["window"], 3000.0);
    assert_eq!(v["seed"], 3);
}

#[test]
fn config_file_unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"lambada": 0.2}"#).unwrap();
    let o = hadq(&["burke", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--lambada"));
}

#[test]
fn failing_verdict_exits_one() {
    // an unreachable pass-rate requirement forces the verdict to fail
    let o = hadq(&[
        "invariance", "--length", "20", "--counts", "3,6", "--horizon", "2", "--samples", "40", "--meta-replicas", "2",
        "--required-pass-rate", "1.5",
    ]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["experiment"], "invariance");
}

#[test]
fn report_and_samples_go_to_files() {
    let dir = tempfile::tempdir().unwrap();
    let rep = dir.path().join("r.json");
    let csv = dir.path().join("s.csv");
    let o = hadq(&[&SMALL_BURKE[..], &["--output", rep.to_str().unwrap(), "--samples-csv", csv.to_str().unwrap(), "--timing"]].concat());
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(rep).unwrap()).unwrap();
    assert!(v["runtime_s"].as_f64().unwrap() >= 0.0);
    assert!(std::fs::read_to_string(csv).unwrap().lines().count() > 1);
}

#[test]
fn ops_split_and_queue() {
    let input = "line,position\n1,1\n1,3\n2,0.5\n2,2\n2,4\n";
    let o = hadq_stdin(&["ops", "split", "--interval", "5"], input);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "line,position\n1,2\n1,4\n2,0.5\n");

    let o = hadq_stdin(&["ops", "queue", "--interval", "5"], "line,position\n1,1\n2,2\n2,0.5\n");
    assert_eq!(stdout(&o), "time,event,walk,q1\n0.5,service,-1,0\n1,arrival-1,0,1\n2,service,-1,0\n");

    let o = hadq_stdin(&["ops", "links", "--interval", "5"], "line,position\n1,1\n2,2\n2,0.5\n");
    assert_eq!(stdout(&o), "arrival,departure,class\n1,2,1\n");
}

#[test]
fn ops_multiclass_round_trip() {
    let input = "line,position\n1,1\n2,0.5\n2,2\n2,3.5\n";
    let classes = stdout(&hadq_stdin(&["ops", "multiclass", "--cycle", "4"], input));
    let expanded = stdout(&hadq_stdin(&["ops", "expand", "--cycle", "4"], &classes.replacen("class", "line", 1)));
    let couple = stdout(&hadq_stdin(&["ops", "couple", "--cycle", "4"], input));
    assert_eq!(expanded, couple);
    let back = stdout(&hadq_stdin(&["ops", "collapse", "--cycle", "4"], &couple));
    assert_eq!(back, classes);
}

#[test]
fn ops_rejects_bad_input() {
    let o = hadq_stdin(&["ops", "split", "--interval", "5"], "line,position\n1,7\n2,1\n");
    assert_eq!(o.status.code(), Some(2));
    assert!(!o.stderr.is_empty());
}

#[test]
fn sample_is_reproducible_and_validates_rates() {
    let a = hadq(&["sample", "--cycle", "10", "--rates", "0.5,1.0", "--seed", "2"]);
    let b = hadq(&["sample", "--cycle", "10", "--rates", "0.5,1.0", "--seed", "2"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(hadq(&["sample", "--cycle", "10", "--rates", "1.0,0.5"]).status.code(), Some(2));
    let j = hadq(&["sample", "--interval", "4", "--points", "2", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&j.stdout).unwrap();
    assert!(v.is_object());
}

#[test]
fn help_lists_defaults() {
    let o = hadq(&["shock", "--help"]);
    let text = stdout(&o);
    assert!(text.contains("[default: 1]"));
    assert!(text.contains("all-left-first-right"));
}

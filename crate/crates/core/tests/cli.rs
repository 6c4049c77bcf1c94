use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lclavg"))
}

fn run(args: &[&str]) -> (i32, String, String) {
    let o = bin().args(args).output().expect("binary runs");
    (o.status.code().unwrap_or(-1), String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

#[test]
fn gen_path_prints_tree() {
    let (code, out, _) = run(&["gen", "--family", "path", "--n", "100"]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[0], "100");
    assert_eq!(lines.len(), 100);
    assert_eq!(lines[1], "0 1");
}

#[test]
fn run_prints_json_summary() {
    let (code, out, _) = run(&["run", "--problem", "3col", "--solver", "det-avg", "--n", "65536", "--seed", "1"]);
    assert_eq!(code, 0);
    let v: serde_json::Value = serde_json::from_str(out.trim()).unwrap();
    for key in ["problem", "n", "seed", "avg_rounds", "max_rounds", "checker", "iterations", "failures"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert_eq!(v["checker"], "accept");
    assert_eq!(v["n"], 65536);
    assert!(v["avg_rounds"].as_f64().unwrap() <= v["max_rounds"].as_f64().unwrap());
}

#[test]
fn run_then_check_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.txt");
    let l = dir.path().join("l.txt");
    let (ts, ls) = (t.to_str().unwrap(), l.to_str().unwrap());
    assert_eq!(run(&["gen", "--family", "random", "--n", "300", "--seed", "4", "--out", ts]).0, 0);
    assert_eq!(run(&["run", "--tree", ts, "--solver", "rand-avg", "--seed", "4", "--out", ls]).0, 0);
    assert_eq!(run(&["check", "--tree", ts, "--labels", ls]).0, 0);
    let mut labels = fs::read_to_string(&l).unwrap();
    labels.replace_range(0..1, if labels.starts_with('1') { "2" } else { "1" });
    fs::write(&l, labels).unwrap();
    let (code, out, _) = run(&["check", "--tree", ts, "--labels", ls]);
    assert_eq!(code, 1);
    assert!(out.starts_with("reject"));
}

#[test]
fn two_half_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let t = dir.path().join("t.txt");
    let l = dir.path().join("l.txt");
    let (ts, ls) = (t.to_str().unwrap(), l.to_str().unwrap());
    assert_eq!(run(&["gen", "--family", "hier", "--n", "2000", "--out", ts]).0, 0);
    assert_eq!(run(&["run", "--problem", "2half", "--tree", ts, "--out", ls]).0, 0);
    assert_eq!(run(&["check", "--problem", "2half", "--tree", ts, "--labels", ls]).0, 0);
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(run(&["run", "--bogus"]).0, 2);
    assert_eq!(run(&["run", "--solver", "fast"]).0, 2);
    assert_eq!(run(&["run", "--problem", "2half", "--solver", "diam-oracle"]).0, 2);
    assert_eq!(run(&["run", "--ell", "0"]).0, 2);
    assert_eq!(run(&["bench", "--sizes", "20,10"]).0, 2);
    assert_eq!(run(&["check", "--tree", "/nonexistent", "--labels", "/nonexistent"]).0, 2);
}

#[test]
fn bench_plan_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let plan = dir.path().join("plan.json");
    let out = dir.path().join("out.csv");
    fs::write(
        &plan,
        format!(
            r#"{{"problem":"3col","solver":"baseline","family":"random","sizes":[50,100],"seeds":[1,2],"out":{:?}}}"#,
            out.to_str().unwrap()
        ),
    )
    .unwrap();
    assert_eq!(run(&["bench", "--plan", plan.to_str().unwrap()]).0, 0);
    let csv = fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(csv.starts_with("problem,solver,family,n,seed,avg_rounds,max_rounds,checker_ok,iterations,wall_time_ms"));
    assert_eq!(run(&["bench", "--plan", plan.to_str().unwrap()]).0, 0);
    assert_eq!(fs::read_to_string(&out).unwrap(), csv);
}

#[test]
fn decompose_dumps_trace_and_layers() {
    let (code, out, _) = run(&["decompose", "--family", "complete", "--n", "127"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("iteration,free_count,marked_count,promoted_count\n"));
    let layers = out.split("\n\n").nth(1).unwrap();
    assert_eq!(layers.lines().count(), 127);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use relay_sched::sweep::SweepRecord;
use relay_sched::verify::PropertyReport;
use relay_sched::{Schedule, TheoremReport, Verdict};
use tempfile::TempDir;

const EXAMPLE2: &str = r#"{ "n": 3,
  "source_to_relay": [1, 3, 5],
  "relay_to_dest":  [6, 5, 3],
  "relay_to_relay": [[0,3,4],[4,0,3],[2,5,0]] }"#;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_relay-sched"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let p = dir.path().join(name);
    fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn check_example2_holds() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["check", s(&net)]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("det P = 280"), "{text}");
    assert!(text.contains("t* = 143/35"));
    assert!(text.contains("ConditionsHold"));
}

#[test]
fn check_json_round_trips() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["--json", "check", s(&net)]);
    assert_eq!(o.status.code(), Some(0));
    let rep: TheoremReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep.verdict, Verdict::ConditionsHold);
    assert_eq!(rep.pmatrix.det.to_string(), "280");
    assert_eq!(serde_json::to_value(&rep).unwrap(), serde_json::from_slice::<serde_json::Value>(&o.stdout).unwrap());
}

#[test]
fn malformed_input_exits_2_without_output() {
    let dir = TempDir::new().unwrap();
    for (name, text) in [
        ("zero.json", r#"{"n": 0, "source_to_relay": [], "relay_to_dest": [], "relay_to_relay": []}"#),
        ("garbage.json", "not json"),
        ("selflink.json", r#"{"n": 1, "source_to_relay": [1], "relay_to_dest": [1], "relay_to_relay": [[2]]}"#),
    ] {
        let net = write(&dir, name, text);
        for cmd in ["check", "capacity", "schedule", "verify"] {
            let o = run(&[cmd, s(&net)]);
            assert_eq!(o.status.code(), Some(2), "{cmd} {name}");
            assert!(o.stdout.is_empty(), "{cmd} {name} printed partial output");
            assert!(!o.stderr.is_empty());
        }
    }
    let o = run(&["check", "/nonexistent/network.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn parse_error_names_the_field() {
    let dir = TempDir::new().unwrap();
    let net = write(
        &dir,
        "neg.json",
        r#"{"n": 2, "source_to_relay": [1, -3], "relay_to_dest": [1, 1], "relay_to_relay": [[0,0],[0,0]]}"#,
    );
    let o = run(&["check", s(&net)]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8(o.stderr).unwrap();
    assert!(err.contains("source_to_relay[1]"), "{err}");
}

#[test]
fn singular_network_is_inconclusive() {
    let dir = TempDir::new().unwrap();
    // ℓ_1s = ℓ_0s = 0 and relay 1 cannot reach the destination
    let net = write(
        &dir,
        "singular.json",
        r#"{"n": 2, "source_to_relay": [0, 4], "relay_to_dest": [0, 3], "relay_to_relay": [[0,0],[0,0]]}"#,
    );
    let o = run(&["check", s(&net)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("LP oracle: C^LD = "));
}

#[test]
fn failing_conditions_exit_1() {
    let dir = TempDir::new().unwrap();
    let net = dir.path().join("gen.json");
    let g = run(&["gen", "--n", "2", "--max-cap", "5", "--seed", "1", "--out", s(&net)]);
    assert_eq!(g.status.code(), Some(0));
    let o = run(&["--json", "check", s(&net)]);
    let rep: TheoremReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(rep.verdict, Verdict::ConditionsFail);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn capacity_closed_form_and_oracle_agree() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let a = run(&["capacity", s(&net)]);
    let b = run(&["--oracle", "capacity", s(&net)]);
    assert_eq!(stdout(&a), "C^LD = 143/35 (closed-form)\n");
    assert_eq!(stdout(&b), "C^LD = 143/35 (lp)\n");
    let f = run(&["--float", "capacity", s(&net)]);
    assert!(stdout(&f).contains("143/35 (~4.085714)"));
}

#[test]
fn capacity_small_cases() {
    let dir = TempDir::new().unwrap();
    let one = write(
        &dir,
        "one.json",
        r#"{"n": 1, "source_to_relay": [2], "relay_to_dest": [2], "relay_to_relay": [[0]]}"#,
    );
    assert_eq!(stdout(&run(&["capacity", s(&one)])), "C^LD = 1/1 (closed-form)\n");
    let zero = write(
        &dir,
        "zero.json",
        r#"{"n": 2, "source_to_relay": [0, 0], "relay_to_dest": [0, 0], "relay_to_relay": [[0,0],[0,0]]}"#,
    );
    let o = run(&["--json", "capacity", s(&zero)]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["value"], "0/1");
}

#[test]
fn schedule_json_parses_back() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["--json", "schedule", s(&net)]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let sched: Schedule = serde_json::from_value(v["schedule"].clone()).unwrap();
    assert_eq!(sched.lambdas.len(), 4);
    assert_eq!(v["method"], "closed-form");
    let text = stdout(&run(&["schedule", s(&net)]));
    assert!(text.contains("{3}  16/35"), "{text}");
}

#[test]
fn receive_mode_flag() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["--dual", "--json", "check", s(&net)]);
    let rep: TheoremReport = serde_json::from_slice(&o.stdout).unwrap();
    let expected = match rep.verdict {
        Verdict::ConditionsHold => 0,
        Verdict::ConditionsFail => 1,
        Verdict::Inconclusive => 3,
    };
    assert_eq!(o.status.code(), Some(expected));
    // whatever the verdict, the capacity reported stays the oracle value
    assert_eq!(stdout(&run(&["--dual", "capacity", s(&net)])).split(' ').nth(2), Some("143/35"));
}

#[test]
fn verify_examples_pass() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["verify", s(&net)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let gen = dir.path().join("n4.json");
    run(&["gen", "--n", "4", "--max-cap", "8", "--seed", "42", "--out", s(&gen)]);
    let o = run(&["--json", "verify", s(&gen)]);
    assert_eq!(o.status.code(), Some(0));
    let rep: PropertyReport = serde_json::from_slice(&o.stdout).unwrap();
    assert!(rep.all_pass());
}

#[test]
fn rank_example1_layout() {
    let dir = TempDir::new().unwrap();
    let net = write(&dir, "ex2.json", EXAMPLE2);
    let o = run(&["rank", s(&net), "--omega", "3", "--state", "2,3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("row blocks: d,1; column blocks: s,3"), "{text}");
    assert!(text.contains("rank = 4"));
    let grid: Vec<&str> = text.lines().filter(|l| l.chars().all(|c| c == '0' || c == '1')).collect();
    assert_eq!(grid.len(), 12);
    assert!(grid.iter().all(|l| l.len() == 12));

    let o = run(&["rank", s(&net), "--omega", "", "--state", ""]);
    assert!(stdout(&o).contains("rank = 5"));
    let o = run(&["rank", s(&net), "--omega", "4"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn gen_then_check_round_trip() {
    let dir = TempDir::new().unwrap();
    let g = run(&["gen", "--n", "3", "--max-cap", "6", "--seed", "9"]);
    assert_eq!(g.status.code(), Some(0));
    let net = write(&dir, "g.json", &stdout(&g));
    let o = run(&["check", s(&net)]);
    assert!(matches!(o.status.code(), Some(0 | 1 | 3)));
    assert_eq!(stdout(&run(&["gen", "--n", "3", "--max-cap", "6", "--seed", "9"])), stdout(&g));
}

#[test]
fn sweep_records_match_and_are_deterministic() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("n2.jsonl");
    let o = run(&["sweep", "--n", "2", "--max-cap", "5", "--count", "1000", "--seed", "1", "--out", s(&out)]);
    assert_eq!(o.status.code(), Some(0));
    let text = fs::read_to_string(&out).unwrap();
    let records: Vec<SweepRecord> = text.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(records.len(), 1000);
    assert!(records.iter().any(|r| r.verdict == Verdict::ConditionsHold));
    for (i, r) in records.iter().enumerate() {
        assert_eq!(r.index, i);
        assert_eq!(r.matches.is_some(), r.verdict == Verdict::ConditionsHold);
        assert_ne!(r.matches, Some(false));
    }

    let again = dir.path().join("again.jsonl");
    let o = bin()
        .args(["sweep", "--n", "2", "--max-cap", "5", "--count", "1000", "--seed", "1", "--out", s(&again)])
        .env("RELAY_SCHED_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(fs::read(&out).unwrap(), fs::read(&again).unwrap());
}

#[test]
fn sweep_zero_capacity_csv() {
    let o = run(&["sweep", "--n", "3", "--max-cap", "0", "--count", "10"]);
    assert_eq!(o.status.code(), Some(0));
    let mut rdr = csv::Reader::from_reader(o.stdout.as_slice());
    let headers = rdr.headers().unwrap().clone();
    let col = headers.iter().position(|h| h == "c_ld").unwrap();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    assert!(rows.iter().all(|r| &r[col] == "0/1"));
    assert_eq!(run(&["sweep", "--n", "3", "--max-cap", "0", "--count", "10"]).stdout, o.stdout);
}

#[test]
fn sweep_rejects_bad_parameters() {
    assert_eq!(run(&["sweep", "--n", "11", "--count", "1"]).status.code(), Some(2));
    let o = bin()
        .args(["sweep", "--n", "2", "--count", "1"])
        .env("RELAY_SCHED_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(o.stdout.is_empty());
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use p300_core::swlda::{read_scored_subject, write_raw_subject};
use p300_core::synthetic::raw_epochs;

const SEED_TEXT: &str = include_str!("../../core/tests/fixtures/seed_text.txt");

fn p300sim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_p300sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

/// Corpus, passage and a directory of synthetic subjects.
fn workspace(dir: &Path, subjects: &str) {
    fs::write(dir.join("corpus.txt"), SEED_TEXT).unwrap();
    fs::write(dir.join("passage.txt"), "the old house stood at the end of the lane").unwrap();
    let out = p300sim(&["synth", "--out", &s(&dir.join("subjects")), "--subjects", subjects, "--d-prime", "2.5", "--seed", "4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn s(p: &Path) -> String {
    p.to_str().unwrap().to_string()
}

fn run_args(dir: &Path) -> Vec<String> {
    vec![
        "run".into(),
        "--corpus".into(),
        s(&dir.join("corpus.txt")),
        "--passage".into(),
        s(&dir.join("passage.txt")),
        "--subjects".into(),
        s(&dir.join("subjects")),
        "--scheme".into(),
        "random,diagonal,word_bound".into(),
        "--seed".into(),
        "7".into(),
    ]
}

fn run_to(dir: &Path, name: &str) -> (i32, String) {
    let mut args = run_args(dir);
    let out_path = dir.join(name);
    args.extend(["--out".into(), s(&out_path)]);
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = p300sim(&refs);
    (code(&out), fs::read_to_string(out_path).unwrap_or_default())
}

#[test]
fn synth_then_run_writes_rows_and_summaries() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "3");
    let (rc, csv) = run_to(dir.path(), "results.csv");
    assert_eq!(rc, 0);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines.len(), 1 + 9 + 3);
    assert!(lines[0].starts_with("subject,scheme,"));
    assert_eq!(lines.iter().filter(|l| l.starts_with("summary,")).count(), 3);
}

#[test]
fn runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "2");
    let (_, a) = run_to(dir.path(), "a.csv");
    let (_, b) = run_to(dir.path(), "b.csv");
    assert!(!a.is_empty());
    assert_eq!(a, b);
}

#[test]
fn results_go_to_stdout_without_out() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "1");
    let args = run_args(dir.path());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = p300sim(&refs);
    assert_eq!(code(&out), 0);
    assert!(String::from_utf8(out.stdout).unwrap().starts_with("subject,scheme,"));
}

#[test]
fn bad_configuration_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "1");
    let mut args = run_args(dir.path());
    args[8] = "telepathy".into();
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    assert_eq!(code(&p300sim(&refs)), 2);

    assert_eq!(code(&p300sim(&["run", "--scheme", "random"])), 2);
    assert_eq!(code(&p300sim(&["synth", "--out", &s(dir.path()), "--subjects", "0"])), 2);
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "p_thresh = 2\n").unwrap();
    assert_eq!(code(&p300sim(&["run", "--config", &s(&cfg)])), 2);
}

#[test]
fn missing_data_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "1");
    fs::remove_file(dir.path().join("corpus.txt")).unwrap();
    let args = run_args(dir.path());
    let refs: Vec<&str> = args.iter().map(String::as_str).collect();
    let out = p300sim(&refs);
    assert_eq!(code(&out), 3);
    assert!(String::from_utf8_lossy(&out.stderr).contains("corpus"));
}

#[test]
fn a_broken_subject_exits_4_with_the_rest_reported() {
    let dir = tempfile::tempdir().unwrap();
    workspace(dir.path(), "2");
    fs::write(dir.path().join("subjects").join("zz.csv"), "garbage\n").unwrap();
    let (rc, csv) = run_to(dir.path(), "results.csv");
    assert_eq!(rc, 4);
    assert_eq!(csv.lines().filter(|l| l.starts_with("zz,") && l.contains(",failed,")).count(), 3);
    assert_eq!(csv.lines().filter(|l| l.starts_with("synth")).count(), 6);
}

#[test]
fn score_writes_one_file_per_subject() {
    let dir = tempfile::tempdir().unwrap();
    let raw = dir.path().join("raw");
    fs::create_dir(&raw).unwrap();
    for (i, id) in ["s1", "s2"].iter().enumerate() {
        write_raw_subject(&raw.join(format!("{id}.csv")), id, raw_epochs(3, 24, 0.8, i as u64)).unwrap();
    }
    let out = dir.path().join("scored");
    for cv in ["wscv", "ascv"] {
        let o = p300sim(&["score", "--raw", &s(&raw), "--cv", cv, "--out", &s(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        for id in ["s1", "s2"] {
            let scored = read_scored_subject(&out.join(cv).join(format!("{id}.csv"))).unwrap();
            assert_eq!(scored.id, id);
            assert_eq!(scored.epochs.len(), 3 * 24);
        }
    }
    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    assert_eq!(code(&p300sim(&["score", "--raw", &s(&empty), "--out", &s(&out)])), 3);
    assert_eq!(code(&p300sim(&["score", "--raw", &s(&raw), "--cv", "loo", "--out", &s(&out)])), 2);
}

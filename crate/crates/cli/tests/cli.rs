use std::collections::BTreeSet;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn quadnil(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quadnil"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("QUADNIL_LEVEL")
        .env_remove("QUADNIL_FORMAT")
        .output()
        .expect("run quadnil")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stats_rows(dir: &Path) -> Vec<Vec<String>> {
    let text = fs::read_to_string(dir.join("stats.csv")).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn build_level_one_is_a_single_tile() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["build", "--level", "1", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = stats_rows(d.path());
    assert_eq!(rows.len(), 1);
    assert_eq!(rows[0][1..4], ["4", "4", "1"]);
    assert!(d.path().join("k1.dump").exists());
}

#[test]
fn build_level_three_has_36_faces() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["build", "--level", "3", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let rows = stats_rows(d.path());
    assert_eq!(rows[2][0], "3");
    assert_eq!(rows[2][3], "36");
    for n in 1..=3 {
        assert!(d.path().join(format!("k{n}.dump")).exists());
    }
}

#[test]
fn build_level_five_matches_golden_stats() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["build", "--level", "5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let got = fs::read(d.path().join("stats.csv")).unwrap();
    assert_eq!(got, include_bytes!("golden/stats_k5.csv"));
}

#[test]
fn build_is_byte_identical_across_runs() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    for d in [&a, &b] {
        assert_eq!(code(&quadnil(d.path(), &["build", "--level", "4"])), 0);
    }
    for f in ["k4.dump", "stats.json"] {
        assert_eq!(
            fs::read(a.path().join(f)).unwrap(),
            fs::read(b.path().join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn cap_exceeded_fails_with_partial_stats() {
    let d = TempDir::new().unwrap();
    let o = quadnil(
        d.path(),
        &[
            "build",
            "--level",
            "3",
            "--max-vertices",
            "20",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&o), 1);
    assert_eq!(stats_rows(d.path()).len(), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("cap"));
}

#[test]
fn config_errors_exit_3() {
    let d = TempDir::new().unwrap();
    let missing = d.path().join("missing.scheme");
    let bad = d.path().join("bad.scheme");
    fs::write(&bad, "nodes NW NE\n").unwrap();
    let cases: Vec<Vec<&str>> = vec![
        vec!["build", "--level", "0"],
        vec!["build", "--depth-clip", "0"],
        vec!["build", "--bogus"],
        vec!["build", "--format", "xml"],
        vec!["build", "--scheme", missing.to_str().unwrap()],
        vec!["build", "--scheme", bad.to_str().unwrap()],
        vec!["verify", "nil10", "--level", "2"],
        vec!["frobnicate"],
    ];
    for args in cases {
        assert_eq!(code(&quadnil(d.path(), &args)), 3, "{args:?}");
    }
}

#[test]
fn help_exits_cleanly() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&quadnil(d.path(), &["--help"])), 0);
}

#[test]
fn env_overrides_flags() {
    let d = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_quadnil"))
        .arg("build")
        .env("QUADNIL_LEVEL", "2")
        .env("QUADNIL_FORMAT", "csv")
        .env("QUADNIL_OUT", d.path())
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
    assert_eq!(stats_rows(d.path()).len(), 2);
}

fn section(text: &str, name: &str) -> Vec<String> {
    text.lines()
        .skip_while(|l| *l != name)
        .skip(1)
        .take_while(|l| !l.chars().all(|c| c.is_ascii_uppercase()))
        .map(str::to_string)
        .collect()
}

#[test]
fn present_writes_length_seven_relations() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["present", "--level", "3"]);
    assert_eq!(code(&o), 0);
    let text = fs::read_to_string(d.path().join("presentation.txt")).unwrap();
    let equiv = section(&text, "EQUIV");
    assert!(!equiv.is_empty());
    for line in equiv {
        let rel = line.split(" ; ").next().unwrap();
        let (a, b) = rel.split_once(" = ").unwrap();
        assert_eq!(a.split_whitespace().count(), 7, "{line}");
        assert_eq!(b.split_whitespace().count(), 7, "{line}");
    }
    assert!(d.path().join("coloring.txt").exists());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("colors N"));
    assert!(stdout.contains("equivalences"));
}

#[test]
fn alphabet_grows_monotonically() {
    let (a, b) = (TempDir::new().unwrap(), TempDir::new().unwrap());
    assert_eq!(code(&quadnil(a.path(), &["present", "--level", "2"])), 0);
    assert_eq!(code(&quadnil(b.path(), &["present", "--level", "3"])), 0);
    let letters = |d: &TempDir| -> BTreeSet<String> {
        let text = fs::read_to_string(d.path().join("presentation.txt")).unwrap();
        section(&text, "ALPHABET").into_iter().collect()
    };
    let (small, big) = (letters(&a), letters(&b));
    assert!(!small.is_empty());
    assert!(small.is_subset(&big));
}

#[test]
fn present_level_five_matches_golden_counts() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["present", "--level", "5", "--format", "csv"]);
    assert_eq!(code(&o), 0);
    let got = fs::read(d.path().join("present.csv")).unwrap();
    assert_eq!(got, include_bytes!("golden/present_k5.csv"));
}

#[test]
fn determinism_suite_passes_after_present() {
    let d = TempDir::new().unwrap();
    assert_eq!(code(&quadnil(d.path(), &["present", "--level", "4"])), 0);
    let o = quadnil(d.path(), &["verify", "determinism", "--level", "4"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(d.path().join("verify-determinism.json")).unwrap())
            .unwrap();
    assert_eq!(report["suite"], "determinism");
}

#[test]
fn shortest_survive_on_k5_has_no_zero_verdict() {
    let d = TempDir::new().unwrap();
    let o = quadnil(d.path(), &["verify", "shortest-survive", "--level", "5"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let report: serde_json::Value =
        serde_json::from_slice(&fs::read(d.path().join("verify-shortest-survive.json")).unwrap())
            .unwrap();
    let first = &report["assertions"][0];
    assert_eq!(first["status"], "Pass");
    assert!(first["detail"].as_str().unwrap().starts_with("0 of 100"));
}

#[test]
fn budget_exhaustion_exits_2() {
    let d = TempDir::new().unwrap();
    let o = quadnil(
        d.path(),
        &[
            "verify",
            "shortest-survive",
            "--level",
            "4",
            "--samples",
            "5",
            "--budget-visited",
            "2",
        ],
    );
    assert_eq!(code(&o), 2, "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn logical_failure_exits_1() {
    // Closed walks on K_3 include powers that never reach zero.
    let d = TempDir::new().unwrap();
    let o = quadnil(
        d.path(),
        &[
            "verify",
            "nil9",
            "--level",
            "3",
            "--max-cycle",
            "4",
            "--format",
            "csv",
        ],
    );
    assert_eq!(code(&o), 1);
    let text = fs::read_to_string(d.path().join("verify-nil9.csv")).unwrap();
    assert!(text.starts_with("suite,assertion,hard,status,detail"));
    assert!(text.contains("nil9,\"closed walk words, 9th power is zero\",true,Fail,"));
}

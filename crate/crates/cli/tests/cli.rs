use std::path::PathBuf;
use std::process::{Command, Output};

use erasing_dyn::catalog::sigma3;
use erasing_dyn::classifier::{classify, Budget, ClassificationReport};
use erasing_dyn::Exec;

fn sub(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "substitutions", &format!("{name}.sub")]
        .iter()
        .collect();
    p.display().to_string()
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_erasing-dyn"))
        .args(args)
        .env_remove("ERASING_DYN_BUDGET_L")
        .output()
        .expect("binary runs")
}

fn stdout(args: &[&str]) -> String {
    let out = cli(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

#[test]
fn classify_reports() {
    let s4 = stdout(&["classify", &sub("sigma4")]);
    assert!(s4.contains("oc: No (witness: 1)"), "{s4}");
    assert!(s4.contains("boundedly: Yes"));
    let s1 = stdout(&["classify", &sub("sigma1")]);
    let labels: Vec<&str> = s1.lines().map(|l| l.split_whitespace().nth(1).unwrap()).collect();
    assert_eq!(labels, ["Yes", "No", "No", "No"]);
}

#[test]
fn parse_errors_exit_with_two() {
    let dir = std::env::temp_dir().join(format!("erasing-dyn-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let missing = dir.join("missing.sub");
    std::fs::write(&missing, "k = 2\n00 -> -\n01 -> 1\n").unwrap();
    let out = cli(&["classify", missing.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("block 10 is missing"));
    let bad = dir.join("bad.sub");
    std::fs::write(&bad, "k = 2\n00 -> -\n0x -> 1\n").unwrap();
    let out = cli(&["classify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
    assert_eq!(cli(&["eval", &sub("sigma3"), "4/3"]).status.code(), Some(2));
}

#[test]
fn documented_examples() {
    let o = stdout(&["orbit", &sub("sigma3"), "1", "-n", "4"]);
    assert_eq!(o.lines().next(), Some("1, 1/3, 1, 1/3, 1"));
    let e = stdout(&["entropy", &sub("sigma3"), "-k", "2"]);
    assert!(e.starts_with("F(2)=4, bound = 2·log2/4"), "{e}");
    let v = stdout(&["eval", &sub("sigma2"), "1/3"]);
    assert!(v.contains("f(x) = 0 (x̃ = w_ε^∞)"), "{v}");
    assert!(v.contains("x = 1/3 = 0b0.(01)"));
}

#[test]
fn witnesses_report_verification() {
    for args in [
        vec!["preimage", "sigma3", "2/7"],
        vec!["sensitivity", "sigma3", "1/3", "--delta-bits", "10"],
        vec!["mixing", "sigma3", "11", "1/2"],
        vec!["separated", "sigma3", "-k", "2", "-n", "1"],
    ] {
        let out = stdout(&args);
        assert!(out.contains("verified: yes"), "{args:?}: {out}");
        assert!(!out.contains("NO"), "{args:?}: {out}");
    }
    let p = stdout(&["periodic", "sigma3", "01", "--stages", "20"]);
    assert!(p.starts_with("period 3"));
    assert_eq!(p.matches("  yes  ").count(), 20);
    let s = stdout(&["scrambled", "sigma3", "--stages", "4"]);
    assert_eq!(s.lines().filter(|l| l.ends_with("yes")).count(), 8);
}

#[test]
fn json_report_round_trips() {
    let text = stdout(&["--json", "classify", &sub("sigma3")]);
    let parsed = ClassificationReport::from_json(&text).unwrap();
    assert_eq!(parsed, classify(&sigma3(), &Budget::default(), Exec::Sequential));
    let v: serde_json::Value = serde_json::from_str(&stdout(&["--json", "eval", "sigma3", "1"])).unwrap();
    assert_eq!(v["f"], "1/3");
}

#[test]
fn output_is_deterministic() {
    let a = stdout(&["--seed", "9", "fiber", "sigma3", "1/3", "--count", "6"]);
    let b = stdout(&["--seed", "9", "fiber", "sigma3", "1/3", "--count", "6"]);
    assert_eq!(a, b);
    let seq = stdout(&["--jobs", "1", "separated", "sigma3", "-n", "2", "--export"]);
    let par = stdout(&["separated", "sigma3", "-n", "2", "--export"]);
    assert_eq!(seq, par);
    assert_eq!(seq.lines().count(), 64);
}

#[test]
fn budget_from_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_erasing-dyn"))
        .args(["classify", "sigma3"])
        .env("ERASING_DYN_BUDGET_L", "6")
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("completely: YesBounded(6)"), "{text}");
}

#[test]
fn oracle_constants_match_the_frozen_file() {
    let frozen: PathBuf = [env!("CARGO_MANIFEST_DIR"), "..", "core", "tests", "data", "derived_constants.txt"]
        .iter()
        .collect();
    let out = stdout(&["oracle", "--check", frozen.to_str().unwrap()]);
    assert!(out.contains("constants match"));
}

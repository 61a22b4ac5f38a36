use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use greedylab::fundfn::democracy_constant;
use greedylab::spaces::SpaceDocument;
use greedylab::Caps;
use serde_json::Value;
use tempfile::TempDir;

fn greedylab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_greedylab"))
        .args(args)
        .env_remove("GREEDYLAB_THREADS")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn analyze_lp_reports_democratic_basis() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "lp.json", r#"{"variant": "lp", "p": 2}"#);
    let out = dir.path().join("report.json");
    let run = greedylab(&[
        "analyze",
        "--space",
        s(&space),
        "--dim",
        "8",
        "--samples",
        "200",
        "--refinements",
        "50",
        "--out",
        s(&out),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["all_pass"], Value::Bool(true));
    let source = &report["entries"][0]["report"];
    assert_eq!(source["dim"], 8);
    assert!((source["democracy"].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn analyze_is_deterministic_and_writes_csv() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "ts.json", r#"{"variant": "tsirelson", "dim": 6}"#);
    let mut outputs = Vec::new();
    for name in ["a.csv", "b.csv"] {
        let out = dir.path().join(name);
        let run = greedylab(&[
            "analyze",
            "--space",
            s(&space),
            "--samples",
            "100",
            "--refinements",
            "30",
            "--seed",
            "7",
            "--format",
            "csv",
            "--out",
            s(&out),
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let text = String::from_utf8(outputs.remove(0)).unwrap();
    assert!(text.starts_with("id,space,value,bound,pass\n"));
}

#[test]
fn bad_spec_exits_one_without_output() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "bad.json", r#"{"variant": "banach"}"#);
    let out = dir.path().join("report.json");
    let run = greedylab(&["analyze", "--space", s(&space), "--out", s(&out)]);
    assert_eq!(run.status.code(), Some(1));
    assert!(!out.exists());
    let missing = greedylab(&["analyze", "--space", s(&dir.path().join("nope.json"))]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn exceeded_cap_is_named() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "lp.json", r#"{"variant": "lp", "p": 1}"#);
    let run = greedylab(&["analyze", "--space", s(&space), "--dim", "12", "--cap-enum", "10"]);
    assert_eq!(run.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&run.stderr).contains("cap"));
}

#[test]
fn bidemocratic_renorm_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "lp.json", r#"{"variant": "lp", "p": 3}"#);
    let mut outputs = Vec::new();
    for name in ["a.json", "b.json"] {
        let out = dir.path().join(name);
        let run = greedylab(&[
            "renorm",
            "bidemocratic",
            "--space",
            s(&space),
            "--dim",
            "5",
            "--out",
            s(&out),
        ]);
        assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
        outputs.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
    let doc = SpaceDocument::parse(std::str::from_utf8(&outputs[0]).unwrap()).unwrap();
    assert!(doc.provenance.is_some());
}

#[test]
fn democratic_renorm_of_tsirelson() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "ts.json", r#"{"variant": "tsirelson"}"#);
    let out = dir.path().join("flat.json");
    let run = greedylab(&[
        "renorm",
        "democratic",
        "--space",
        s(&space),
        "--dim",
        "8",
        "--eps",
        "1",
        "--out",
        s(&out),
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stderr).contains("after"));
    let doc = SpaceDocument::parse(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let caps = Caps::default();
    let renormed = doc.space.build(&caps).unwrap();
    assert!(democracy_constant(&renormed, &caps).unwrap() <= 2.0 + 1e-9);
}

#[test]
fn infeasible_greedy_renorm_exits_two() {
    let dir = TempDir::new().unwrap();
    let space = write(dir.path(), "lp.json", r#"{"variant": "lp", "p": 2}"#);
    let out = dir.path().join("out.json");
    let run = greedylab(&[
        "renorm",
        "greedy",
        "--space",
        s(&space),
        "--eps",
        "0.01",
        "--dim",
        "6",
        "--out",
        s(&out),
    ]);
    assert_eq!(run.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&run.stderr).contains("n0 exceeds dimension"));
    assert!(!out.exists());
}

#[test]
fn fundfn_tables() {
    let run = greedylab(&["fundfn", "delta", "--formula", "sqrt", "--cap", "100000", "--m", "4"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[0], "4");
    assert!((row[1].parse::<f64>().unwrap() - 0.5).abs() < 1e-6);

    let dir = TempDir::new().unwrap();
    let samples = write(dir.path(), "s.json", "[1, 1.2, 1.8]");
    let run = greedylab(&["fundfn", "envelope", "--samples", s(&samples)]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert_eq!(text.lines().nth(2), Some("2,1.2,1.4"));

    let run = greedylab(&["fundfn", "alternating", "--breakpoints", "1,10,100,1000"]);
    assert_eq!(run.status.code(), Some(0));
    let text = String::from_utf8(run.stdout).unwrap();
    assert!(text.starts_with("x,phi,lambda\n"));
    assert!(text.lines().count() > 10);
}

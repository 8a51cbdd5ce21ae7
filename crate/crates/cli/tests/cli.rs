use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const SCRIPT: &str = r#"{"n": 2, "ops": [
  {"letter": "[0,2]", "lo": "bottom", "hi": "top"},
  {"letter": "[1]", "lo": 0, "hi": 2}
]}"#;

fn psn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psn"))
        .args(args)
        .output()
        .unwrap()
}

fn psn_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_psn"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone())
        .unwrap()
        .trim_end()
        .to_string()
}

fn script_file() -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(SCRIPT.as_bytes()).unwrap();
    f
}

#[test]
fn word_commands() {
    let o = psn(&["reduce", "--n", "3", "[0].[2,3].[0,1]"]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "[2,3].[0,1]");
    assert_eq!(
        stdout(&psn(&["stab", "--right", "--n", "2", "[0,1].[1,2]"])),
        "{1,2}"
    );
    assert_eq!(stdout(&psn(&["nf", "--n", "3", "[3].[0]"])), "[0].[3]");
    assert_eq!(
        stdout(&psn(&["product", "--n", "2", "[0,1]", "[0]"])),
        "[0,1]"
    );
    assert_eq!(
        stdout(&psn(&["inverse", "--n", "3", "[0,1].[1,3]"])),
        "[1,3].[0,1]"
    );
    assert_eq!(
        stdout(&psn(&["rank", "--n", "3", "[0,1].[1,3]"]))
            .lines()
            .next(),
        Some("ord w^2+w")
    );
    let strong = stdout(&psn(&[
        "strong",
        "--n",
        "2",
        "--split-len",
        "2",
        "[0,1].[1,2].[1,2].[0,1].[1,2]",
    ]));
    assert!(strong.lines().any(|l| l == "[0,1].[1,2]"));
}

#[test]
fn decompose_reports_parts() {
    let o = psn(&["decompose", "--n", "3", "--json", "[2].[0,1]", "[0].[3]"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["u1"], "[2].[0,1]");
    assert_eq!(v["v'"], "[0]");
    assert_eq!(v["v1"], "[3]");
    assert_eq!(v["reduct"], "[2].[0,1].[3]");
}

#[test]
fn exit_codes() {
    let o = psn(&["reduce", "--n", "2", "[0,5]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("letter-out-of-range"));
    let o = psn(&["reduce", "--n", "2", "--json", "[0,5]"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["error"], "letter-out-of-range");
    assert_eq!(psn(&["reduce", "[0]"]).status.code(), Some(2));
    assert_eq!(psn(&["nonsense"]).status.code(), Some(2));
    assert_eq!(psn(&["verify", "--suite", "nope"]).status.code(), Some(1));
}

#[test]
fn verify_suites() {
    let o = psn(&["verify", "--suite", "ample", "--n", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let o = psn(&[
        "verify",
        "--suite",
        "words-confluence",
        "--cases",
        "50",
        "--seed",
        "7",
        "--json",
    ]);
    assert!(o.status.success());
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["pass"], true);
    assert_eq!(v["cases_run"], 50);
}

#[test]
fn build_then_dot_is_deterministic() {
    let f = script_file();
    let path = f.path().to_str().unwrap();
    let built = stdout(&psn(&["build", path]));
    let a = stdout(&psn_stdin(&["export-dot", "-"], &built));
    let b = stdout(&psn_stdin(&["export-dot", "-"], &built));
    assert_eq!(a, b);
    assert!(a.starts_with("graph space {"));
    assert!(a.contains("v0 -- v3;"));
    assert_eq!(stdout(&psn(&["export-dot", path])), a);
}

#[test]
fn flag_commands() {
    let f = script_file();
    let path = f.path().to_str().unwrap();
    assert_eq!(stdout(&psn(&["flags", path])), "0: [0,1,2]\n1: [0,3,2]");
    assert_eq!(
        stdout(&psn(&["word", path, "0", "[0,3,2]"])).lines().next(),
        Some("[1]")
    );
    assert_eq!(stdout(&psn(&["indep", path, "0", "0", "1"])), "true");
    assert_eq!(
        stdout(&psn(&["basepoint", path, "1", "--set", "0,1,2"])),
        "[0,1,2] [1]"
    );
    assert_eq!(
        stdout(&psn(&["canbase", path, "1", "--set", "[0,1,2]"])),
        "[0,1,2] mod {1}"
    );
    let o = psn(&["word", path, "0", "7"]);
    assert_eq!(o.status.code(), Some(1));
    let o = psn(&["flags", path, "--n", "3"]);
    assert!(String::from_utf8_lossy(&o.stderr).contains("dimension-mismatch"));
}

#[test]
fn realize_extends_the_space() {
    let f = script_file();
    let path = f.path().to_str().unwrap();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.json");
    let o = psn(&[
        "realize",
        path,
        "[0,1,2]",
        "[0,1]",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "[4,5,2]");
    let w = psn(&[
        "word",
        out.to_str().unwrap(),
        "[4,5,2]",
        "[0,1,2]",
        "--json",
    ]);
    let v: Value = serde_json::from_slice(&w.stdout).unwrap();
    assert_eq!(v["word"], "[0,1]");
    assert_eq!(v["reduced"], true);
}

//! End-to-end tests of the `hcouple` binary, including every transcript in
//! `docs/cli.md`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn hcouple(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hcouple")).args(args).current_dir(root()).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8")
}

/// Splits a command line on spaces, honouring single quotes.
fn words(line: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut quoted = false;
    let mut any = false;
    for ch in line.chars() {
        match ch {
            '\'' => {
                quoted = !quoted;
                any = true;
            }
            ' ' if !quoted => {
                if any {
                    out.push(std::mem::take(&mut cur));
                    any = false;
                }
            }
            c => {
                cur.push(c);
                any = true;
            }
        }
    }
    if any {
        out.push(cur);
    }
    out
}

/// `(command line, expected stdout)` for each `$ hcouple` line of the
/// console blocks.
fn transcripts(doc: &str) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = Vec::new();
    let mut inside = false;
    for line in doc.lines() {
        if line.starts_with("```") {
            inside = line == "```console";
            continue;
        }
        if !inside {
            continue;
        }
        if let Some(cmd) = line.strip_prefix("$ ") {
            out.push((cmd.to_string(), String::new()));
        } else if let Some((_, expected)) = out.last_mut() {
            expected.push_str(line);
            expected.push('\n');
        }
    }
    out
}

#[test]
fn documented_transcripts_hold() {
    let doc = fs::read_to_string(root().join("docs/cli.md")).expect("docs/cli.md exists");
    let ts = transcripts(&doc);
    assert!(ts.len() >= 15, "only {} transcripts", ts.len());
    for (cmd, expected) in ts {
        let w = words(&cmd);
        assert_eq!(w[0], "hcouple");
        let args: Vec<&str> = w[1..].iter().map(String::as_str).collect();
        let o = hcouple(&args);
        assert_eq!(o.status.code(), Some(0), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), expected, "{cmd}");
    }
}

#[test]
fn exit_codes() {
    assert_eq!(hcouple(&["validate", "no/such/file.json"]).status.code(), Some(2));
    assert_eq!(hcouple(&["model", "integrate", "--model", "p1", "b1"]).status.code(), Some(1));
    assert_eq!(hcouple(&["extend", "crates/core/fixtures/p1.json", "remove-gap"]).status.code(), Some(1));
    assert_eq!(hcouple(&["closure", "integrate", "--seed-file", "crates/core/fixtures/p1.json", "--gamma", "b1 + b1 +"]).status.code(), Some(2));
    assert_eq!(hcouple(&["fuzz"]).status.code(), Some(2));
    assert_eq!(hcouple(&["model", "psi", "--model", "reals", "x"]).status.code(), Some(2));
}

#[test]
fn version_reports_the_format() {
    let o = hcouple(&["--version"]);
    assert_eq!(stdout(&o).trim(), format!("hcouple {} (format {})", env!("CARGO_PKG_VERSION"), hcouple::format::FORMAT_VERSION));
}

#[test]
fn invalid_presentation_is_a_domain_error() {
    let dir = std::env::temp_dir().join(format!("hcouple-cli-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    // Two classes with psi-values b1 and 2*b1 break AC3.
    let bad = r#"{"version":1,"scalars":"Q","basis":["b1","b2"],
        "psi":{"b1":[["b1","1"]],"b2":[["b1","2"]]},"unit":[["b1","1"]],"cut":"psidown"}"#;
    let path = dir.join("bad.json");
    fs::write(&path, bad).unwrap();
    let o = hcouple(&["validate", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("is not below [b1]"), "{}", stdout(&o));
}

#[test]
fn replay_is_byte_identical() {
    let dir = std::env::temp_dir().join(format!("hcouple-replay-{}", std::process::id()));
    fs::create_dir_all(&dir).unwrap();
    let h1 = dir.join("h1.json");
    let h2 = dir.join("h2.json");
    let seed = "crates/core/fixtures/p1.json";
    let o = hcouple(&["closure", "integrate", "--seed-file", seed, "--gamma", "b1", "--save-history", h1.to_str().unwrap()]);
    assert!(o.status.success());
    let o = hcouple(&[
        "closure", "psi-preimage", "--seed-file", seed, "--history", h1.to_str().unwrap(), "--beta", "-b1",
        "--save-history", h2.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let replay = |h: &Path| stdout(&hcouple(&["closure", "replay", "--seed-file", seed, "--history", h.to_str().unwrap()]));
    let a = replay(&h2);
    assert_eq!(a, replay(&h2));
    assert!(a.contains("\"b3\""), "{a}");
    // The replayed stage re-validates.
    let stage = dir.join("stage.json");
    fs::write(&stage, &a).unwrap();
    assert!(hcouple(&["validate", stage.to_str().unwrap()]).status.success());
}

#[test]
fn json_reports_are_deterministic_and_digest_inputs() {
    let args = ["--json", "closure", "integrate", "--seed-file", "crates/core/fixtures/p2.json", "--gamma", "b1 + b2"];
    let a = stdout(&hcouple(&args));
    assert_eq!(a, stdout(&hcouple(&args)));
    let v: serde_json::Value = serde_json::from_str(&a).unwrap();
    assert_eq!(v["command"], "closure integrate");
    assert_eq!(v["status"], "ok");
    assert_eq!(v["outputs"][0]["rendered"], "-b3");
    assert!(v["history"].is_object());
    let other = ["--json", "closure", "integrate", "--seed-file", "crates/core/fixtures/p1.json", "--gamma", "b1"];
    let w: serde_json::Value = serde_json::from_str(&stdout(&hcouple(&other))).unwrap();
    assert_ne!(v["inputsDigest"], w["inputsDigest"]);
}

#[test]
fn fuzz_is_reproducible_across_thread_counts() {
    let run = |jobs: &str| -> serde_json::Value {
        let args = ["--json", "fuzz", "--seed", "9", "--suite", "axioms", "--suite", "language", "--cases", "40", "--jobs", jobs];
        serde_json::from_str(&stdout(&hcouple(&args))).unwrap()
    };
    let (a, b) = (run("1"), run("3"));
    assert_eq!(a["outputs"], b["outputs"]);
    assert_eq!(a["outputs"].as_array().unwrap().len(), 2);
}

use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn write_job(name: &str, doc: &Value) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-jobs");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(doc).unwrap()).unwrap();
    p
}

fn locomp(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut c = Command::new(env!("CARGO_BIN_EXE_locomp"));
    c.args(args).env_remove("LOCOMP_BUDGET");
    for (k, v) in env {
        c.env(k, v);
    }
    c.output().unwrap()
}

fn standard_job() -> Value {
    json!({
        "spaces": {
            "Q": { "kind": "rational_line" },
            "R2": { "kind": "rational_box", "dim": 2, "metric": "euclid" }
        },
        "metrics": { "e": { "space": "R2", "generators": ["euclid"] } },
        "queries": [
            { "kind": "interval-cover", "target": ["0", "1"], "u": [["-1/2", "3/5"], ["2/5", "3/2"]] },
            { "kind": "ball-cover", "space": "R2", "budget": 12,
              "a": { "center": ["0", "0"], "radius": "3", "metric": "e" },
              "u": [{ "center": ["-4", "0"], "radius": "5", "metric": "e" },
                    { "center": ["4", "0"], "radius": "5", "metric": "e" }] },
            { "kind": "dist", "space": "Q", "p": { "sqrt": 2 }, "q": { "element": "7/5" }, "n": 20 },
            { "kind": "pf-cover", "space": "Q", "a": { "center": "0", "radius": "1" },
              "u": [{ "center": "-1/2", "radius": "1" }, { "center": "1/2", "radius": "1" }] }
        ]
    })
}

fn structured(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

#[test]
fn standard_job_proves_everything_and_replays() {
    let job = write_job("standard.json", &standard_job());
    let out = locomp(&["--job", job.to_str().unwrap(), "--format", "structured", "--replay-certificates"], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = structured(&out);
    let qs = r["queries"].as_array().unwrap();
    assert!(qs.iter().all(|q| q["verdict"] == "proved"));
    assert_eq!(qs[0]["replayed"], true);
    assert_eq!(qs[1]["replayed"], true);
    assert_eq!(qs[3]["tag"], "pf");
    assert!(qs[0]["certificate"]["chain"].is_array());
}

#[test]
fn text_report_goes_to_file() {
    let job = write_job("text.json", &standard_job());
    let report = job.with_extension("txt");
    let out = locomp(&["--job", job.to_str().unwrap(), "--report", report.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&report).unwrap();
    assert!(text.contains("#1 ball-cover: proved"), "{text}");
    assert!(text.ends_with("exit code 0\n"));
}

#[test]
fn validation_reports_paths_and_fails() {
    let doc = json!({
        "spaces": { "Q": { "kind": "rational_line" } },
        "queries": [
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "0" }, "b": { "center": "0", "radius": "1" } },
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "1", "metric": "rho" },
              "b": { "center": "0", "radius": "1" } }
        ]
    });
    let job = write_job("invalid.json", &doc);
    let out = locomp(&["--job", job.to_str().unwrap(), "--check"], &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("queries[0].a.radius: radius must be positive"), "{err}");
    assert!(err.contains("queries[1].a.metric"), "{err}");
}

#[test]
fn exit_code_reflects_refutation_and_budget_env() {
    let doc = json!({
        "spaces": { "Q": { "kind": "rational_line" } },
        "queries": [
            { "kind": "ball-order", "space": "Q", "a": { "center": "0", "radius": "2" }, "b": { "center": "0", "radius": "1" } }
        ]
    });
    let job = write_job("refuted.json", &doc);
    let out = locomp(&["--job", job.to_str().unwrap(), "--format", "structured"], &[("LOCOMP_BUDGET", "5")]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(structured(&out)["queries"][0]["budget"], 5);
    let out = locomp(&["--job", job.to_str().unwrap(), "--format", "structured", "--budget-default", "7"], &[("LOCOMP_BUDGET", "5")]);
    assert_eq!(structured(&out)["queries"][0]["budget"], 7);
}

#[test]
fn reports_are_byte_identical_without_timing() {
    let job = write_job("determinism.json", &standard_job());
    let strip = |mut v: Value| {
        for q in v["queries"].as_array_mut().unwrap() {
            q.as_object_mut().unwrap().remove("wall_ms");
        }
        serde_json::to_string(&v).unwrap()
    };
    let a = locomp(&["--job", job.to_str().unwrap(), "--format", "structured"], &[]);
    let b = locomp(&["--job", job.to_str().unwrap(), "--format", "structured"], &[]);
    assert_eq!(strip(structured(&a)), strip(structured(&b)));
}

#[test]
fn malformed_documents_report_a_location() {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-jobs");
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join("broken.json");
    std::fs::write(&p, "{\n  \"queries\": [\n    { \"kind\": \"nope\" }\n  ]\n}\n").unwrap();
    let out = locomp(&["--job", p.to_str().unwrap()], &[]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));
}

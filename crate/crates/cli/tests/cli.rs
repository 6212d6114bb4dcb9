use std::io::Write;
use std::path::Path;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_gumbel-order");
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

fn spec_file(text: &str) -> tempfile::NamedTempFile {
    let mut f = tempfile::NamedTempFile::new().unwrap();
    f.write_all(text.as_bytes()).unwrap();
    f
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().unwrap()
}

fn run_file(cmd: &str, file: &Path, extra: &[&str]) -> Output {
    let mut args = vec![cmd, file.to_str().unwrap()];
    args.extend_from_slice(extra);
    run(&args)
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!("bad json ({e}): {}", String::from_utf8_lossy(&out.stdout));
    })
}

fn pair(topology: &str, a: &str, b: &str, sigma: f64, header: &str) -> String {
    format!(
        "{header}\n[system_a]\ntopology = \"{topology}\"\nmus = {a}\nsigma = {sigma}\n\n\
         [system_b]\ntopology = \"{topology}\"\nmus = {b}\nsigma = {sigma}\n"
    )
}

#[test]
fn identical_systems_hold_every_relation() {
    let text = pair(
        "series",
        "[0.5, -1.0, 2.0]",
        "[2.0, 0.5, -1.0]",
        1.0,
        "relations = [\"lr\", \"rh\", \"hr\", \"st\", \"disp\", \"lu\"]",
    );
    let f = spec_file(&text);
    let out = run_file("check", f.path(), &["--json"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    let v = json(&out);
    let verdicts = v["verdicts"].as_array().unwrap();
    assert_eq!(verdicts.len(), 6);
    assert!(verdicts.iter().all(|v| v["outcome"] == "holds"));
}

#[test]
fn majorized_parallel_pair_is_rh_ordered() {
    // (2, 0) majorizes (1, 1); the reversed hazard order follows e^2 + 1 > 2e.
    let f = spec_file(&pair("parallel", "[2.0, 0.0]", "[1.0, 1.0]", 1.0, "relations = [\"rh:first_greater\"]"));
    let out = run_file("check", f.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let f = spec_file(&pair("parallel", "[2.0, 0.0]", "[1.0, 1.0]", 1.0, "relations = [\"rh:first_smaller\"]"));
    assert_eq!(run_file("check", f.path(), &[]).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_64() {
    let mut text = pair("series", "[0.0, 1.0]", "[1.0, 0.0]", 1.0, "relations = [\"st\"]");
    text = text.replacen("sigma = 1", "sigma = 2", 1);
    let f = spec_file(&text);
    let out = run_file("check", f.path(), &[]);
    assert_eq!(out.status.code(), Some(64));
    assert!(!out.stderr.is_empty());

    let f = spec_file("this is not toml = = =");
    assert_eq!(run_file("check", f.path(), &[]).status.code(), Some(64));

    let f = spec_file(&pair("series", "[0.0]", "[0.0]", -1.0, "relations = [\"st\"]"));
    assert_eq!(run_file("check", f.path(), &[]).status.code(), Some(64));

    assert_eq!(run(&["check", "/nonexistent/spec.toml"]).status.code(), Some(64));
    assert_eq!(run(&["scan", "--mode", "nonsense"]).status.code(), Some(64));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(64));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn entropy_of_standard_component() {
    let f = spec_file("[system_a]\ntopology = \"series\"\nmus = [0.0]\nsigma = 1.0\n");
    let out = run_file("entropy", f.path(), &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    let h = v["systems"][0]["report"]["shannon"]["value"].as_f64().unwrap();
    assert!((h - (1.0 + EULER_GAMMA)).abs() < 1e-8, "{h}");
}

#[test]
fn simulate_is_reproducible() {
    let header = "seed = 11\n[simulate]\nsamples = 20000";
    let f = spec_file(&pair("series", "[2.0, 0.0, -1.0]", "[1.0, 0.5, -0.5]", 0.5, header));
    let first = run_file("simulate", f.path(), &["--json"]);
    let second = run_file("simulate", f.path(), &["--json"]);
    assert_eq!(first.status.code(), second.status.code());
    assert_eq!(first.stdout, second.stdout);
    let v = json(&first);
    assert_eq!(v["cdf_dominance"]["contradictions"], 0);
    assert_eq!(v["config"]["seed"], 11);
}

#[test]
fn output_file_matches_stdout_json() {
    let f = spec_file(&pair("parallel", "[1.0, 1.0]", "[0.0, 0.0]", 1.0, "relations = [\"lr:first_greater\"]"));
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = run_file("check", f.path(), &["--json", "-o", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(std::fs::read(&path).unwrap(), out.stdout);
}

#[test]
fn reads_spec_from_stdin() {
    let text = pair("parallel", "[1.0, 1.0]", "[0.0, 0.0]", 1.0, "relations = [\"st:first_greater\"]");
    let mut child =
        Command::new(BIN).args(["check", "-"]).stdin(Stdio::piped()).stdout(Stdio::piped()).spawn().unwrap();
    child.stdin.take().unwrap().write_all(text.as_bytes()).unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stdout).contains("holds"));
}

#[test]
fn dominance_scan_with_degenerate_pairs_passes() {
    let out = run(&["scan", "--mode", "dominance-lr", "--trials", "40", "--allow-degenerate", "--seed", "5", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["summary"]["passes"], 40);
    assert_eq!(v["config"]["scan"]["seed"], 5);
}

#[test]
fn free_scan_is_consistent() {
    let out = run(&["scan", "--mode", "free", "--trials", "60", "--n", "2..4", "--seed", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains("implication audit violations: 0"));
}

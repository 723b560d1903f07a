use std::path::PathBuf;
use std::process::{Command, Output};

fn fixture(name: &str) -> PathBuf {
    [env!("CARGO_MANIFEST_DIR"), "fixtures", name].iter().collect()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("disconnect-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_disconnect")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

const GOLDEN: &str = "C[z,u;a,b] ; C[v,w;c,d] ; ~C[w,z;d,a] ; ~C[u,v;b,c] ; S[r]";

fn golden_term_file() -> PathBuf {
    let path = scratch("golden.term");
    let source = fixture("benzyl_source.graph");
    std::fs::write(&path, format!("source {}\n{GOLDEN}\n", source.display())).unwrap();
    path
}

#[test]
fn normalize_canonical_matches_the_short_form() {
    let golden = run(&["normalize", "--canonical", golden_term_file().to_str().unwrap()]);
    assert!(golden.status.success());
    let long = run(&["normalize", "--canonical", fixture("example29.term").to_str().unwrap()]);
    assert!(long.status.success(), "{}", String::from_utf8_lossy(&long.stderr));
    assert_eq!(stdout(&long), stdout(&golden));
}

#[test]
fn normalize_trace_lists_steps() {
    let o = run(&["normalize", "--trace", fixture("example29.term").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(stdout(&o).lines().filter(|l| l.starts_with('#')).count() > 0);
}

#[test]
fn eq_reports_equal() {
    let long = fixture("example29.term");
    let o = run(&["eq", long.to_str().unwrap(), golden_term_file().to_str().unwrap()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next(), Some("equal"));
    assert!(text.contains("agree: true"));
}

#[test]
fn roundtrip_passes_on_the_benzyl_reaction() {
    let o = run(&["roundtrip", fixture("benzyl.reaction").to_str().unwrap()]);
    assert!(o.status.success());
    assert_eq!(stdout(&o), "pass\n");
}

#[test]
fn decompose_then_json() {
    let o = run(&["--json", "decompose", fixture("benzyl.reaction").to_str().unwrap()]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["term"].as_str().unwrap().contains("C["));
    assert!(v["iota"].is_array());
}

#[test]
fn output_flag_writes_a_file() {
    let out = scratch("validate.txt");
    let o = run(&["-o", out.to_str().unwrap(), "validate", fixture("benzyl_source.graph").to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    let written = std::fs::read_to_string(&out).unwrap();
    assert!(written.trim_end().ends_with(": valid"), "{written}");
}

#[test]
fn apply_outside_the_domain_is_a_domain_error() {
    let o = run(&["apply", fixture("benzyl_source.graph").to_str().unwrap(), "I[z,u]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(!o.stderr.is_empty());
}

#[test]
fn missing_file_is_a_domain_error() {
    let o = run(&["dagger", "/nonexistent/r.reaction"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn usage_errors_exit_with_two() {
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["normalize"]).status.code(), Some(2));
    assert_eq!(run(&["oracle", "--seed", "x"]).status.code(), Some(2));
}

#[test]
fn dagger_is_an_involution_on_the_command_line() {
    let once = scratch("dagger1.reaction");
    let twice = scratch("dagger2.reaction");
    let r = fixture("benzyl.reaction");
    assert!(run(&["-o", once.to_str().unwrap(), "dagger", r.to_str().unwrap()]).status.success());
    assert!(run(&["-o", twice.to_str().unwrap(), "dagger", once.to_str().unwrap()]).status.success());
    let back = run(&["compose", r.to_str().unwrap(), once.to_str().unwrap()]);
    assert!(back.status.success(), "{}", String::from_utf8_lossy(&back.stderr));
    let direct = run(&["roundtrip", twice.to_str().unwrap()]);
    assert_eq!(stdout(&direct), "pass\n");
}

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/fixtures")
        .join(format!("{name}.json"))
}

fn chipfire(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chipfire"))
        .args(args)
        .env_remove("CHIPFIRE_BUDGET")
        .output()
        .unwrap()
}

fn run(args: &[&str]) -> (i32, String, String) {
    let out = chipfire(args);
    (
        out.status.code().unwrap(),
        String::from_utf8(out.stdout).unwrap(),
        String::from_utf8(out.stderr).unwrap(),
    )
}

fn with_fixture(cmd: &str, name: &str, rest: &[&str]) -> (i32, String, String) {
    let path = fixture(name);
    let mut args = vec![cmd, path.to_str().unwrap()];
    args.extend_from_slice(rest);
    run(&args)
}

fn write(dir: &TempDir, name: &str, text: &str) -> PathBuf {
    let path = dir.path().join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn json(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn simulate_fig2() {
    let (code, out, _) = with_fixture("simulate", "fig2", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["sequence"].as_array().unwrap().len(), 3);
    assert_eq!(v["final"], json(r#"{"a":0,"b":0,"c":1,"d":2}"#));
}

#[test]
fn simulate_is_policy_independent() {
    let (_, a, _) = with_fixture("simulate", "fig9", &["--policy", "random:5"]);
    let (_, b, _) = with_fixture("simulate", "fig9", &["--policy", "smallest"]);
    assert_eq!(json(&a)["final"], json(&b)["final"]);
    assert_eq!(json(&a)["fire_counts"], json(&b)["fire_counts"]);
}

#[test]
fn simulate_with_nothing_to_fire() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "idle.json",
        r#"{"kind":"cfg","vertices":[{"name":"a","chips":0},{"name":"s","chips":0}],"sink":"s","edges":[["a","s",1]]}"#,
    );
    let (code, out, _) = run(&["simulate", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(json(&out)["sequence"], json("[]"));
}

#[test]
fn space_exports_dot_and_json() {
    let dir = TempDir::new().unwrap();
    let dot = dir.path().join("s.dot");
    let js = dir.path().join("s.json");
    let (code, _, _) = with_fixture(
        "space",
        "fig2",
        &[
            "--dot",
            dot.to_str().unwrap(),
            "--json",
            js.to_str().unwrap(),
        ],
    );
    assert_eq!(code, 0);
    let dot = std::fs::read_to_string(dot).unwrap();
    assert!(dot.starts_with("digraph"));
    assert_eq!(dot.matches("[label=\"(").count(), 7);
    assert_eq!(dot.matches(" -> ").count(), 9);
    let v = json(&std::fs::read_to_string(js).unwrap());
    assert_eq!(v["states"].as_array().unwrap().len(), 7);
    assert_eq!(v["covers"].as_array().unwrap().len(), 9);
}

#[test]
fn space_of_a_single_state() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "one.json",
        r#"{"kind":"cfg","vertices":[{"name":"s","chips":0}],"sink":"s","edges":[]}"#,
    );
    let (code, out, _) = run(&["space", f.to_str().unwrap(), "--dot", "-"]);
    assert_eq!(code, 0);
    assert_eq!(out.matches(" -> ").count(), 0);
    let (code, out, _) = run(&["analyze", f.to_str().unwrap()]);
    assert_eq!(code, 0);
    let v = json(&out);
    for key in [
        "lattice",
        "ranked",
        "uld",
        "lld",
        "distributive",
        "hypercube",
    ] {
        assert_eq!(v[key], Value::Bool(true), "{key}");
    }
    assert_eq!(v["hypercube_dimension"], 0);
}

#[test]
fn analyze_reports_lattice_properties() {
    let (code, out, _) = with_fixture("analyze", "fig9", &[]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(
        (
            v["lattice"].clone(),
            v["uld"].clone(),
            v["distributive"].clone()
        ),
        (true.into(), true.into(), false.into())
    );
    let (_, out, _) = with_fixture("analyze", "fig2", &[]);
    let v = json(&out);
    assert_eq!(
        (
            v["uld"].clone(),
            v["lld"].clone(),
            v["distributive"].clone()
        ),
        (true.into(), false.into(), false.into())
    );
}

#[test]
fn transform_to_asm_verifies() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("asm.json");
    let (code, _, err) = with_fixture(
        "transform",
        "fig2",
        &["--op", "to-asm", "--verify", "--out", out.to_str().unwrap()],
    );
    assert_eq!(code, 0, "{err}");
    assert!(err.contains("verified"));
    let v = json(&std::fs::read_to_string(&out).unwrap());
    assert_eq!(v["kind"], "asm");
    let (code, _, _) = run(&[
        "isocheck",
        fixture("fig2").to_str().unwrap(),
        out.to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn transform_fig5_to_cfg_matches_the_fixture() {
    let (code, out, _) = with_fixture("transform", "fig5", &["--op", "mcfg-to-cfg"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(fixture("fig5-cfg")).unwrap());
}

#[test]
fn transform_simplify_and_ground() {
    let (code, out, _) = with_fixture("transform", "fig3", &["--op", "mcfg-simplify", "--verify"]);
    assert_eq!(code, 0);
    assert!(out.contains("a#0"));
    let (code, _, _) = with_fixture(
        "transform",
        "fig2",
        &[
            "--op", "ground", "--vertex", "a", "--factor", "3", "--verify",
        ],
    );
    assert_eq!(code, 0);
    let (code, _, _) = with_fixture(
        "transform",
        "fig2",
        &[
            "--op", "multiply", "--vertex", "c", "--factor", "2", "--verify",
        ],
    );
    assert_eq!(code, 0);
}

#[test]
fn isocheck_verdicts() {
    let (code, out, _) = run(&[
        "isocheck",
        fixture("fig7-cfg").to_str().unwrap(),
        fixture("fig7-asm").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
    let v = json(&out);
    assert_eq!(v["equivalent"], true);
    assert_eq!(v["bijection"].as_array().unwrap().len(), 11);
    let (code, out, _) = run(&[
        "isocheck",
        fixture("fig2").to_str().unwrap(),
        fixture("fig9").to_str().unwrap(),
    ]);
    assert_eq!(code, 1);
    assert_eq!(json(&out)["states"], json("[7, 39]"));
    let (code, _, _) = run(&[
        "isocheck",
        fixture("fig9").to_str().unwrap(),
        fixture("fig9").to_str().unwrap(),
    ]);
    assert_eq!(code, 0);
}

#[test]
fn fixtures_list_and_dump() {
    let (code, out, _) = run(&["fixtures", "list"]);
    assert_eq!(code, 0);
    assert_eq!(out.lines().count(), 13);
    let (code, out, _) = run(&["fixtures", "dump", "fig9"]);
    assert_eq!(code, 0);
    assert_eq!(out, std::fs::read_to_string(fixture("fig9")).unwrap());
    let dir = TempDir::new().unwrap();
    let (code, _, _) = run(&["fixtures", "dump", "--dir", dir.path().to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(std::fs::read_dir(dir.path()).unwrap().count(), 13);
    assert_eq!(run(&["fixtures", "dump", "nope"]).0, 10);
}

#[test]
fn outputs_are_deterministic() {
    for cmd in ["simulate", "space", "analyze"] {
        assert_eq!(
            with_fixture(cmd, "fig9", &[]).1,
            with_fixture(cmd, "fig9", &[]).1
        );
    }
}

#[test]
fn parse_and_validation_errors_exit_2() {
    let dir = TempDir::new().unwrap();
    let bad = write(
        &dir,
        "bad.json",
        "{\n  \"kind\": \"cfg\",\n  \"vertices\": [\n}",
    );
    let (code, _, err) = run(&["simulate", bad.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.contains("line 4"), "{err}");
    let unknown = write(
        &dir,
        "unknown.json",
        r#"{"kind":"cfg","vertices":[],"sink":null,"edges":[],"extra":1}"#,
    );
    assert_eq!(run(&["simulate", unknown.to_str().unwrap()]).0, 2);
    let invalid = write(
        &dir,
        "invalid.json",
        r#"{"kind":"asm","vertices":[{"name":"a","chips":0},{"name":"b","chips":0}],"sink":null,"edges":[["a","x",1],["a","b",1]]}"#,
    );
    let (code, _, err) = run(&["analyze", invalid.to_str().unwrap()]);
    assert_eq!(code, 2);
    assert!(err.lines().count() >= 2, "one line per violation: {err}");
    assert_eq!(run(&["simulate", "/nonexistent/game.json"]).0, 2);
}

#[test]
fn budget_exit_3() {
    assert_eq!(with_fixture("simulate", "fig9", &["--budget", "2"]).0, 3);
    assert_eq!(with_fixture("space", "fig9", &["--budget", "5"]).0, 3);
    let out = Command::new(env!("CARGO_BIN_EXE_chipfire"))
        .args(["analyze", fixture("fig9").to_str().unwrap()])
        .env("CHIPFIRE_BUDGET", "5")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn divergence_exit_4() {
    let dir = TempDir::new().unwrap();
    let f = write(
        &dir,
        "loop.json",
        r#"{"kind":"cfg","vertices":[{"name":"a","chips":1},{"name":"b","chips":0}],"sink":null,"edges":[["a","b",1],["b","a",1]]}"#,
    );
    assert_eq!(run(&["space", f.to_str().unwrap()]).0, 4);
    assert_eq!(run(&["analyze", f.to_str().unwrap()]).0, 4);
}

#[test]
fn verify_mismatch_exit_5() {
    let (code, _, err) = with_fixture(
        "transform",
        "fig6-3",
        &["--op", "ground", "--vertex", "v", "--unchecked", "--verify"],
    );
    assert_eq!(code, 5, "{err}");
}

#[test]
fn transform_errors_have_their_own_codes() {
    let dir = TempDir::new().unwrap();
    let two_sinks = write(
        &dir,
        "sinks.json",
        r#"{"kind":"cfg","vertices":[{"name":"a","chips":2},{"name":"x","chips":0},{"name":"y","chips":0}],"sink":null,"edges":[["a","x",1],["a","y",1]]}"#,
    );
    let idle = write(
        &dir,
        "idle.json",
        r#"{"kind":"cfg","vertices":[{"name":"a","chips":0},{"name":"s","chips":0}],"sink":"s","edges":[["a","s",1]]}"#,
    );
    let sinkless = write(
        &dir,
        "sinkless.json",
        r#"{"kind":"cfg","vertices":[{"name":"a","chips":1},{"name":"b","chips":0}],"sink":null,"edges":[["a","b",1]]}"#,
    );
    let t = |file: &Path, rest: &[&str]| {
        let mut args = vec!["transform", file.to_str().unwrap()];
        args.extend_from_slice(rest);
        run(&args).0
    };
    assert_eq!(t(&fixture("fig9"), &["--op", "to-asm"]), 6);
    assert_eq!(
        t(&fixture("fig6-3"), &["--op", "ground", "--vertex", "v"]),
        7
    );
    assert_eq!(t(&two_sinks, &["--op", "to-asm"]), 8);
    assert_eq!(t(&fixture("fig2"), &["--op", "mcfg-to-cfg"]), 9);
    assert_eq!(t(&fixture("fig3"), &["--op", "to-asm"]), 9);
    assert_eq!(
        t(&fixture("fig2"), &["--op", "ground", "--vertex", "zz"]),
        10
    );
    assert_eq!(
        t(&fixture("fig2"), &["--op", "ground", "--vertex", "d"]),
        10
    );
    assert_eq!(
        t(
            &fixture("fig2"),
            &["--op", "multiply", "--vertex", "a", "--factor", "0"]
        ),
        10
    );
    assert_eq!(t(&fixture("fig2"), &["--op", "ground"]), 10);
    assert_eq!(t(&fixture("fig5"), &["--op", "split", "--vertex", "a"]), 11);
    assert_eq!(
        t(&fixture("fig3"), &["--op", "mcfg-simplify", "--cap", "1"]),
        12
    );
    assert_eq!(t(&idle, &["--op", "to-asm"]), 13);
    assert_eq!(t(&sinkless, &["--op", "ground", "--vertex", "a"]), 14);
}

#[test]
fn undecided_convergence_exit_16() {
    let dir = TempDir::new().unwrap();
    let entries = vec!["[\"v\"]"; 45].join(",");
    let text = format!(
        r#"{{"kind":"mcfg","vertices":[{{"name":"v","chips":1}},{{"name":"s","chips":0}}],"sink":"s","edges":[["v","v",1]],"mutations":{{"v":[{entries},[]]}}}}"#
    );
    let f = write(&dir, "long.json", &text);
    assert_eq!(run(&["space", f.to_str().unwrap()]).0, 16);
}

#[test]
fn bad_arguments_exit_10() {
    assert_eq!(run(&["simulate"]).0, 10);
    assert_eq!(
        with_fixture("simulate", "fig2", &["--policy", "sideways"]).0,
        10
    );
    assert_eq!(run(&["frobnicate"]).0, 10);
    assert_eq!(run(&["--help"]).0, 0);
}

//! End-to-end command tests: output shapes, the exit-code contract, and
//! pipeline determinism.

use std::path::PathBuf;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_propalloc"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| {
        panic!(
            "stdout is not JSON ({e}): {:?}",
            String::from_utf8_lossy(&out.stdout)
        )
    })
}

fn temp_path(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("propalloc-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn write_fixture(name: &str, content: &str) -> PathBuf {
    let path = temp_path(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn gen_to_file(kind: &str, extra: &[&str], name: &str) -> PathBuf {
    let path = temp_path(name);
    let mut args = vec!["gen", kind];
    args.extend_from_slice(extra);
    let path_str = path.to_str().unwrap().to_string();
    args.push("--out");
    args.push(&path_str);
    let out = run(&args);
    assert!(out.status.success());
    path
}

const WEIGHTED_K22: &str = r#"{"left":[{"id":"i1","supply":1},{"id":"i2","supply":2}],"right":[{"id":"j1","capacity":1},{"id":"j2","capacity":2}],"edges":[["i1","j1"],["i1","j2"],["i2","j1"],["i2","j2"]]}"#;

#[test]
fn opt_reports_value_and_perfection() {
    let p4 = gen_to_file("path3", &[], "p4-opt.json");
    let out = run(&["opt", p4.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), serde_json::json!({"opt": 2, "perfect": true}));

    let hex = gen_to_file("cycle", &["--n", "3"], "hex-opt.json");
    let out = run(&["opt", hex.to_str().unwrap()]);
    assert_eq!(stdout_json(&out), serde_json::json!({"opt": 3, "perfect": true}));
}

#[test]
fn opt_on_broken_path() {
    // Path3 with the (i1, j1) edge removed: both left nodes compete for j2.
    let fixture = write_fixture(
        "p4-cut.json",
        r#"{"left":[{"id":"i1","supply":1},{"id":"i2","supply":1}],"right":[{"id":"j1","capacity":1},{"id":"j2","capacity":1}],"edges":[["i1","j2"],["i2","j2"]]}"#,
    );
    let out = run(&["opt", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout_json(&out), serde_json::json!({"opt": 1, "perfect": false}));
}

#[test]
fn check_mc_verdicts() {
    let p4 = gen_to_file("path3", &[], "p4-mc.json");
    let out = run(&["check-mc", p4.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_json(&out),
        serde_json::json!({"matching_covered": false, "tight_set": ["i2"]})
    );

    let hex = gen_to_file("cycle", &["--n", "3"], "hex-mc.json");
    let out = run(&["check-mc", hex.to_str().unwrap()]);
    assert_eq!(stdout_json(&out), serde_json::json!({"matching_covered": true}));

    // Disconnected union of two 4-cycles.
    let fixture = write_fixture(
        "two-squares.json",
        r#"{"left":[{"id":"a1","supply":1},{"id":"a2","supply":1},{"id":"b1","supply":1},{"id":"b2","supply":1}],"right":[{"id":"c1","capacity":1},{"id":"c2","capacity":1},{"id":"d1","capacity":1},{"id":"d2","capacity":1}],"edges":[["a1","c1"],["a1","c2"],["a2","c1"],["a2","c2"],["b1","d1"],["b1","d2"],["b2","d1"],["b2","d2"]]}"#,
    );
    let out = run(&["check-mc", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout_json(&out),
        serde_json::json!({"matching_covered": false, "disconnected": true})
    );
}

#[test]
fn check_mc_requires_perfect_matching() {
    let fixture = write_fixture(
        "no-pm.json",
        r#"{"left":[{"id":"i1","supply":2}],"right":[{"id":"j1","capacity":1}],"edges":[["i1","j1"]]}"#,
    );
    let out = run(&["check-mc", fixture.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout_json(&out), serde_json::json!({"error": "no perfect matching"}));
}

#[test]
fn weights_on_covered_instances() {
    let hex = gen_to_file("cycle", &["--n", "3"], "hex-w.json");
    let out = run(&["weights", hex.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    for j in ["j1", "j2", "j3"] {
        assert_eq!(doc["weights"][j], serde_json::json!(1.0));
    }

    let k22 = write_fixture("k22.json", WEIGHTED_K22);
    let out = run(&["weights", k22.to_str().unwrap()]);
    let doc = stdout_json(&out);
    assert!((doc["weights"]["j1"].as_f64().unwrap() - 1.0).abs() < 1e-6);
    assert!((doc["weights"]["j2"].as_f64().unwrap() - 2.0).abs() < 1e-6);
}

#[test]
fn weights_rejects_uncovered_with_tight_set() {
    let p4 = gen_to_file("path3", &[], "p4-w.json");
    let out = run(&["weights", p4.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let doc = stdout_json(&out);
    assert_eq!(doc["error"], "not matching covered");
    assert_eq!(doc["tight_set"], serde_json::json!(["i2"]));
}

#[test]
fn strategy_allocate_eval_pipeline() {
    let p4 = gen_to_file("path3", &[], "p4-s.json");
    let strat = run(&["strategy", p4.to_str().unwrap()]);
    assert_eq!(strat.status.code(), Some(0));
    let doc = stdout_json(&strat);
    assert_eq!(doc["ranks"], serde_json::json!({"j1": 2, "j2": 1}));
    assert_eq!(doc["weights"], serde_json::json!({"j1": 1.0, "j2": 1.0}));

    let strat_path = write_fixture("p4-strategy.json", &String::from_utf8(strat.stdout).unwrap());
    let alloc = run(&[
        "allocate",
        p4.to_str().unwrap(),
        "--strategy",
        strat_path.to_str().unwrap(),
    ]);
    assert_eq!(alloc.status.code(), Some(0));
    let alloc_path = write_fixture("p4-alloc.json", &String::from_utf8(alloc.stdout).unwrap());

    let eval = run(&["eval", p4.to_str().unwrap(), alloc_path.to_str().unwrap()]);
    assert_eq!(
        stdout_json(&eval),
        serde_json::json!({"value": 2.0, "opt": 2})
    );
}

#[test]
fn allocate_uniform_weights() {
    let p4 = gen_to_file("path3", &[], "p4-u.json");
    let alloc = run(&["allocate", p4.to_str().unwrap(), "--weights", "uniform"]);
    assert_eq!(alloc.status.code(), Some(0));
    let doc = stdout_json(&alloc);
    assert_eq!(doc["value"], serde_json::json!(1.5));
    let alloc_path = write_fixture("p4-ualloc.json", &String::from_utf8(alloc.stdout).unwrap());
    let eval = run(&["eval", p4.to_str().unwrap(), alloc_path.to_str().unwrap()]);
    assert_eq!(
        stdout_json(&eval),
        serde_json::json!({"value": 1.5, "opt": 2})
    );
}

#[test]
fn allocate_accepts_weights_command_output() {
    let k22 = write_fixture("k22-chain.json", WEIGHTED_K22);
    let weights = run(&["weights", k22.to_str().unwrap()]);
    let weights_path =
        write_fixture("k22-weights.json", &String::from_utf8(weights.stdout).unwrap());
    let alloc = run(&[
        "allocate",
        k22.to_str().unwrap(),
        "--weights",
        weights_path.to_str().unwrap(),
    ]);
    assert_eq!(alloc.status.code(), Some(0));
    let doc = stdout_json(&alloc);
    assert!((doc["value"].as_f64().unwrap() - 3.0).abs() < 1e-6);
}

#[test]
fn strategy_on_covered_instance_is_flat() {
    let hex = gen_to_file("cycle", &["--n", "3"], "hex-s.json");
    let out = run(&["strategy", hex.to_str().unwrap()]);
    let doc = stdout_json(&out);
    for j in ["j1", "j2", "j3"] {
        assert_eq!(doc["ranks"][j], serde_json::json!(1));
    }
}

#[test]
fn twocap_violation_bound() {
    let tc = gen_to_file("twocap-powers", &["--n", "10"], "tc10.json");
    let out = run(&[
        "twocap-violation",
        tc.to_str().unwrap(),
        "--samples",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["lower_bound"], serde_json::json!(1.6));
    assert_eq!(doc["bound_holds"], serde_json::json!(true));
    assert!(doc["min_factor_observed"].as_f64().unwrap() >= 1.6);

    // n = 4 with uniform weights only: factor 15/4.
    let tc4 = gen_to_file("twocap-powers", &["--n", "4"], "tc4.json");
    let w = write_fixture(
        "tc4-uniform.json",
        r#"{"j1":1.0,"j2":1.0,"j3":1.0,"j4":1.0}"#,
    );
    let out = run(&[
        "twocap-violation",
        tc4.to_str().unwrap(),
        "--weights",
        w.to_str().unwrap(),
    ]);
    let doc = stdout_json(&out);
    assert_eq!(doc["min_factor_observed"], serde_json::json!(3.75));
}

#[test]
fn exit_code_contract() {
    let p4 = gen_to_file("path3", &[], "p4-codes.json");
    let garbage = write_fixture("garbage.json", "{not json");
    let g = garbage.to_str().unwrap();
    let no_pm = write_fixture(
        "codes-no-pm.json",
        r#"{"left":[{"id":"i1","supply":2}],"right":[{"id":"j1","capacity":1}],"edges":[["i1","j1"]]}"#,
    );
    let isolated = write_fixture(
        "codes-isolated.json",
        r#"{"left":[{"id":"i1","supply":1},{"id":"i2","supply":1}],"right":[{"id":"j1","capacity":2}],"edges":[["i1","j1"]]}"#,
    );
    let tc5 = write_fixture(
        "codes-tc5.json",
        r#"{"items":[{"id":"i1","c":1.0,"v":1.0}],"bins":[{"id":"j1","C":1.0,"V":1.0},{"id":"j2","C":1.0,"V":1.0},{"id":"j3","C":1.0,"V":1.0}],"edges":[["i1","j1"]]}"#,
    );

    // 0: success for every command (most covered in their own tests).
    assert_eq!(run(&["opt", p4.to_str().unwrap()]).status.code(), Some(0));

    // 1: domain failures, each with a JSON payload on stdout.
    for args in [
        vec!["weights", p4.to_str().unwrap()], // not matching covered
        vec!["check-mc", no_pm.to_str().unwrap()],
        vec!["weights", no_pm.to_str().unwrap()],
        vec!["strategy", no_pm.to_str().unwrap()],
        vec!["allocate", isolated.to_str().unwrap(), "--weights", "uniform"],
        vec!["twocap-violation", tc5.to_str().unwrap()], // odd bin count: bound undefined
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(1), "args: {args:?}");
        stdout_json(&out); // must still be one valid JSON document
    }

    // 2: parse failures and bad usage.
    for args in [
        vec!["opt", g],
        vec!["check-mc", g],
        vec!["weights", g],
        vec!["strategy", g],
        vec!["allocate", g, "--weights", "uniform"],
        vec!["eval", p4.to_str().unwrap(), g],
        vec!["twocap-violation", g],
        vec!["opt", "/does/not/exist"],
        vec!["gen", "complete"], // missing --n
        vec!["gen", "complete", "--n", "0"],
        vec!["gen", "cycle", "--n", "1"],
        vec!["gen", "nope"],
        vec!["gen", "twocap-powers", "--n", "61"],
        vec!["allocate", p4.to_str().unwrap()], // neither --strategy nor --weights
    ] {
        assert_eq!(run(&args).status.code(), Some(2), "args: {args:?}");
    }
}

#[test]
fn pipelines_are_byte_identical() {
    for args in [
        vec!["gen", "path3"],
        vec!["gen", "random-mc", "--n", "5", "--extra-edges", "3", "--seed", "9"],
        vec!["gen", "twocap-powers", "--n", "6"],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout);
    }

    let mc = gen_to_file(
        "random-mc",
        &["--n", "6", "--extra-edges", "2", "--seed", "4"],
        "mc-pipe.json",
    );
    for args in [
        vec!["opt", mc.to_str().unwrap()],
        vec!["check-mc", mc.to_str().unwrap()],
        vec!["weights", mc.to_str().unwrap()],
        vec!["strategy", mc.to_str().unwrap()],
    ] {
        let a = run(&args);
        let b = run(&args);
        assert_eq!(a.stdout, b.stdout, "args: {args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

#[test]
fn stdin_dash_accepted() {
    use std::io::Write;
    let gen = run(&["gen", "path3"]);
    let mut child = bin()
        .args(["opt", "-"])
        .stdin(std::process::Stdio::piped())
        .stdout(std::process::Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(&gen.stdout)
        .unwrap();
    let out = child.wait_with_output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        serde_json::from_slice::<serde_json::Value>(&out.stdout).unwrap(),
        serde_json::json!({"opt": 2, "perfect": true})
    );
}

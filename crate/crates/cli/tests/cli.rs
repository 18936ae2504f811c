use std::path::PathBuf;
use std::process::{Command, Output};

use microformal::brackets::Slot;
use microformal_cli::{verify, VerifyOptions};

fn problem(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("problems").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_microformal")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).expect("utf-8 output")
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).expect("utf-8 output")
}

fn temp_problem(json: &str) -> tempfile::NamedTempFile {
    let f = tempfile::NamedTempFile::new().expect("temp file");
    std::fs::write(f.path(), json).expect("write problem");
    f
}

#[test]
fn quadratic_pullback_report() {
    let path = problem("quadratic.json");
    let o = cli(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("f = ε*x^2 + 2*ε^2*x^2"), "{}", stdout(&o));
}

#[test]
fn json_report_carries_the_canonical_text() {
    let path = problem("quadratic.json");
    let o = cli(&["run", path.to_str().unwrap(), "--json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["passed"], true);
    let task = &v["tasks"][0];
    assert_eq!(task["results"][0]["label"], "f");
    assert_eq!(task["results"][0]["value"], "ε*x^2 + 2*ε^2*x^2");
    assert_eq!(task["order"], 2);
    assert_eq!(task["caps"], "fiber<=2");
    assert!(task.get("millis").is_none());
}

#[test]
fn chart_only_file_is_an_empty_success() {
    let f = temp_problem(r#"{ "charts": [ { "name": "M", "coords": [["x", "even"], ["ξ", "odd"]] } ] }"#);
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert!(stdout(&o).contains("0 tasks, all passed"));
}

#[test]
fn parity_mismatch_is_an_input_error_naming_the_symbol() {
    let f = temp_problem(
        r#"{
  "charts": [
    { "name": "M1", "coords": [["x", "even"]] },
    { "name": "M2", "coords": [["y", "even"], ["θ", "odd"]] }
  ],
  "relations": [ { "name": "R", "source": "M1", "target": "M2", "kind": "even", "body": "x*p_y" } ],
  "functions": [ { "name": "g", "chart": "M2", "body": "y*θ" } ],
  "tasks": [ { "op": "pullback", "relation": "R", "function": "g" } ]
}"#,
    );
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = stderr(&o);
    assert!(err.contains("function g") && err.contains("θ"), "{err}");
    assert!(stdout(&o).is_empty());
}

#[test]
fn malformed_input_reports_a_position() {
    let f = temp_problem("{ \"charts\": [ }");
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 1"), "{}", stderr(&o));

    let f = temp_problem(
        r#"{ "charts": [ { "name": "M", "coords": [["x", "even"]] } ],
             "functions": [ { "name": "g", "chart": "M", "body": "x + z" } ] }"#,
    );
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("function g"), "{}", stderr(&o));

    let o = cli(&["run", "/nonexistent/problem.json"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn unknown_task_and_reference_are_rejected() {
    let f = temp_problem(r#"{ "tasks": [ { "op": "integrate" } ] }"#);
    assert_eq!(cli(&["run", f.path().to_str().unwrap()]).status.code(), Some(2));
    let f = temp_problem(r#"{ "tasks": [ { "op": "master", "hamiltonian": "H" } ] }"#);
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown hamiltonian H"));
}

#[test]
fn failed_assertion_exits_one() {
    let f = temp_problem(
        r#"{
  "charts": [ { "name": "S", "coords": [["x", "even"], ["ξ", "odd"]] } ],
  "hamiltonians": [ { "name": "B", "chart": "S", "kind": "cotangent", "body": "ξ*p_x + x*p_ξ" } ],
  "tasks": [ { "op": "master", "hamiltonian": "B" } ]
}"#,
    );
    let o = cli(&["run", f.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("master defect = 2*x*p_x + 2*ξ*p_ξ"), "{}", stdout(&o));
}

#[test]
fn tasks_see_earlier_results() {
    let path = problem("maps.json");
    let o = cli(&["run", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert!(out.contains("BA = p_z + x^2*p_z"), "{out}");
    assert!(out.contains("f = ε + 2*ε*x^2 + ε*x^4"), "{out}");
    assert!(out.contains("T' = -3/2*p_u + 1/2*x*p_u + 1/4*x*p_u^2"), "{out}");
}

#[test]
fn family_subcommands() {
    let q = problem("quadratic.json");
    let q = q.to_str().unwrap();
    let o = cli(&["pullback", q, "R", "g", "--order", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("f = ε*x^2\n"), "{}", stdout(&o));

    let h = problem("hamjac.json");
    let h = h.to_str().unwrap();
    let o = cli(&["hj", "commutator", h, "H", "F", "f0"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("defect = -12*x^3"));
    let o = cli(&["hj", "apply", h, "H", "f0"]);
    assert!(stdout(&o).contains("= 9*x^4"));
    let o = cli(&["bracket", h, "H", "F"]);
    assert!(stdout(&o).contains("bracket = 4*x*p_x"));
    let o = cli(&["derived", h, "Q", "a"]);
    assert!(stdout(&o).contains("bracket = 2*x*ξ"));
    let o = cli(&["hj", "related", h, "H"]);
    assert_eq!(o.status.code(), Some(2));

    let m = problem("maps.json");
    let m = m.to_str().unwrap();
    let o = cli(&["compose", m, "B", "A", "--fiber-cap", "2"]);
    assert!(stdout(&o).contains("= p_z + x^2*p_z"), "{}", stdout(&o));
    let o = cli(&["coords", m, "T", "C"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn quiet_prints_nothing() {
    let path = problem("hamjac.json");
    let o = cli(&["run", path.to_str().unwrap(), "--quiet"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
}

#[test]
fn verify_all_passes() {
    let o = cli(&["verify", "all", "--seed", "7"]);
    let out = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{out}");
    assert!(out.contains(" 0 failed"), "{out}");
    for suite in ["pullback", "functorial", "coords", "brackets", "hamjac", "odd"] {
        assert!(out.contains(&format!("ok   {suite}")), "{suite} missing");
    }
}

#[test]
fn verify_hamjac_prints_the_worked_defect_first() {
    let o = cli(&["verify", "hamjac"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let worked = out.find("defect -12*x^3").expect("worked example printed");
    let random = out.find("shift commutator on cotangent charts").expect("random property listed");
    assert!(worked < random);
}

#[test]
fn unknown_suite_is_an_input_error() {
    assert_eq!(cli(&["verify", "everything"]).status.code(), Some(2));
}

#[test]
fn reports_are_reproducible() {
    let path = problem("maps.json");
    let a = cli(&["run", path.to_str().unwrap(), "--json"]);
    let b = cli(&["run", path.to_str().unwrap(), "--json"]);
    assert_eq!(a.stdout, b.stdout);
    let a = cli(&["verify", "all", "--seed", "3", "--instances", "4", "--json"]);
    let b = cli(&["verify", "all", "--seed", "3", "--instances", "4", "--json"]);
    assert_eq!(a.stdout, b.stdout);
}

/// The direct formula with the base-parity part of the sign dropped.
fn dropped_base_parity(slots: &[Slot]) -> bool {
    let mut bits = 0;
    for (k, sk) in slots.iter().enumerate() {
        for sj in &slots[..k] {
            bits += sk.fiber.bit() * sj.arg.bit();
        }
    }
    bits % 2 == 1
}

#[test]
fn injected_sign_bug_is_caught_with_a_counterexample() {
    let opts = VerifyOptions { seed: 1, instances: None, derived_sign: dropped_base_parity };
    let report = verify("brackets", &opts).unwrap();
    assert!(!report.passed);
    let p = report.properties.iter().find(|p| p.name == "nested and direct derived brackets agree").unwrap();
    assert!(p.failures > 0);
    let c = p.counterexample.as_deref().unwrap();
    assert!(c.contains("got") && c.contains("expected"), "{c}");
    let others_pass = report.properties.iter().filter(|q| q.name != p.name).all(|q| q.passed());
    assert!(others_pass);
}

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hypercalc")).args(args).env_remove("HYPERCALC_ORDER").output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    let out = run(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn temp_file(name: &str, contents: &str) -> PathBuf {
    let path = std::env::temp_dir().join(format!("hypercalc-{}-{name}", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}

#[test]
fn arithmetic_commands() {
    assert_eq!(stdout(&["st", "--expr", "(7 + d^5)/(8 + sqrt(d))"]).trim(), "7/8");
    assert_eq!(stdout(&["st", "--expr", "1/(d^2 + d)"]).trim(), "+inf");
    assert_eq!(stdout(&["classify", "--expr", "ln(d)"]).trim(), "Infinite(-)");
    assert_eq!(stdout(&["eval", "--expr", "x^2", "--x", "1 + d"]).trim(), "1 + 2*d + d^2 + O(d^16)");
    assert_eq!(stdout(&["--order", "4", "eval", "--expr", "1/(1-d)"]).trim(), "1 + d + d^2 + d^3 + O(d^4)");
    assert_eq!(code(&["compare", "--lhs", "d", "--rhs", "d^2"]), 0);
}

#[test]
fn order_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_hypercalc"))
        .args(["eval", "--expr", "1/(1-d)"])
        .env("HYPERCALC_ORDER", "3")
        .output()
        .unwrap();
    assert_eq!(String::from_utf8(out.stdout).unwrap().trim(), "1 + d + d^2 + O(d^3)");
}

#[test]
fn calculus_commands() {
    assert_eq!(stdout(&["derive", "--expr", "x^3", "--at", "-2"]).trim(), "12");
    assert_eq!(stdout(&["limit", "--expr", "x/(1+x)", "--at", "1"]).trim(), "1/2");
    assert_eq!(stdout(&["limit", "--expr", "sin(x)/x", "--at", "inf"]).trim(), "0");
    assert_eq!(stdout(&["seqlimit", "--expr", "(n+5)/(n+3)"]).trim(), "1");
    assert_eq!(code(&["limit", "--expr", "1/x", "--at", "0"]), 1);
    assert_eq!(code(&["derive", "--expr", "abs(x)", "--at", "0"]), 1);
    assert_eq!(code(&["cont", "--expr", "x^2", "--at", "3"]), 0);
    assert_eq!(code(&["cont", "--expr", "0^(x^2)", "--at", "0"]), 1);
    assert_eq!(code(&["cont", "--expr", "x/abs(x)", "--at", "0"]), 3);
    assert_eq!(code(&["limit", "--expr", "sin(1/x)", "--at", "0"]), 3);
    assert_eq!(code(&["ucont", "--expr", "1/x", "--domain", "(0,inf)"]), 1);
    assert_eq!(code(&["--backend", "decimal", "ucont", "--expr", "sin(x)"]), 0);
    assert_eq!(code(&["--backend", "decimal", "converge", "--family", "x^n", "--domain", "[0,1)"]), 1);
    assert_eq!(code(&["--backend", "decimal", "converge", "--family", "x^n", "--domain", "[0,1)", "--mode", "pointwise"]), 0);
}

#[test]
fn json_verdicts() {
    let out = stdout(&["--json", "ucont", "--expr", "x", "--domain", "R"]);
    let j: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(j["schema"], 1);
    assert_eq!(j["kind"], "Holds");
    let out = run(&["--json", "ucont", "--expr", "exp(x)", "--backend", "decimal"]);
    let j: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(j["witness"]["x"], "d^(-1)");
    assert_eq!(j["witness"]["y"], "d^(-1) + d");
}

#[test]
fn error_exit_codes() {
    assert_eq!(code(&["eval", "--expr", "x/(1+"]), 2);
    assert!(String::from_utf8(run(&["eval", "--expr", "x/(1+"]).stderr).unwrap().contains("offset 5"));
    assert_eq!(code(&["eval", "--expr", "foo(x)"]), 2);
    assert_eq!(code(&["eval", "--expr", "x"]), 2);
    assert_eq!(code(&["eval", "--expr", "1/0"]), 3);
    assert_eq!(code(&["--order", "1", "eval", "--expr", "d"]), 2);
    assert_eq!(code(&["frobnicate"]), 2);
    assert_eq!(code(&["st", "--expr", "sin(1/d)"]), 3);
}

#[test]
fn set_commands() {
    assert_eq!(stdout(&["set", "--set", "(0,1)", "--member", "1 - d"]).trim(), "true");
    assert_eq!(stdout(&["set", "--set", "(0,1)", "--member", "1 + d"]).trim(), "false");
    let report = stdout(&["set", "--set", "(0,1)"]);
    assert!(report.contains("open: true") && report.contains("closure: [0, 1]"));
    assert_eq!(stdout(&["set", "--set", "(0,2]", "--op", "intersect", "--with", "[1,3)"]).trim(), "[1, 2]");
    assert_eq!(code(&["set", "--set", "(1,0)"]), 2);
}

#[test]
fn filter_commands() {
    let all = stdout(&["filters", "enumerate", "--universe", "3"]);
    assert_eq!(all.lines().count(), 3);
    assert_eq!(code(&["filters", "check", "--universe", "3", "--family", "{1},{1,2},{1,3},{1,2,3}"]), 0);
    assert_eq!(code(&["filters", "check", "--universe", "3", "--family", "{1},{1,2}"]), 1);
    assert_eq!(code(&["filters", "check", "--universe", "3", "--family", "{4}"]), 2);
    assert_eq!(code(&["filters", "enumerate", "--universe", "17"]), 2);
    let part = stdout(&["filters", "partition", "--universe", "3", "--family", "{1},{1,2},{1,3},{1,2,3}", "--parts", "{1},{2,3}"]);
    assert_eq!(part.trim(), "part 1 {1}");
}

#[test]
fn transfer_commands() {
    let starred = stdout(&["transfer", "star", "--prop", "(forall z in C)(exists w in C)[z*w = 1]"]);
    assert_eq!(starred.trim(), "(forall z in *C)(exists w in *C)[z*w = 1]");
    assert_eq!(code(&["transfer", "star", "--prop", "(forall x)[x = x]"]), 2);
    let lint = run(&["transfer", "lint", "--prop", "(forall S in P(R))[bounded(S) -> has_sup(S)]"]);
    assert!(!String::from_utf8(lint.stdout).unwrap().trim().is_empty());
    let model = temp_file("z5.json", r#"{"C": {"set": [1, 2, 3, 4]}, "modulus": 5}"#);
    let m = model.to_str().unwrap();
    assert_eq!(code(&["transfer", "eval", "--prop", "(forall z in C)(exists w in C)[z*w = 1]", "--model", m]), 0);
    assert_eq!(code(&["transfer", "eval", "--prop", "(forall z in *C)(exists w in *C)[z*w = 1]", "--model", m]), 0);
    assert_eq!(code(&["transfer", "eval", "--prop", "(forall z in C)[z = 1]", "--model", m]), 1);
    std::fs::remove_file(model).unwrap();
}

#[test]
fn probe_catalog_override() {
    let probes = temp_file("probes.json", r#"{"infinitesimals": ["d^3"], "infinite": ["d^(-3)"]}"#);
    let p = probes.to_str().unwrap();
    assert_eq!(stdout(&["--probes", p, "derive", "--expr", "x^2", "--at", "5"]).trim(), "10");
    let bad = temp_file("bad.json", r#"{"infinitesimals": ["1"], "infinite": ["d^(-1)"]}"#);
    assert_ne!(code(&["--probes", bad.to_str().unwrap(), "derive", "--expr", "x", "--at", "0"]), 0);
    std::fs::remove_file(probes).unwrap();
    std::fs::remove_file(bad).unwrap();
}

#[test]
fn output_is_deterministic() {
    for args in [
        &["--json", "ucont", "--expr", "1/x", "--domain", "(0,inf)"][..],
        &["--backend", "decimal", "converge", "--family", "exp(-(x-n)^2)"],
        &["filters", "enumerate", "--universe", "4"],
        &["eval", "--expr", "exp(1/d)*(exp(d) - 1)"],
    ] {
        let a = run(args);
        let b = run(args);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        assert_eq!(a.status.code(), b.status.code());
    }
}

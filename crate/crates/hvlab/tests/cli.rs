use std::path::Path;
use std::process::Command as Process;

use clap::Parser;
use hvlab::cli::{run, CommandConfig, EXIT_ERROR, EXIT_NEGATIVE, EXIT_OK};
use hvlab::format::{self, Document};
use hvlab::report::{parse_machine, Level};
use hvlab_core::{build_demo, Rational};
use serde_json::Value;

struct Run {
    code: i32,
    out: String,
    err: String,
}

fn hvlab(args: &[&str]) -> Run {
    let mut argv = vec!["hvlab"];
    argv.extend_from_slice(args);
    let config = CommandConfig::try_parse_from(argv).expect("valid arguments");
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&config, &mut out, &mut err);
    Run {
        code,
        out: String::from_utf8(out).unwrap(),
        err: String::from_utf8(err).unwrap(),
    }
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

#[test]
fn check_counterexample_prints_witness_and_exits_1() {
    let run = hvlab(&["check", "demo:counterexample"]);
    assert_eq!(run.code, EXIT_NEGATIVE);
    assert!(run.out.contains("deterministic: no"));
    assert!(run.out.contains("CH-factorizable: no"));
    assert!(run.out.contains("witness λ0 (+1,+1): 1/2 ≠ 1/4"));
    assert!(run.err.is_empty());
}

#[test]
fn check_selects_single_verdicts() {
    let run = hvlab(&["check", "demo:product-noise", "--factorability"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.out.contains("CH-factorizable: yes"));
    assert!(!run.out.contains("deterministic"));

    let run = hvlab(&["check", "demo:product-noise", "--determinism"]);
    assert_eq!(run.code, EXIT_NEGATIVE);
    assert!(run.out.contains("deterministic: no"));
    assert!(!run.out.contains("CH-factorizable"));

    assert_eq!(hvlab(&["check", "demo:deterministic-pair"]).code, EXIT_OK);
}

#[test]
fn machine_check_parses_back_exactly() {
    let run = hvlab(&["--format", "machine", "check", "demo:counterexample"]);
    assert_eq!(run.code, EXIT_NEGATIVE);
    let report = parse_machine(&run.out).unwrap();
    assert_eq!(report.level, Level::Lambda);
    let w = report.ch_factorability.unwrap().into_witness().unwrap();
    assert_eq!((w.lhs, w.rhs), (r("1/2"), r("1/4")));
    assert_eq!(w.outcome, ["+1", "+1"]);
    assert_eq!(w.lambda, "λ0");
}

#[test]
fn determinize_then_check_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aug.json");
    let run = hvlab(&["determinize", "demo:counterexample", "-o", path_str(&out)]);
    assert_eq!(run.code, EXIT_OK, "{}", run.err);
    assert!(run.out.contains("breakpoints 0, 1/2, 1"));

    let run = hvlab(&["check", path_str(&out)]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.out.contains("deterministic: yes"));
    assert!(run.out.contains("CH-factorizable: yes"));
    assert_eq!(hvlab(&["validate", path_str(&out)]).code, EXIT_OK);
}

#[test]
fn determinize_one_context() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("aug.json");
    let run = hvlab(&[
        "determinize",
        "demo:prbox",
        "-o",
        path_str(&out),
        "--context",
        "A2B2",
    ]);
    assert_eq!(run.code, EXIT_OK);
    let Document::Augmented(aug) = format::load(path_str(&out)).unwrap() else {
        panic!("expected an augmented file");
    };
    assert_eq!(aug.contexts.len(), 1);
    assert_eq!(aug.contexts[0].context, "A2B2");

    let run = hvlab(&[
        "determinize",
        "demo:prbox",
        "-o",
        path_str(&out),
        "--context",
        "XY",
    ]);
    assert_eq!(run.code, EXIT_ERROR);
    assert!(run.err.contains("\"XY\""));
}

#[test]
fn factorize_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("f.json");
    let run = hvlab(&["factorize", "demo:counterexample", "-o", path_str(&out)]);
    assert_eq!(run.code, EXIT_NEGATIVE);
    assert!(run.out.contains("1/2 ≠ 1/4"));
    assert!(!out.exists());

    let run = hvlab(&["factorize", "demo:product-noise", "-o", path_str(&out)]);
    assert_eq!(run.code, EXIT_OK);
    assert!(matches!(
        format::load(path_str(&out)).unwrap(),
        Document::Factorized(_)
    ));
    assert_eq!(hvlab(&["validate", path_str(&out)]).code, EXIT_OK);
    let run = hvlab(&["check", path_str(&out), "--factorability"]);
    assert_eq!(run.code, EXIT_OK);

    let run = hvlab(&[
        "--format",
        "machine",
        "factorize",
        "demo:prbox",
        "-o",
        path_str(&out),
    ]);
    assert_eq!(run.code, EXIT_NEGATIVE);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    assert_eq!(v["factorizable"], false);
    assert_eq!(v["ch_witness"]["lhs"], "1/2");
}

#[test]
fn chsh_values() {
    let run = hvlab(&["chsh", "demo:singlet-chsh"]);
    assert_eq!(run.code, EXIT_OK);
    assert!(run.out.contains("S = 35355339/12500000 (≈ 2.828427)"));

    let run = hvlab(&["--format", "machine", "chsh", "demo:prbox"]);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    assert_eq!(v["S"], "4");

    let run = hvlab(&[
        "--format",
        "machine",
        "chsh",
        "demo:prbox",
        "--contexts",
        "A2B2,A2B1,A1B2,A1B1",
    ]);
    assert_eq!(run.code, EXIT_OK);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    // -1 + 1 + 1 - 1
    assert_eq!(v["S"], "0");

    let run = hvlab(&["chsh", "demo:prbox", "--contexts", "A1B1,A1B2"]);
    assert_eq!(run.code, EXIT_ERROR);
    let run = hvlab(&["chsh", "demo:prbox", "--contexts", "A1B1,A1B1,A2B1,A2B2"]);
    assert_eq!(run.code, EXIT_ERROR);
    assert_eq!(run.err.lines().count(), 1);
    let run = hvlab(&["chsh", "demo:counterexample"]);
    assert_eq!(run.code, EXIT_ERROR);
}

#[test]
fn chsh_on_a_file_uses_the_first_pattern() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("p.json");
    assert_eq!(
        hvlab(&["demo", "product-noise", "-o", path_str(&out)]).code,
        EXIT_OK
    );
    let run = hvlab(&["--format", "machine", "chsh", path_str(&out)]);
    assert_eq!(run.code, EXIT_OK);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    let s: Rational = v["S"].as_str().unwrap().parse().unwrap();
    assert!(s.abs() <= Rational::from_integer(2));
}

#[test]
fn demo_writes_the_canonical_file() {
    let dir = tempfile::tempdir().unwrap();
    for name in hvlab_core::demos::DEMO_NAMES {
        let out = dir.path().join(format!("{name}.json"));
        assert_eq!(hvlab(&["demo", name, "-o", path_str(&out)]).code, EXIT_OK);
        let text = std::fs::read_to_string(&out).unwrap();
        assert_eq!(text, format::write_scenario(&build_demo(name).unwrap()));
        assert_eq!(hvlab(&["validate", path_str(&out)]).code, EXIT_OK);
    }
    let run = hvlab(&["demo", "prbox", "-o", "-"]);
    assert_eq!(
        run.out,
        format::write_scenario(&build_demo("prbox").unwrap())
    );
}

#[test]
fn list_demos_names_every_demo() {
    let run = hvlab(&["list-demos"]);
    assert_eq!(run.code, EXIT_OK);
    for name in hvlab_core::demos::DEMO_NAMES {
        assert!(run.out.lines().any(|l| l.starts_with(name)));
    }
    let run = hvlab(&["--format", "machine", "list-demos"]);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    assert_eq!(
        v.as_array().unwrap().len(),
        hvlab_core::demos::DEMO_NAMES.len()
    );
}

#[test]
fn errors_exit_2_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("missing.json");
    for args in [
        vec!["check", "demo:nope"],
        vec!["validate", path_str(&missing)],
        vec!["demo", "nope", "-o", "x.json"],
    ] {
        let run = hvlab(&args);
        assert_eq!(run.code, EXIT_ERROR, "{args:?}");
        assert_eq!(run.err.lines().count(), 1, "{args:?}: {}", run.err);
        assert!(run.err.starts_with("error: "));
    }
    let run = hvlab(&["check", path_str(&missing)]);
    assert!(run.err.contains("missing.json"));
    let run = hvlab(&["check", "demo:nope"]);
    assert!(run.err.contains("\"nope\""));
}

#[test]
fn malformed_and_invalid_files_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let text = format::write_scenario(&build_demo("counterexample").unwrap());

    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, text.replace("\"1/2\"", "\"1/x\"")).unwrap();
    let run = hvlab(&["check", path_str(&bad)]);
    assert_eq!(run.code, EXIT_ERROR);
    assert!(run.err.contains("\"1/x\""), "{}", run.err);
    assert!(run.err.contains("bad.json"));

    let invalid = dir.path().join("invalid.json");
    std::fs::write(&invalid, text.replacen("\"1/2\"", "\"1/3\"", 1)).unwrap();
    let run = hvlab(&["validate", path_str(&invalid)]);
    assert_eq!(run.code, EXIT_ERROR);
    assert!(run.out.starts_with("invalid: counterexample"));
    assert!(run.out.contains("contexts[AB].table[λ0]"));
    assert_eq!(hvlab(&["check", path_str(&invalid)]).code, EXIT_ERROR);
    assert_eq!(
        hvlab(&["determinize", path_str(&invalid), "-o", "x.json"]).code,
        EXIT_ERROR
    );

    let run = hvlab(&["--format", "machine", "validate", path_str(&invalid)]);
    let v: Value = serde_json::from_str(&run.out).unwrap();
    assert_eq!(v["valid"], false);
    assert!(!v["violations"].as_array().unwrap().is_empty());
}

#[test]
fn determinize_rejects_non_scenario_input() {
    let dir = tempfile::tempdir().unwrap();
    let aug = dir.path().join("aug.json");
    assert_eq!(
        hvlab(&["determinize", "demo:counterexample", "-o", path_str(&aug)]).code,
        EXIT_OK
    );
    let run = hvlab(&["determinize", path_str(&aug), "-o", path_str(&aug)]);
    assert_eq!(run.code, EXIT_ERROR);
    assert!(run.err.contains("augmented scenario"));
}

#[test]
fn usage_errors() {
    assert!(CommandConfig::try_parse_from(["hvlab"]).is_err());
    assert!(CommandConfig::try_parse_from(["hvlab", "determinize", "demo:prbox"]).is_err());
    assert!(CommandConfig::try_parse_from(["hvlab", "--format", "xml", "list-demos"]).is_err());
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_hvlab");
    let status = |args: &[&str]| Process::new(bin).args(args).output().unwrap();
    let out = status(&["check", "demo:counterexample"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("1/2 ≠ 1/4"));
    assert_eq!(
        status(&["check", "demo:deterministic-pair"]).status.code(),
        Some(0)
    );
    assert_eq!(status(&["check", "demo:nope"]).status.code(), Some(2));
    assert_eq!(status(&["nonsense"]).status.code(), Some(2));
}

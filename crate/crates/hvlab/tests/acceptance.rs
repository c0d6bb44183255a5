//! One pass/fail line per acceptance criterion; exits non-zero if any fails.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use clap::Parser;
use hvlab::cli::{run, CommandConfig, EXIT_NEGATIVE};
use hvlab::format::{read_document, write_document, write_scenario, Document};
use hvlab::report::parse_machine;
use hvlab_core::analysis::recheck_ch_witness;
use hvlab_core::demos::{default_chsh_contexts, DEMO_NAMES};
use hvlab_core::determinize::analyze_gamma;
use hvlab_core::random::{self, Shape};
use hvlab_core::{
    build_demo, build_shared_noise, chsh, chsh_patterns, determinize_all, factorize_independent,
    is_ch_factorizable, is_deterministic, is_gamma_factorizable, marginalize, reconstruct,
    verify_lemma_iii, ChshPattern, Factorization, Rational,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Check);

fn r(s: &str) -> Rational {
    s.parse().unwrap()
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn criterion_1() -> Check {
    let config = CommandConfig::try_parse_from([
        "hvlab",
        "--format",
        "machine",
        "check",
        "demo:counterexample",
    ])
    .map_err(|e| e.to_string())?;
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let code = run(&config, &mut out, &mut err);
    ensure(code == EXIT_NEGATIVE, || format!("exit code {code}"))?;
    let report = parse_machine(&String::from_utf8_lossy(&out)).map_err(|e| e.to_string())?;
    let w = report
        .ch_factorability
        .and_then(|v| v.into_witness())
        .ok_or("no CH witness")?;
    ensure(
        w.lambda == "λ0" && w.outcome == ["+1", "+1"] && w.lhs == r("1/2") && w.rhs == r("1/4"),
        || format!("witness {w}"),
    )?;
    Ok(format!("witness {w}"))
}

fn criterion_2() -> Check {
    let mut g = rng(2);
    let shape = Shape::default();
    for i in 0..1000 {
        let s = random::deterministic(&mut g, &shape);
        ensure(
            is_deterministic(&s).map_err(|e| e.to_string())?.holds(),
            || format!("scenario {i} is not deterministic"),
        )?;
        if let Some(w) = is_ch_factorizable(&s).map_err(|e| e.to_string())?.witness() {
            return Err(format!("scenario {i}: {w}"));
        }
    }
    Ok("1000 deterministic scenarios CH-factorizable".into())
}

fn criterion_3() -> Check {
    let mut g = rng(3);
    let shapes = [
        Shape::default(),
        Shape {
            parties: 3..=3,
            ..Shape::default()
        },
    ];
    for i in 0..1000 {
        let s = random::general(&mut g, &shapes[i % 2]);
        let aug = determinize_all(&s).map_err(|e| e.to_string())?;
        let report = analyze_gamma(&aug).map_err(|e| e.to_string())?;
        ensure(report.deterministic(), || {
            format!("scenario {i}: γ-level not deterministic")
        })?;
        ensure(
            is_gamma_factorizable(&aug).map_err(|e| e.to_string())?,
            || format!("scenario {i}: γ-level not factorizable"),
        )?;
        ensure(marginalize(&aug).map_err(|e| e.to_string())? == s, || {
            format!("scenario {i}: marginal differs from input")
        })?;
    }
    Ok("1000 determinizations deterministic, γ-factorizable, exact marginals".into())
}

fn criterion_4() -> Check {
    let mut g = rng(4);
    let shapes = [
        Shape::default(),
        Shape {
            parties: 3..=3,
            ..Shape::default()
        },
    ];
    for i in 0..1000 {
        let s = random::product(&mut g, &shapes[i % 2]);
        let Factorization::Factorized(fm) = factorize_independent(&s).map_err(|e| e.to_string())?
        else {
            return Err(format!("product scenario {i} not factorized"));
        };
        ensure(verify_lemma_iii(&fm).map_err(|e| e.to_string())?, || {
            format!("product scenario {i}: verify_lemma_iii false")
        })?;
        for c in &s.contexts {
            for p in &s.lambda.points {
                let original = s.joint_table(&c.id, &p.id).map_err(|e| e.to_string())?;
                let rebuilt = reconstruct(&fm, &c.id, &p.id).map_err(|e| e.to_string())?;
                ensure(rebuilt == original, || {
                    format!("product scenario {i}: {} at {}", c.id, p.id)
                })?;
            }
        }
    }
    for i in 0..1000 {
        let s = random::perturbed(&mut g, &shapes[i % 2]);
        let Factorization::NotFactorizable(w) =
            factorize_independent(&s).map_err(|e| e.to_string())?
        else {
            return Err(format!("perturbed scenario {i} factorized"));
        };
        let (lhs, rhs) = recheck_ch_witness(&s, &w).map_err(|e| e.to_string())?;
        ensure(lhs != rhs && lhs == w.lhs && rhs == w.rhs, || {
            format!("perturbed scenario {i}: witness {w} re-evaluates to {lhs} vs {rhs}")
        })?;
    }
    Ok("1000 products factorized exactly; 1000 perturbed rejected with rechecked witnesses".into())
}

fn criterion_5() -> Check {
    let s = build_demo("counterexample").map_err(|e| e.to_string())?;
    let shared = build_shared_noise(&s).map_err(|e| e.to_string())?;
    ensure(shared.shared, || "model not flagged shared".into())?;
    let back = marginalize(&shared).map_err(|e| e.to_string())?;
    ensure(back == s, || "λ-level table differs".into())?;
    let verdict = is_ch_factorizable(&back).map_err(|e| e.to_string())?;
    let w = verdict
        .witness()
        .ok_or("shared-noise model became CH-factorizable at λ")?;
    Ok(format!("λ table reproduced; still non-factorizable ({w})"))
}

fn criterion_6() -> Check {
    let mut g = rng(6);
    let shape = Shape::chsh();
    let two = Rational::from_integer(2);
    let mut patterns = 0;
    for i in 0..600 {
        let s = match i % 3 {
            0 => random::deterministic(&mut g, &shape),
            _ => random::product(&mut g, &shape),
        };
        ensure(
            is_ch_factorizable(&s).map_err(|e| e.to_string())?.holds(),
            || format!("scenario {i} not λ-factorizable"),
        )?;
        let found = chsh_patterns(&s);
        ensure(!found.is_empty(), || {
            format!("scenario {i} has no CHSH pattern")
        })?;
        for p in found {
            let value = chsh(&s, &p).map_err(|e| e.to_string())?;
            ensure(value.abs() <= two, || {
                format!("scenario {i}: S = {value} for {:?}", p.0)
            })?;
            patterns += 1;
        }
    }
    let demo_s = |name: &str| -> Result<Rational, String> {
        let s = build_demo(name).map_err(|e| e.to_string())?;
        let ids = default_chsh_contexts(name).ok_or("no default pattern")?;
        chsh(&s, &ChshPattern::new(ids)).map_err(|e| e.to_string())
    };
    let prbox = demo_s("prbox")?;
    ensure(prbox == Rational::from_integer(4), || {
        format!("prbox S = {prbox}")
    })?;
    let singlet = demo_s("singlet-chsh")?;
    let gap = (singlet.clone() - r("28284271/10000000")).abs();
    ensure(gap < r("1/1000000"), || format!("singlet S = {singlet}"))?;
    Ok(format!(
        "600 scenarios, {patterns} patterns with |S| ≤ 2; prbox S = {prbox}; singlet S = {singlet} ≈ {:.7}",
        singlet.to_f64()
    ))
}

fn criterion_7() -> Check {
    let round_trip = |label: &str, text: String| -> Result<(), String> {
        let doc = read_document(&text).map_err(|e| format!("{label}: {e}"))?;
        ensure(write_document(&doc) == text, || {
            format!("{label}: bytes differ")
        })
    };
    for name in DEMO_NAMES {
        let s = build_demo(name).map_err(|e| e.to_string())?;
        round_trip(name, write_scenario(&s))?;
        let doc = read_document(&write_scenario(&s)).map_err(|e| e.to_string())?;
        ensure(doc == Document::Scenario(s), || {
            format!("{name}: values differ")
        })?;
    }
    let mut g = rng(7);
    let shapes = [
        Shape::default(),
        Shape::chsh(),
        Shape {
            parties: 3..=3,
            ..Shape::default()
        },
    ];
    for i in 0..100 {
        let s = random::general(&mut g, &shapes[i % 3]);
        round_trip(&format!("random scenario {i}"), write_scenario(&s))?;
    }
    Ok(format!(
        "{} demos and 100 random scenarios byte-identical",
        DEMO_NAMES.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 7] = [
        (
            "1 counterexample witness",
            Duration::from_secs(1),
            criterion_1,
        ),
        (
            "2 deterministic ⇒ CH-factorizable",
            Duration::from_secs(10),
            criterion_2,
        ),
        ("3 determinization", Duration::from_secs(60), criterion_3),
        (
            "4 independent factorization",
            Duration::from_secs(60),
            criterion_4,
        ),
        ("5 shared noise", Duration::from_secs(1), criterion_5),
        ("6 CHSH bound", Duration::from_secs(30), criterion_6),
        ("7 file round trip", Duration::from_secs(60), criterion_7),
    ];
    let mut failed = 0;
    for (name, budget, check) in criteria {
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (status, detail) = match result {
            Ok(_) if elapsed > budget => ("FAIL", format!("took {elapsed:.2?}, budget {budget:?}")),
            Ok(detail) => ("PASS", detail),
            Err(detail) => ("FAIL", detail),
        };
        if status == "FAIL" {
            failed += 1;
        }
        println!("criterion {name}: {status} ({elapsed:.2?}) {detail}");
    }
    println!("acceptance: {} of 7 criteria passed", 7 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

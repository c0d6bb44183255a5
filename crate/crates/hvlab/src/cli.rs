//! Command-line surface.
//!
//! Exit codes: 0 for success and affirmative verdicts, 1 for negative
//! verdicts (the witness is printed), 2 for usage, IO and validation errors
//! (one `error:` line on stderr).

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use hvlab_core::demos::{default_chsh_contexts, list_demos};
use hvlab_core::determinize::analyze_gamma;
use hvlab_core::{
    analyze, chsh, chsh_patterns, correlation, determinize, determinize_all, factorize_independent,
    marginalize, marginalize_model, ChshPattern, Factorization, Scenario,
};
use serde_json::{json, Value};

use crate::format::{self, Document, DEMO_PREFIX};
use crate::report::{self, approx, CheckReport, Level};

pub const EXIT_OK: i32 = 0;
pub const EXIT_NEGATIVE: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Text,
    /// JSON with exact rationals as "p/q" strings.
    Machine,
}

/// Exact workbench for finite hidden-variable models.
#[derive(Debug, Clone, Parser)]
#[command(name = "hvlab", version)]
pub struct CommandConfig {
    #[arg(long, global = true, value_enum, default_value_t)]
    pub format: OutputFormat,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Check a file against every scenario invariant.
    Validate { input: String },
    /// Decide determinism and CH factorability (both unless one is chosen).
    Check {
        /// File or demo:NAME.
        input: String,
        #[arg(long)]
        determinism: bool,
        #[arg(long)]
        factorability: bool,
    },
    /// Write the determinized (augmented) scenario.
    Determinize {
        input: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Determinize only this context.
        #[arg(long)]
        context: Option<String>,
    },
    /// Write independent per-party noises, or print why none exist.
    Factorize {
        input: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Exact CHSH value S = E11 + E12 + E21 - E22.
    Chsh {
        /// File or demo:NAME.
        input: String,
        /// Four contexts in the order C11,C12,C21,C22.
        #[arg(long, value_delimiter = ',')]
        contexts: Option<Vec<String>>,
    },
    /// Write a built-in scenario ("-" for stdout).
    Demo {
        name: String,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// List the built-in scenarios.
    ListDemos,
}

struct Failure(String);

impl From<hvlab_core::Error> for Failure {
    fn from(e: hvlab_core::Error) -> Self {
        Failure(e.to_string())
    }
}

impl From<format::FormatError> for Failure {
    fn from(e: format::FormatError) -> Self {
        Failure(e.to_string())
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure(format!("cannot write output: {e}"))
    }
}

type Outcome = Result<i32, Failure>;

/// Runs one command, writing reports to `out` and diagnostics to `err`.
pub fn run(config: &CommandConfig, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let result = match &config.command {
        Command::Validate { input } => validate(config.format, input, out),
        Command::Check {
            input,
            determinism,
            factorability,
        } => {
            let both = !determinism && !factorability;
            check(
                config.format,
                input,
                both || *determinism,
                both || *factorability,
                out,
            )
        }
        Command::Determinize {
            input,
            output,
            context,
        } => run_determinize(config.format, input, output, context.as_deref(), out),
        Command::Factorize { input, output } => run_factorize(config.format, input, output, out),
        Command::Chsh { input, contexts } => {
            run_chsh(config.format, input, contexts.as_deref(), out)
        }
        Command::Demo { name, output } => run_demo(config.format, name, output, out),
        Command::ListDemos => run_list(config.format, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure(message)) => {
            let line = message.replace('\n', " ");
            let _ = writeln!(err, "error: {line}");
            EXIT_ERROR
        }
    }
}

fn load(input: &str) -> Result<Document, Failure> {
    format::load(input).map_err(|e| match e {
        format::FormatError::Io { .. } | format::FormatError::Core(_) => Failure(e.to_string()),
        other => Failure(format!("{input}: {other}")),
    })
}

fn load_scenario(input: &str) -> Result<Scenario, Failure> {
    match load(input)? {
        Document::Scenario(s) => {
            s.ensure_valid()
                .map_err(|e| Failure(format!("{input}: {e}")))?;
            Ok(s)
        }
        other => Err(Failure(format!(
            "{input}: expected a scenario file, found a {}",
            other.kind()
        ))),
    }
}

/// The λ-level statistics of any document.
fn lambda_scenario(input: &str, doc: &Document) -> Result<Scenario, Failure> {
    let at = |e: hvlab_core::Error| Failure(format!("{input}: {e}"));
    match doc {
        Document::Scenario(s) => s.ensure_valid().map(|()| s.clone()).map_err(at),
        Document::Augmented(a) => marginalize(a).map_err(at),
        Document::Factorized(f) => marginalize_model(f).map_err(at),
    }
}

fn print_json(out: &mut dyn Write, v: &Value) -> std::io::Result<()> {
    writeln!(
        out,
        "{}",
        serde_json::to_string_pretty(v).expect("JSON values serialize")
    )
}

fn validate(fmt: OutputFormat, input: &str, out: &mut dyn Write) -> Outcome {
    let doc = load(input)?;
    let base = doc.base();
    let mut violations: Vec<(String, String)> = base
        .validate()
        .violations
        .into_iter()
        .map(|v| (v.path, v.message))
        .collect();
    if violations.is_empty() {
        let extra = match &doc {
            Document::Scenario(_) => Ok(()),
            Document::Augmented(a) => a.check(),
            Document::Factorized(f) => f.check(),
        };
        if let Err(e) = extra {
            violations.push((doc.kind().to_string(), e.to_string()));
        }
    }
    match fmt {
        OutputFormat::Text => {
            let verdict = if violations.is_empty() {
                "valid"
            } else {
                "invalid"
            };
            writeln!(out, "{verdict}: {} ({})", base.name, doc.kind())?;
            for (path, message) in &violations {
                writeln!(out, "  {path}: {message}")?;
            }
        }
        OutputFormat::Machine => print_json(
            out,
            &json!({
                "scenario": base.name,
                "kind": doc.kind(),
                "valid": violations.is_empty(),
                "violations": violations
                    .iter()
                    .map(|(p, m)| json!({"path": p, "message": m}))
                    .collect::<Vec<_>>(),
            }),
        )?,
    }
    if violations.is_empty() {
        Ok(EXIT_OK)
    } else {
        let (path, message) = &violations[0];
        Err(Failure(format!(
            "{input}: {} violation(s), first at {path}: {message}",
            violations.len()
        )))
    }
}

fn check(
    fmt: OutputFormat,
    input: &str,
    determinism: bool,
    factorability: bool,
    out: &mut dyn Write,
) -> Outcome {
    let doc = load(input)?;
    let at = |e: hvlab_core::Error| Failure(format!("{input}: {e}"));
    let (analysis, level) = match &doc {
        Document::Augmented(a) => (analyze_gamma(a).map_err(at)?, Level::Gamma),
        other => (
            analyze(&lambda_scenario(input, other)?).map_err(at)?,
            Level::Lambda,
        ),
    };
    let report = CheckReport::from_analysis(analysis, level, determinism, factorability);
    match fmt {
        OutputFormat::Text => write!(out, "{}", report::render_text(&report))?,
        OutputFormat::Machine => write!(out, "{}", report::render_machine(&report))?,
    }
    Ok(if report.affirmative() {
        EXIT_OK
    } else {
        EXIT_NEGATIVE
    })
}

fn breakpoint_list(points: &[hvlab_core::Rational]) -> String {
    points
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn run_determinize(
    fmt: OutputFormat,
    input: &str,
    output: &Path,
    context: Option<&str>,
    out: &mut dyn Write,
) -> Outcome {
    let s = load_scenario(input)?;
    let aug = match context {
        Some(id) => determinize(&s, id)?,
        None => determinize_all(&s)?,
    };
    format::save(output, &format::write_augmented(&aug))?;
    match fmt {
        OutputFormat::Text => {
            writeln!(
                out,
                "wrote {}: {} determinized context(s)",
                output.display(),
                aug.contexts.len()
            )?;
            for c in &aug.contexts {
                writeln!(
                    out,
                    "  {}: {} μ cell(s), breakpoints {}",
                    c.context,
                    c.noise.cell_count(),
                    breakpoint_list(c.noise.breakpoints())
                )?;
            }
        }
        OutputFormat::Machine => print_json(
            out,
            &json!({
                "output": output.display().to_string(),
                "contexts": aug.contexts.iter().map(|c| json!({
                    "context": c.context,
                    "breakpoints": c.noise.breakpoints().iter().map(ToString::to_string).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
            }),
        )?,
    }
    Ok(EXIT_OK)
}

fn run_factorize(fmt: OutputFormat, input: &str, output: &Path, out: &mut dyn Write) -> Outcome {
    let s = load_scenario(input)?;
    match factorize_independent(&s)? {
        Factorization::Factorized(fm) => {
            format::save(output, &format::write_factorized(&fm))?;
            match fmt {
                OutputFormat::Text => {
                    writeln!(out, "wrote {}: factorized model", output.display())?;
                    for x in &fm.xi {
                        writeln!(
                            out,
                            "  ξ[{}]: {} cell(s), breakpoints {}",
                            x.party,
                            x.noise.cell_count(),
                            breakpoint_list(x.noise.breakpoints())
                        )?;
                    }
                }
                OutputFormat::Machine => print_json(
                    out,
                    &json!({
                        "factorizable": true,
                        "output": output.display().to_string(),
                        "xi": fm.xi.iter().map(|x| json!({
                            "party": x.party,
                            "breakpoints": x.noise.breakpoints().iter().map(ToString::to_string).collect::<Vec<_>>(),
                        })).collect::<Vec<_>>(),
                    }),
                )?,
            }
            Ok(EXIT_OK)
        }
        Factorization::NotFactorizable(w) => {
            let report = CheckReport {
                scenario: s.name.clone(),
                level: Level::Lambda,
                determinism: None,
                ch_factorability: Some(hvlab_core::Verdict::Fails(w)),
            };
            match fmt {
                OutputFormat::Text => {
                    writeln!(out, "not factorizable; nothing written")?;
                    write!(out, "{}", report::render_text(&report))?;
                }
                OutputFormat::Machine => {
                    let mut v = report::to_machine(&report);
                    v["factorizable"] = json!(false);
                    print_json(out, &v)?;
                }
            }
            Ok(EXIT_NEGATIVE)
        }
    }
}

fn run_chsh(
    fmt: OutputFormat,
    input: &str,
    contexts: Option<&[String]>,
    out: &mut dyn Write,
) -> Outcome {
    let doc = load(input)?;
    let s = lambda_scenario(input, &doc)?;
    let pattern = match contexts {
        Some(ids) => {
            let ids: [String; 4] = ids.to_vec().try_into().map_err(|ids: Vec<String>| {
                Failure(format!(
                    "--contexts needs exactly 4 contexts, got {}",
                    ids.len()
                ))
            })?;
            ChshPattern(ids)
        }
        None => input
            .strip_prefix(DEMO_PREFIX)
            .and_then(default_chsh_contexts)
            .map(ChshPattern::new)
            .or_else(|| chsh_patterns(&s).into_iter().next())
            .ok_or_else(|| {
                Failure(format!(
                    "{input}: no CHSH pattern among the contexts; pass --contexts"
                ))
            })?,
    };
    let value = chsh(&s, &pattern)?;
    let correlations = pattern
        .0
        .iter()
        .map(|c| Ok((c.clone(), correlation(&s, c)?)))
        .collect::<Result<Vec<_>, hvlab_core::Error>>()?;
    let bounded = value.abs() <= hvlab_core::Rational::from_integer(2);
    match fmt {
        OutputFormat::Text => {
            writeln!(out, "contexts: {}", pattern.0.join(", "))?;
            for (c, e) in &correlations {
                writeln!(out, "E({c}) = {e} (≈ {})", approx(e))?;
            }
            writeln!(out, "S = {value} (≈ {})", approx(&value))?;
            writeln!(out, "|S| ≤ 2: {}", if bounded { "yes" } else { "no" })?;
        }
        OutputFormat::Machine => print_json(
            out,
            &json!({
                "scenario": s.name,
                "contexts": pattern.0,
                "correlations": correlations
                    .iter()
                    .map(|(c, e)| json!({"context": c, "value": e.to_string(), "approx": e.to_f64()}))
                    .collect::<Vec<_>>(),
                "S": value.to_string(),
                "S_approx": value.to_f64(),
                "within_bound": bounded,
            }),
        )?,
    }
    Ok(EXIT_OK)
}

fn run_demo(fmt: OutputFormat, name: &str, output: &Path, out: &mut dyn Write) -> Outcome {
    let s = hvlab_core::build_demo(name)?;
    let text = format::write_scenario(&s);
    if output.as_os_str() == "-" {
        write!(out, "{text}")?;
        return Ok(EXIT_OK);
    }
    format::save(output, &text)?;
    match fmt {
        OutputFormat::Text => writeln!(out, "wrote {}: demo {name}", output.display())?,
        OutputFormat::Machine => print_json(
            out,
            &json!({"demo": name, "output": output.display().to_string()}),
        )?,
    }
    Ok(EXIT_OK)
}

fn run_list(fmt: OutputFormat, out: &mut dyn Write) -> Outcome {
    let demos = list_demos();
    match fmt {
        OutputFormat::Text => {
            let width = demos.iter().map(|(n, _)| n.len()).max().unwrap_or(0);
            for (name, description) in &demos {
                writeln!(out, "{name:width$}  {description}")?;
            }
        }
        OutputFormat::Machine => print_json(
            out,
            &Value::Array(
                demos
                    .iter()
                    .map(|(n, d)| json!({"name": n, "description": d}))
                    .collect(),
            ),
        )?,
    }
    Ok(EXIT_OK)
}

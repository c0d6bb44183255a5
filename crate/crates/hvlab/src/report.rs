//! Text and machine (JSON) renderings of analysis verdicts.
//!
//! Machine output always carries exact rationals as `p/q` strings; decimal
//! approximations sit next to them under `*_approx` keys and are ignored when
//! parsing back.

use hvlab_core::{AnalysisReport, ChWitness, DeterminismWitness, Rational, Verdict};
use serde_json::{json, Map, Value};

/// Which level a report describes: the hidden variable λ itself, or the
/// augmented variable γ = (λ, μ) of a determinized file.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Level {
    Lambda,
    Gamma,
}

impl Level {
    pub fn symbol(self) -> &'static str {
        match self {
            Level::Lambda => "λ",
            Level::Gamma => "γ",
        }
    }

    fn parse(s: &str) -> Option<Level> {
        match s {
            "λ" => Some(Level::Lambda),
            "γ" => Some(Level::Gamma),
            _ => None,
        }
    }
}

/// Selected verdicts of one `check` run; an unselected check is `None`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CheckReport {
    pub scenario: String,
    pub level: Level,
    pub determinism: Option<Verdict<DeterminismWitness>>,
    pub ch_factorability: Option<Verdict<ChWitness>>,
}

impl CheckReport {
    pub fn from_analysis(
        report: AnalysisReport,
        level: Level,
        determinism: bool,
        factorability: bool,
    ) -> Self {
        CheckReport {
            scenario: report.scenario,
            level,
            determinism: determinism.then_some(report.determinism),
            ch_factorability: factorability.then_some(report.ch_factorability),
        }
    }

    /// True when every selected verdict holds.
    pub fn affirmative(&self) -> bool {
        self.determinism.as_ref().is_none_or(Verdict::holds)
            && self.ch_factorability.as_ref().is_none_or(Verdict::holds)
    }
}

pub fn approx(r: &Rational) -> String {
    format!("{:.6}", r.to_f64())
}

fn yes_no(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

pub fn render_text(report: &CheckReport) -> String {
    let mut out = format!(
        "scenario: {} (level {})\n",
        report.scenario,
        report.level.symbol()
    );
    if let Some(v) = &report.determinism {
        out += &format!("deterministic: {}\n", yes_no(v.holds()));
        if let Some(w) = v.witness() {
            out += &format!("  witness {w} in context {}\n", w.context);
        }
    }
    if let Some(v) = &report.ch_factorability {
        out += &format!("CH-factorizable: {}\n", yes_no(v.holds()));
        if let Some(w) = v.witness() {
            out += &format!(
                "  witness {w} in context {} (≈ {} vs {})\n",
                w.context,
                approx(&w.lhs),
                approx(&w.rhs)
            );
        }
    }
    out
}

fn exact(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn outcome(tuple: &[String]) -> Value {
    Value::Array(tuple.iter().cloned().map(Value::String).collect())
}

pub fn to_machine(report: &CheckReport) -> Value {
    let mut root = Map::new();
    root.insert("scenario".into(), json!(report.scenario));
    root.insert("level".into(), json!(report.level.symbol()));
    if let Some(v) = &report.determinism {
        root.insert("deterministic".into(), json!(v.holds()));
        root.insert(
            "determinism_witness".into(),
            v.witness().map_or(Value::Null, |w| {
                json!({
                    "context": w.context,
                    "lambda": w.lambda,
                    "outcome": outcome(&w.outcome),
                    "probability": exact(&w.probability),
                    "probability_approx": w.probability.to_f64(),
                })
            }),
        );
    }
    if let Some(v) = &report.ch_factorability {
        root.insert("ch_factorizable".into(), json!(v.holds()));
        root.insert(
            "ch_witness".into(),
            v.witness().map_or(Value::Null, |w| {
                json!({
                    "context": w.context,
                    "lambda": w.lambda,
                    "outcome": outcome(&w.outcome),
                    "lhs": exact(&w.lhs),
                    "rhs": exact(&w.rhs),
                    "lhs_approx": w.lhs.to_f64(),
                    "rhs_approx": w.rhs.to_f64(),
                })
            }),
        );
    }
    Value::Object(root)
}

pub fn render_machine(report: &CheckReport) -> String {
    let mut s = serde_json::to_string_pretty(&to_machine(report)).expect("JSON values serialize");
    s.push('\n');
    s
}

#[derive(Debug, thiserror::Error)]
#[error("malformed report: {0}")]
pub struct ReportError(String);

fn get<'a>(v: &'a Value, key: &str) -> Result<&'a Value, ReportError> {
    v.get(key)
        .ok_or_else(|| ReportError(format!("missing {key:?}")))
}

fn get_str(v: &Value, key: &str) -> Result<String, ReportError> {
    get(v, key)?
        .as_str()
        .map(str::to_string)
        .ok_or_else(|| ReportError(format!("{key:?} is not a string")))
}

fn get_rational(v: &Value, key: &str) -> Result<Rational, ReportError> {
    get_str(v, key)?
        .parse()
        .map_err(|e| ReportError(format!("{key:?}: {e}")))
}

fn get_outcome(v: &Value) -> Result<Vec<String>, ReportError> {
    get(v, "outcome")?
        .as_array()
        .and_then(|a| a.iter().map(|x| x.as_str().map(str::to_string)).collect())
        .ok_or_else(|| ReportError("\"outcome\" is not a list of labels".into()))
}

fn verdict<W>(
    root: &Value,
    flag: &str,
    witness_key: &str,
    parse: impl Fn(&Value) -> Result<W, ReportError>,
) -> Result<Option<Verdict<W>>, ReportError> {
    let Some(flag) = root.get(flag) else {
        return Ok(None);
    };
    match (flag.as_bool(), root.get(witness_key)) {
        (Some(true), None | Some(Value::Null)) => Ok(Some(Verdict::Holds)),
        (Some(false), Some(w)) if !w.is_null() => Ok(Some(Verdict::Fails(parse(w)?))),
        _ => Err(ReportError(format!("inconsistent {witness_key:?}"))),
    }
}

/// Parses machine output back into exact report values.
pub fn parse_machine(text: &str) -> Result<CheckReport, ReportError> {
    let root: Value = serde_json::from_str(text).map_err(|e| ReportError(e.to_string()))?;
    let level = get_str(&root, "level")?;
    Ok(CheckReport {
        scenario: get_str(&root, "scenario")?,
        level: Level::parse(&level)
            .ok_or_else(|| ReportError(format!("unknown level {level:?}")))?,
        determinism: verdict(&root, "deterministic", "determinism_witness", |w| {
            Ok(DeterminismWitness {
                context: get_str(w, "context")?,
                lambda: get_str(w, "lambda")?,
                outcome: get_outcome(w)?,
                probability: get_rational(w, "probability")?,
            })
        })?,
        ch_factorability: verdict(&root, "ch_factorizable", "ch_witness", |w| {
            Ok(ChWitness {
                context: get_str(w, "context")?,
                lambda: get_str(w, "lambda")?,
                outcome: get_outcome(w)?,
                lhs: get_rational(w, "lhs")?,
                rhs: get_rational(w, "rhs")?,
            })
        })?,
    })
}

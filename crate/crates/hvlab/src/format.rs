//! JSON file formats for scenarios, determinized (augmented) scenarios and
//! factorized models.
//!
//! Probabilities, weights and breakpoints are always strings in `p/q`
//! syntax. Outcome tuples are written as comma-joined labels (`"+1,-1"`).
//! Writers emit keys in a fixed order, λ points in λ-space order and table
//! entries in canonical outcome order, leaving out zero entries, so a written
//! file reads back and re-writes to identical bytes.

use std::path::Path;

use hvlab_core::determinize::ContextNoise;
use hvlab_core::factorize::{MeasurementResponse, PartyNoise};
use hvlab_core::scenario::OutcomeTuple;
use hvlab_core::{
    AugmentedScenario, Context, FactorizedModel, LambdaPoint, LambdaSpace, Measurement,
    NoisePartition, Rational, ResponseTable, Scenario,
};
use serde_json::{Map, Value};

#[derive(Debug, thiserror::Error)]
pub enum FormatError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("{path}: {message}")]
    Schema { path: String, message: String },
    #[error("{path}: {source}")]
    Rational {
        path: String,
        source: hvlab_core::RationalError,
    },
    #[error(transparent)]
    Core(#[from] hvlab_core::Error),
}

type Result<T, E = FormatError> = std::result::Result<T, E>;

fn schema(path: &str, message: impl Into<String>) -> FormatError {
    FormatError::Schema {
        path: path.to_string(),
        message: message.into(),
    }
}

/// Any of the three file kinds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Document {
    Scenario(Scenario),
    Augmented(AugmentedScenario),
    Factorized(FactorizedModel),
}

impl Document {
    pub fn kind(&self) -> &'static str {
        match self {
            Document::Scenario(_) => "scenario",
            Document::Augmented(_) => "augmented scenario",
            Document::Factorized(_) => "factorized model",
        }
    }

    pub fn base(&self) -> &Scenario {
        match self {
            Document::Scenario(s) => s,
            Document::Augmented(a) => &a.base,
            Document::Factorized(f) => &f.base,
        }
    }
}

// ---------------------------------------------------------------- writing

fn rational(r: &Rational) -> Value {
    Value::String(r.to_string())
}

fn strings<'a>(items: impl IntoIterator<Item = &'a String>) -> Value {
    Value::Array(items.into_iter().cloned().map(Value::String).collect())
}

/// Entries of a context's sparse table in canonical order; entries whose
/// labels do not resolve follow in key order.
fn canonical_entries<'a>(
    scenario: &Scenario,
    context: &Context,
    entries: &'a std::collections::BTreeMap<OutcomeTuple, Rational>,
) -> Vec<(&'a OutcomeTuple, &'a Rational)> {
    let index_of = |tuple: &OutcomeTuple| -> Option<Vec<usize>> {
        let ms = scenario.context_measurements(context).ok()?;
        if ms.len() != tuple.len() {
            return None;
        }
        ms.iter()
            .zip(tuple)
            .map(|(m, l)| m.outcome_index(l))
            .collect()
    };
    let mut resolved = Vec::new();
    let mut rest = Vec::new();
    for (tuple, p) in entries {
        match index_of(tuple) {
            Some(idx) => resolved.push((idx, tuple, p)),
            None => rest.push((tuple, p)),
        }
    }
    resolved.sort_by(|a, b| a.0.cmp(&b.0));
    resolved
        .into_iter()
        .map(|(_, t, p)| (t, p))
        .chain(rest)
        .collect()
}

fn lambda_order<'a, T>(
    scenario: &Scenario,
    map: &'a std::collections::BTreeMap<String, T>,
) -> Vec<(&'a String, &'a T)> {
    let mut keyed: Vec<_> = map
        .iter()
        .map(|(k, v)| (scenario.lambda.position(k).unwrap_or(usize::MAX), k, v))
        .collect();
    keyed.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
    keyed.into_iter().map(|(_, k, v)| (k, v)).collect()
}

fn scenario_map(s: &Scenario) -> Map<String, Value> {
    let mut root = Map::new();
    root.insert("name".into(), Value::String(s.name.clone()));
    root.insert(
        "lambda".into(),
        Value::Array(
            s.lambda
                .points
                .iter()
                .map(|p| {
                    let mut m = Map::new();
                    m.insert("id".into(), Value::String(p.id.clone()));
                    m.insert("weight".into(), rational(&p.weight));
                    Value::Object(m)
                })
                .collect(),
        ),
    );
    root.insert("parties".into(), strings(&s.parties));
    root.insert(
        "measurements".into(),
        Value::Array(
            s.measurements
                .iter()
                .map(|m| {
                    let mut o = Map::new();
                    o.insert("id".into(), Value::String(m.id.clone()));
                    o.insert("party".into(), Value::String(m.party.clone()));
                    o.insert("outcomes".into(), strings(&m.outcomes));
                    if let Some(values) = &m.outcome_values {
                        o.insert(
                            "outcome_values".into(),
                            Value::Array(values.iter().map(rational).collect()),
                        );
                    }
                    Value::Object(o)
                })
                .collect(),
        ),
    );
    root.insert(
        "contexts".into(),
        Value::Array(
            s.contexts
                .iter()
                .map(|c| {
                    let mut o = Map::new();
                    o.insert("id".into(), Value::String(c.id.clone()));
                    o.insert("measurements".into(), strings(&c.measurement_ids));
                    let mut table = Map::new();
                    for (lambda, entries) in lambda_order(s, &c.table) {
                        let mut row = Map::new();
                        for (tuple, p) in canonical_entries(s, c, entries) {
                            if !p.is_zero() {
                                row.insert(tuple.join(","), rational(p));
                            }
                        }
                        table.insert(lambda.clone(), Value::Object(row));
                    }
                    o.insert("table".into(), Value::Object(table));
                    Value::Object(o)
                })
                .collect(),
        ),
    );
    root
}

fn breakpoints(noise: &NoisePartition) -> Value {
    Value::Array(noise.breakpoints().iter().map(rational).collect())
}

fn response_rows<R>(s: &Scenario, table: &ResponseTable<R>, label: impl Fn(&R) -> String) -> Value {
    let mut out = Map::new();
    for (i, row) in table.rows.iter().enumerate() {
        let key = s
            .lambda
            .points
            .get(i)
            .map_or_else(|| format!("#{i}"), |p| p.id.clone());
        out.insert(
            key,
            Value::Array(row.iter().map(|r| Value::String(label(r))).collect()),
        );
    }
    Value::Object(out)
}

fn tuple_label(s: &Scenario, context_id: &str, tuple: &[usize]) -> String {
    let labels: Option<Vec<String>> = s.context(context_id).ok().and_then(|c| {
        let ms = s.context_measurements(c).ok()?;
        ms.iter()
            .zip(tuple)
            .map(|(m, &o)| m.outcomes.get(o).cloned())
            .collect()
    });
    labels.map_or_else(
        || {
            tuple
                .iter()
                .map(|o| format!("#{o}"))
                .collect::<Vec<_>>()
                .join(",")
        },
        |l| l.join(","),
    )
}

fn augmented_map(a: &AugmentedScenario) -> Map<String, Value> {
    let mut root = scenario_map(&a.base);
    if a.shared {
        root.insert("shared".into(), Value::Bool(true));
    }
    let mut noise = Map::new();
    let mut responses = Map::new();
    for entry in &a.contexts {
        noise.insert(entry.context.clone(), breakpoints(&entry.noise));
        responses.insert(
            entry.context.clone(),
            response_rows(&a.base, &entry.responses, |t| {
                tuple_label(&a.base, &entry.context, t)
            }),
        );
    }
    root.insert("noise".into(), Value::Object(noise));
    root.insert("responses".into(), Value::Object(responses));
    root
}

fn factorized_map(f: &FactorizedModel) -> Map<String, Value> {
    let mut root = scenario_map(&f.base);
    let mut xi = Map::new();
    for x in &f.xi {
        xi.insert(x.party.clone(), breakpoints(&x.noise));
    }
    let mut responses = Map::new();
    for r in &f.responses {
        let outcomes = f
            .base
            .measurement(&r.measurement)
            .map(|m| m.outcomes.clone())
            .unwrap_or_default();
        responses.insert(
            r.measurement.clone(),
            response_rows(&f.base, &r.responses, |&o| {
                outcomes.get(o).cloned().unwrap_or_else(|| format!("#{o}"))
            }),
        );
    }
    root.insert("xi".into(), Value::Object(xi));
    root.insert("responses".into(), Value::Object(responses));
    root
}

fn to_text(map: Map<String, Value>) -> String {
    let mut text =
        serde_json::to_string_pretty(&Value::Object(map)).expect("JSON values serialize");
    text.push('\n');
    text
}

pub fn write_scenario(s: &Scenario) -> String {
    to_text(scenario_map(s))
}

pub fn write_augmented(a: &AugmentedScenario) -> String {
    to_text(augmented_map(a))
}

pub fn write_factorized(f: &FactorizedModel) -> String {
    to_text(factorized_map(f))
}

pub fn write_document(d: &Document) -> String {
    match d {
        Document::Scenario(s) => write_scenario(s),
        Document::Augmented(a) => write_augmented(a),
        Document::Factorized(f) => write_factorized(f),
    }
}

// ---------------------------------------------------------------- reading

fn object<'a>(v: &'a Value, path: &str) -> Result<&'a Map<String, Value>> {
    v.as_object()
        .ok_or_else(|| schema(path, "expected an object"))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array()
        .ok_or_else(|| schema(path, "expected an array"))
}

fn string(v: &Value, path: &str) -> Result<String> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| schema(path, "expected a string"))
}

fn string_list(v: &Value, path: &str) -> Result<Vec<String>> {
    array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| string(x, &format!("{path}[{i}]")))
        .collect()
}

fn parse_rational_at(v: &Value, path: &str) -> Result<Rational> {
    let text = v
        .as_str()
        .ok_or_else(|| schema(path, "expected a rational string \"p/q\""))?;
    text.parse().map_err(|source| FormatError::Rational {
        path: path.to_string(),
        source,
    })
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key)
        .ok_or_else(|| schema(path, format!("missing key {key:?}")))
}

fn only_keys(obj: &Map<String, Value>, allowed: &[&str], path: &str) -> Result<()> {
    match obj.keys().find(|k| !allowed.contains(&k.as_str())) {
        Some(k) => Err(schema(path, format!("unexpected key {k:?}"))),
        None => Ok(()),
    }
}

const SCENARIO_KEYS: [&str; 5] = ["name", "lambda", "parties", "measurements", "contexts"];

fn read_scenario_map(root: &Map<String, Value>) -> Result<Scenario> {
    let name = string(field(root, "name", "$")?, "name")?;
    let lambda = array(field(root, "lambda", "$")?, "lambda")?
        .iter()
        .enumerate()
        .map(|(i, p)| {
            let path = format!("lambda[{i}]");
            let o = object(p, &path)?;
            only_keys(o, &["id", "weight"], &path)?;
            Ok(LambdaPoint {
                id: string(field(o, "id", &path)?, &format!("{path}.id"))?,
                weight: parse_rational_at(field(o, "weight", &path)?, &format!("{path}.weight"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let parties = string_list(field(root, "parties", "$")?, "parties")?;
    let measurements = array(field(root, "measurements", "$")?, "measurements")?
        .iter()
        .enumerate()
        .map(|(i, m)| {
            let path = format!("measurements[{i}]");
            let o = object(m, &path)?;
            only_keys(o, &["id", "party", "outcomes", "outcome_values"], &path)?;
            let outcome_values = match o.get("outcome_values") {
                None => None,
                Some(v) => Some(
                    array(v, &format!("{path}.outcome_values"))?
                        .iter()
                        .enumerate()
                        .map(|(k, x)| parse_rational_at(x, &format!("{path}.outcome_values[{k}]")))
                        .collect::<Result<Vec<_>>>()?,
                ),
            };
            Ok(Measurement {
                id: string(field(o, "id", &path)?, &format!("{path}.id"))?,
                party: string(field(o, "party", &path)?, &format!("{path}.party"))?,
                outcomes: string_list(field(o, "outcomes", &path)?, &format!("{path}.outcomes"))?,
                outcome_values,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let contexts = array(field(root, "contexts", "$")?, "contexts")?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let path = format!("contexts[{i}]");
            let o = object(c, &path)?;
            only_keys(o, &["id", "measurements", "table"], &path)?;
            let tpath = format!("{path}.table");
            let mut table = std::collections::BTreeMap::new();
            for (lambda, row) in object(field(o, "table", &path)?, &tpath)? {
                let rpath = format!("{tpath}[{lambda}]");
                let mut entries = std::collections::BTreeMap::new();
                for (key, p) in object(row, &rpath)? {
                    let tuple: OutcomeTuple = key.split(',').map(str::to_string).collect();
                    entries.insert(tuple, parse_rational_at(p, &format!("{rpath}[{key}]"))?);
                }
                table.insert(lambda.clone(), entries);
            }
            Ok(Context {
                id: string(field(o, "id", &path)?, &format!("{path}.id"))?,
                measurement_ids: string_list(
                    field(o, "measurements", &path)?,
                    &format!("{path}.measurements"),
                )?,
                table,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Scenario {
        name,
        lambda: LambdaSpace { points: lambda },
        parties,
        measurements,
        contexts,
    })
}

fn read_breakpoints(v: &Value, path: &str) -> Result<NoisePartition> {
    let points = array(v, path)?
        .iter()
        .enumerate()
        .map(|(i, x)| parse_rational_at(x, &format!("{path}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    NoisePartition::new(points).map_err(|e| schema(path, e.to_string()))
}

/// Reads per-λ response rows keyed by λ id, resolving each label with
/// `resolve`.
fn read_rows<R>(
    base: &Scenario,
    v: &Value,
    path: &str,
    resolve: impl Fn(&str) -> Option<R>,
) -> Result<ResponseTable<R>> {
    let obj = object(v, path)?;
    if let Some(k) = obj.keys().find(|k| base.lambda.position(k).is_none()) {
        return Err(schema(path, format!("unknown λ id {k:?}")));
    }
    let rows = base
        .lambda
        .points
        .iter()
        .map(|p| {
            let rpath = format!("{path}[{}]", p.id);
            let row = obj
                .get(&p.id)
                .ok_or_else(|| schema(path, format!("missing responses for λ {:?}", p.id)))?;
            array(row, &rpath)?
                .iter()
                .enumerate()
                .map(|(j, x)| {
                    let label = string(x, &format!("{rpath}[{j}]"))?;
                    resolve(&label).ok_or_else(|| {
                        schema(
                            &format!("{rpath}[{j}]"),
                            format!("unknown outcome {label:?}"),
                        )
                    })
                })
                .collect()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ResponseTable { rows })
}

fn read_augmented_map(root: &Map<String, Value>) -> Result<AugmentedScenario> {
    let base = read_scenario_map(root)?;
    let shared = match root.get("shared") {
        None => false,
        Some(v) => v
            .as_bool()
            .ok_or_else(|| schema("shared", "expected a boolean"))?,
    };
    let noise = object(field(root, "noise", "$")?, "noise")?;
    let responses = object(field(root, "responses", "$")?, "responses")?;
    if let Some(k) = responses.keys().find(|k| !noise.contains_key(*k)) {
        return Err(schema("responses", format!("context {k:?} has no noise")));
    }
    let mut contexts = Vec::new();
    for (ctx, bps) in noise {
        let path = format!("noise[{ctx}]");
        let partition = read_breakpoints(bps, &path)?;
        let context = base
            .context(ctx)
            .map_err(|e| schema(&path, e.to_string()))?;
        let measurements = base
            .context_measurements(context)
            .map_err(|e| schema(&path, e.to_string()))?;
        let rpath = format!("responses[{ctx}]");
        let rows = read_rows(
            &base,
            responses
                .get(ctx)
                .ok_or_else(|| schema("responses", format!("missing context {ctx:?}")))?,
            &rpath,
            |label| {
                let parts: Vec<&str> = label.split(',').collect();
                if parts.len() != measurements.len() {
                    return None;
                }
                measurements
                    .iter()
                    .zip(parts)
                    .map(|(m, l)| m.outcome_index(l))
                    .collect()
            },
        )?;
        contexts.push(ContextNoise {
            context: ctx.clone(),
            noise: partition,
            responses: rows,
        });
    }
    Ok(AugmentedScenario {
        base,
        shared,
        contexts,
    })
}

fn read_factorized_map(root: &Map<String, Value>) -> Result<FactorizedModel> {
    let base = read_scenario_map(root)?;
    let xi = object(field(root, "xi", "$")?, "xi")?
        .iter()
        .map(|(party, bps)| {
            Ok(PartyNoise {
                party: party.clone(),
                noise: read_breakpoints(bps, &format!("xi[{party}]"))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let responses = object(field(root, "responses", "$")?, "responses")?
        .iter()
        .map(|(mid, rows)| {
            let path = format!("responses[{mid}]");
            let m = base
                .measurement(mid)
                .map_err(|e| schema(&path, e.to_string()))?;
            Ok(MeasurementResponse {
                measurement: mid.clone(),
                responses: read_rows(&base, rows, &path, |label| m.outcome_index(label))?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FactorizedModel {
        base,
        xi,
        responses,
    })
}

/// Parses any of the three file kinds, telling them apart by their extra
/// keys (`xi` for factorized models, `noise` for augmented scenarios).
pub fn read_document(text: &str) -> Result<Document> {
    let value: Value = serde_json::from_str(text)?;
    let root = object(&value, "$")?;
    if root.contains_key("xi") {
        let mut keys = SCENARIO_KEYS.to_vec();
        keys.extend(["xi", "responses"]);
        only_keys(root, &keys, "$")?;
        Ok(Document::Factorized(read_factorized_map(root)?))
    } else if root.contains_key("noise") {
        let mut keys = SCENARIO_KEYS.to_vec();
        keys.extend(["shared", "noise", "responses"]);
        only_keys(root, &keys, "$")?;
        Ok(Document::Augmented(read_augmented_map(root)?))
    } else {
        only_keys(root, &SCENARIO_KEYS, "$")?;
        Ok(Document::Scenario(read_scenario_map(root)?))
    }
}

pub fn read_scenario(text: &str) -> Result<Scenario> {
    match read_document(text)? {
        Document::Scenario(s) => Ok(s),
        other => Err(schema(
            "$",
            format!("expected a scenario, found a {}", other.kind()),
        )),
    }
}

/// Prefix of pseudo-paths naming a built-in demo, e.g. `demo:prbox`.
pub const DEMO_PREFIX: &str = "demo:";

/// Loads a file, or a built-in demo for `demo:NAME`.
pub fn load(input: &str) -> Result<Document> {
    if let Some(name) = input.strip_prefix(DEMO_PREFIX) {
        return Ok(Document::Scenario(hvlab_core::build_demo(name)?));
    }
    let text = std::fs::read_to_string(input).map_err(|source| FormatError::Io {
        path: input.to_string(),
        source,
    })?;
    read_document(&text)
}

pub fn save(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|source| FormatError::Io {
        path: path.display().to_string(),
        source,
    })
}

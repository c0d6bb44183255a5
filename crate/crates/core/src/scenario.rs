//! Finite hidden-variable scenarios: a weighted λ-space, measurements grouped
//! by party, and per-λ joint outcome tables for each measurement context.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::table::JointTable;

/// Outcome labels of a context's measurements, in the context's measurement
/// order.
pub type OutcomeTuple = Vec<String>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Measurement {
    pub id: String,
    pub party: String,
    pub outcomes: Vec<String>,
    /// Numeric value of each outcome, e.g. `+1`/`-1`; needed for correlations.
    pub outcome_values: Option<Vec<Rational>>,
}

impl Measurement {
    pub fn new(id: &str, party: &str, outcomes: &[&str]) -> Self {
        Measurement {
            id: id.into(),
            party: party.into(),
            outcomes: outcomes.iter().map(|&o| o.into()).collect(),
            outcome_values: None,
        }
    }

    /// Two outcomes labelled `+1` and `-1` with values 1 and -1.
    pub fn pm_one(id: &str, party: &str) -> Self {
        Measurement {
            outcome_values: Some(alloc::vec![Rational::one(), -Rational::one()]),
            ..Measurement::new(id, party, &["+1", "-1"])
        }
    }

    pub fn outcome_index(&self, label: &str) -> Option<usize> {
        self.outcomes.iter().position(|o| o == label)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LambdaPoint {
    pub id: String,
    pub weight: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LambdaSpace {
    pub points: Vec<LambdaPoint>,
}

impl LambdaSpace {
    pub fn uniform(ids: &[&str]) -> Self {
        let w = Rational::new(1, ids.len() as i64).expect("nonempty λ-space");
        LambdaSpace {
            points: ids
                .iter()
                .map(|&id| LambdaPoint {
                    id: id.into(),
                    weight: w.clone(),
                })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p.id == id)
    }

    pub fn total_weight(&self) -> Rational {
        self.points.iter().map(|p| &p.weight).sum()
    }
}

/// A set of jointly performed measurements, one per party, with the joint
/// outcome table conditioned on each λ. Absent table entries are exact zeros.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Context {
    pub id: String,
    pub measurement_ids: Vec<String>,
    pub table: BTreeMap<String, BTreeMap<OutcomeTuple, Rational>>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub name: String,
    pub lambda: LambdaSpace,
    pub parties: Vec<String>,
    pub measurements: Vec<Measurement>,
    pub contexts: Vec<Context>,
}

/// One violated invariant, located by a path such as
/// `contexts[AB].table[λ0]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub path: String,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }

    fn push(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.violations.push(Violation {
            path: path.into(),
            message: message.into(),
        });
    }

    pub fn into_result(self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::Invalid(self))
        }
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_valid() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// `(+1,-1)` style rendering of an outcome tuple.
pub fn render_tuple(tuple: &[String]) -> String {
    format!("({})", tuple.join(","))
}

fn duplicates<'a>(ids: impl IntoIterator<Item = &'a str>) -> Vec<&'a str> {
    let mut seen = BTreeSet::new();
    let mut dups = Vec::new();
    for id in ids {
        if !seen.insert(id) && !dups.contains(&id) {
            dups.push(id);
        }
    }
    dups
}

impl Scenario {
    pub fn new(name: &str, lambda: LambdaSpace, parties: &[&str]) -> Self {
        Scenario {
            name: name.into(),
            lambda,
            parties: parties.iter().map(|&p| p.into()).collect(),
            measurements: Vec::new(),
            contexts: Vec::new(),
        }
    }

    pub fn measurement(&self, id: &str) -> Result<&Measurement> {
        self.measurement_index(id)
            .map(|i| &self.measurements[i])
            .ok_or_else(|| Error::UnknownMeasurement(id.into()))
    }

    pub fn measurement_index(&self, id: &str) -> Option<usize> {
        self.measurements.iter().position(|m| m.id == id)
    }

    pub fn context(&self, id: &str) -> Result<&Context> {
        self.context_index(id)
            .map(|i| &self.contexts[i])
            .ok_or_else(|| Error::UnknownContext(id.into()))
    }

    pub fn context_index(&self, id: &str) -> Option<usize> {
        self.contexts.iter().position(|c| c.id == id)
    }

    pub fn party_index(&self, party: &str) -> Option<usize> {
        self.parties.iter().position(|p| p == party)
    }

    fn lambda_checked(&self, id: &str) -> Result<usize> {
        self.lambda
            .position(id)
            .ok_or_else(|| Error::UnknownLambda(id.into()))
    }

    /// Measurements of a context, resolved.
    pub fn context_measurements(&self, context: &Context) -> Result<Vec<&Measurement>> {
        context
            .measurement_ids
            .iter()
            .map(|id| self.measurement(id))
            .collect()
    }

    /// Adds a context from dense per-λ tables, given in λ-space order.
    pub fn push_context(
        &mut self,
        id: &str,
        measurement_ids: &[&str],
        tables: &[JointTable],
    ) -> Result<()> {
        self.contexts.push(Context {
            id: id.into(),
            measurement_ids: measurement_ids.iter().map(|&m| m.into()).collect(),
            table: BTreeMap::new(),
        });
        let result = self.set_tables_at(self.contexts.len() - 1, tables);
        if result.is_err() {
            self.contexts.pop();
        }
        result
    }

    /// Replaces a context's table with dense per-λ tables in λ-space order.
    /// Zero entries are left out of the sparse table.
    pub fn set_tables(&mut self, context_id: &str, tables: &[JointTable]) -> Result<()> {
        let ci = self
            .context_index(context_id)
            .ok_or_else(|| Error::UnknownContext(context_id.into()))?;
        self.set_tables_at(ci, tables)
    }

    fn set_tables_at(&mut self, ci: usize, tables: &[JointTable]) -> Result<()> {
        let context_id = self.contexts[ci].id.clone();
        let labels: Vec<Vec<String>> = self
            .context_measurements(&self.contexts[ci])?
            .iter()
            .map(|m| m.outcomes.clone())
            .collect();
        if tables.len() != self.lambda.len() {
            return Err(Error::UnsupportedStructure(format!(
                "context {context_id:?}: {} tables for {} λ points",
                tables.len(),
                self.lambda.len()
            )));
        }
        let shape: Vec<usize> = labels.iter().map(Vec::len).collect();
        let mut table = BTreeMap::new();
        for (point, dense) in self.lambda.points.iter().zip(tables) {
            if dense.shape() != shape.as_slice() {
                return Err(Error::UnsupportedStructure(format!(
                    "context {context_id:?}: table shape {:?}, expected {shape:?}",
                    dense.shape()
                )));
            }
            let mut sparse = BTreeMap::new();
            for (tuple, p) in dense.entries() {
                if !p.is_zero() {
                    let key = tuple
                        .iter()
                        .zip(&labels)
                        .map(|(&o, l)| l[o].clone())
                        .collect();
                    sparse.insert(key, p.clone());
                }
            }
            table.insert(point.id.clone(), sparse);
        }
        self.contexts[ci].table = table;
        Ok(())
    }

    /// Dense joint table of a context at one λ, from the raw sparse table.
    pub fn joint_table(&self, context_id: &str, lambda_id: &str) -> Result<JointTable> {
        let context = self.context(context_id)?;
        self.lambda_checked(lambda_id)?;
        let ms = self.context_measurements(context)?;
        let mut table = JointTable::zeros(ms.iter().map(|m| m.outcomes.len()).collect());
        if let Some(entries) = context.table.get(lambda_id) {
            for (tuple, p) in entries {
                let idx = resolve_tuple(&ms, tuple).ok_or_else(|| {
                    Error::UnsupportedStructure(format!(
                        "context {context_id:?}: unknown outcome tuple {}",
                        render_tuple(tuple)
                    ))
                })?;
                table.add_mass(&idx, p);
            }
        }
        Ok(table)
    }

    /// Labels of an outcome-index tuple of a context.
    pub fn tuple_labels(&self, context: &Context, tuple: &[usize]) -> Result<OutcomeTuple> {
        Ok(self
            .context_measurements(context)?
            .iter()
            .zip(tuple)
            .map(|(m, &o)| m.outcomes[o].clone())
            .collect())
    }

    /// Per-λ single-measurement marginal of `measurement_id` within a
    /// context, in declared outcome order.
    pub fn marginal(
        &self,
        context_id: &str,
        measurement_id: &str,
        lambda_id: &str,
    ) -> Result<Vec<(String, Rational)>> {
        let context = self.context(context_id)?;
        let m = self.measurement(measurement_id)?;
        let k = context
            .measurement_ids
            .iter()
            .position(|id| id == measurement_id)
            .ok_or_else(|| Error::MeasurementNotInContext {
                measurement: measurement_id.into(),
                context: context_id.into(),
            })?;
        let marginal = self.joint_table(context_id, lambda_id)?.marginal(k);
        Ok(m.outcomes.iter().cloned().zip(marginal).collect())
    }

    /// Checks every structural and probabilistic invariant, collecting all
    /// failures.
    pub fn validate(&self) -> ValidationReport {
        let mut report = ValidationReport::default();
        self.validate_lambda(&mut report);
        self.validate_parties(&mut report);
        self.validate_measurements(&mut report);
        let well_formed = self.validate_contexts(&mut report);
        self.validate_marginal_consistency(&well_formed, &mut report);
        report
    }

    pub fn ensure_valid(&self) -> Result<()> {
        self.validate().into_result()
    }

    fn validate_lambda(&self, report: &mut ValidationReport) {
        if self.lambda.is_empty() {
            report.push("lambda", "λ-space is empty");
            return;
        }
        for id in duplicates(self.lambda.points.iter().map(|p| p.id.as_str())) {
            report.push(format!("lambda[{id}]"), "duplicate λ id");
        }
        for p in &self.lambda.points {
            if !p.weight.is_positive() {
                report.push(
                    format!("lambda[{}].weight", p.id),
                    format!("weight {} is not strictly positive", p.weight),
                );
            }
        }
        let total = self.lambda.total_weight();
        if !total.is_one() {
            report.push("lambda", format!("weights sum ≠ 1 (sum is {total})"));
        }
    }

    fn validate_parties(&self, report: &mut ValidationReport) {
        if self.parties.is_empty() {
            report.push("parties", "no parties declared");
        }
        for p in duplicates(self.parties.iter().map(String::as_str)) {
            report.push(format!("parties[{p}]"), "duplicate party");
        }
    }

    fn validate_measurements(&self, report: &mut ValidationReport) {
        for id in duplicates(self.measurements.iter().map(|m| m.id.as_str())) {
            report.push(format!("measurements[{id}]"), "duplicate measurement id");
        }
        for m in &self.measurements {
            let path = format!("measurements[{}]", m.id);
            if self.party_index(&m.party).is_none() {
                report.push(
                    format!("{path}.party"),
                    format!("undeclared party {:?}", m.party),
                );
            }
            if m.outcomes.len() < 2 {
                report.push(format!("{path}.outcomes"), "fewer than 2 outcomes");
            }
            for o in duplicates(m.outcomes.iter().map(String::as_str)) {
                report.push(
                    format!("{path}.outcomes"),
                    format!("duplicate outcome {o:?}"),
                );
            }
            for o in &m.outcomes {
                if o.is_empty() || o.contains(',') {
                    report.push(
                        format!("{path}.outcomes"),
                        format!("outcome label {o:?} is empty or contains ','"),
                    );
                }
            }
            if let Some(values) = &m.outcome_values {
                if values.len() != m.outcomes.len() {
                    report.push(
                        format!("{path}.outcome_values"),
                        format!("{} values for {} outcomes", values.len(), m.outcomes.len()),
                    );
                }
            }
        }
    }

    /// Returns the indices of contexts whose structure and tables are sound.
    fn validate_contexts(&self, report: &mut ValidationReport) -> Vec<usize> {
        for id in duplicates(self.contexts.iter().map(|c| c.id.as_str())) {
            report.push(format!("contexts[{id}]"), "duplicate context id");
        }
        let mut sound = Vec::new();
        for (ci, c) in self.contexts.iter().enumerate() {
            let path = format!("contexts[{}]", c.id);
            let before = report.violations.len();
            if c.measurement_ids.is_empty() {
                report.push(format!("{path}.measurements"), "no measurements");
            }
            let mut party_positions = Vec::new();
            let mut resolved = Vec::new();
            for mid in &c.measurement_ids {
                match self.measurement(mid) {
                    Ok(m) => {
                        resolved.push(m);
                        if let Some(pi) = self.party_index(&m.party) {
                            party_positions.push(pi);
                        }
                    }
                    Err(_) => report.push(
                        format!("{path}.measurements"),
                        format!("undeclared measurement {mid:?}"),
                    ),
                }
            }
            let distinct: BTreeSet<_> = party_positions.iter().collect();
            if distinct.len() != party_positions.len() {
                report.push(
                    format!("{path}.measurements"),
                    "two measurements from the same party",
                );
            } else if party_positions.windows(2).any(|w| w[0] > w[1]) {
                report.push(
                    format!("{path}.measurements"),
                    "measurements not listed in party order",
                );
            }
            if report.violations.len() != before {
                continue;
            }
            for lid in c.table.keys() {
                if self.lambda.position(lid).is_none() {
                    report.push(format!("{path}.table[{lid}]"), "unknown λ id");
                }
            }
            for point in &self.lambda.points {
                let tpath = format!("{path}.table[{}]", point.id);
                let Some(entries) = c.table.get(&point.id) else {
                    report.push(tpath, "missing table for λ");
                    continue;
                };
                let mut total = Rational::zero();
                for (tuple, p) in entries {
                    if resolve_tuple(&resolved, tuple).is_none() {
                        report.push(
                            tpath.clone(),
                            format!(
                                "outcome tuple {} does not match the measurements",
                                render_tuple(tuple)
                            ),
                        );
                    }
                    if p.is_negative() {
                        report.push(
                            tpath.clone(),
                            format!("negative probability {p} at {}", render_tuple(tuple)),
                        );
                    }
                    total += p;
                }
                if !total.is_one() {
                    report.push(tpath, format!("probabilities sum ≠ 1 (sum is {total})"));
                }
            }
            if report.violations.len() == before {
                sound.push(ci);
            }
        }
        sound
    }

    fn validate_marginal_consistency(&self, sound: &[usize], report: &mut ValidationReport) {
        // measurement id -> (context id, per-λ marginal)
        let mut seen: BTreeMap<&str, (&str, Vec<Vec<Rational>>)> = BTreeMap::new();
        for &ci in sound {
            let c = &self.contexts[ci];
            for (k, mid) in c.measurement_ids.iter().enumerate() {
                let marginals: Vec<Vec<Rational>> = self
                    .lambda
                    .points
                    .iter()
                    .map(|p| {
                        self.joint_table(&c.id, &p.id)
                            .expect("context already checked")
                            .marginal(k)
                    })
                    .collect();
                match seen.get(mid.as_str()) {
                    None => {
                        seen.insert(mid, (&c.id, marginals));
                    }
                    Some((first_ctx, first)) => {
                        for ((point, a), b) in self.lambda.points.iter().zip(first).zip(&marginals)
                        {
                            if a != b {
                                report.push(
                                    format!("contexts[{}].table[{}]", c.id, point.id),
                                    format!(
                                        "inconsistent marginal of {mid}: {} in context {first_ctx}, {} here",
                                        render_distribution(a),
                                        render_distribution(b)
                                    ),
                                );
                            }
                        }
                    }
                }
            }
        }
    }

    pub(crate) fn indexed(&self) -> Result<Indexed> {
        self.ensure_valid()?;
        let contexts = self
            .contexts
            .iter()
            .map(|c| {
                let measurements = c
                    .measurement_ids
                    .iter()
                    .map(|m| self.measurement_index(m).expect("validated"))
                    .collect();
                let tables = self
                    .lambda
                    .points
                    .iter()
                    .map(|p| self.joint_table(&c.id, &p.id).expect("validated"))
                    .collect();
                IndexedContext {
                    measurements,
                    tables,
                }
            })
            .collect();
        Ok(Indexed { contexts })
    }
}

fn render_distribution(d: &[Rational]) -> String {
    let parts: Vec<String> = d.iter().map(|p| format!("{p}")).collect();
    format!("[{}]", parts.join(", "))
}

fn resolve_tuple(ms: &[&Measurement], tuple: &[String]) -> Option<Vec<usize>> {
    if tuple.len() != ms.len() {
        return None;
    }
    ms.iter()
        .zip(tuple)
        .map(|(m, label)| m.outcome_index(label))
        .collect()
}

/// Dense view of a validated scenario.
pub(crate) struct Indexed {
    pub contexts: Vec<IndexedContext>,
}

pub(crate) struct IndexedContext {
    /// Indices into `Scenario::measurements`.
    pub measurements: Vec<usize>,
    /// One table per λ, in λ-space order.
    pub tables: Vec<JointTable>,
}

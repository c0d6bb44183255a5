//! Determinization: an extra noise variable μ, independent of λ, on which
//! every context becomes a deterministic function of γ = (λ, μ).
//!
//! Construction, per context: at each λ, stack the joint outcomes in
//! canonical order as consecutive intervals of [0, 1) whose lengths are their
//! probabilities. The μ partition is the union of all interval endpoints over
//! all λ, so a single partition serves every λ; the response at (λ, cell) is
//! the outcome whose interval contains the cell. Integrating μ out recovers
//! the original table exactly. The partition has at most
//! `1 + Σ_λ (nonzero outcomes at λ − 1)` cells.
//!
//! γ is read as the pair (λ, μ): the induced scenario has one point per
//! (λ, cell) with weight ρ(λ)·w(cell).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::analysis::{self, AnalysisReport, Verdict};
use crate::error::{Error, Result};
use crate::noise::{stack_distributions, NoisePartition, ResponseTable};
use crate::scenario::{Context, LambdaPoint, LambdaSpace, Scenario};
use crate::table::JointTable;

/// μ and the deterministic responses for one context. Responses are
/// outcome-index tuples in the context's measurement order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ContextNoise {
    pub context: String,
    pub noise: NoisePartition,
    pub responses: ResponseTable<Vec<usize>>,
}

/// A scenario together with determinizing noise for some of its contexts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedScenario {
    pub base: Scenario,
    /// True when every party is meant to read the same μ (ξ_i ≡ μ) rather
    /// than noise of its own.
    pub shared: bool,
    pub contexts: Vec<ContextNoise>,
}

/// Id of the γ point pairing λ with μ cell `cell`.
pub fn gamma_id(lambda: &str, cell: usize) -> String {
    format!("{lambda}⊕μ{cell}")
}

fn determinize_context(
    scenario: &Scenario,
    ci: usize,
    tables: &[JointTable],
) -> Result<ContextNoise> {
    let per_lambda: Vec<Vec<(Vec<usize>, _)>> = tables
        .iter()
        .map(|t| t.entries().map(|(tuple, p)| (tuple, p.clone())).collect())
        .collect();
    let (noise, mut responses) = stack_distributions(&[per_lambda])?;
    Ok(ContextNoise {
        context: scenario.contexts[ci].id.clone(),
        noise,
        responses: responses.pop().expect("one item stacked"),
    })
}

/// Determinizes a single context.
pub fn determinize(scenario: &Scenario, context_id: &str) -> Result<AugmentedScenario> {
    let indexed = scenario.indexed()?;
    let ci = scenario
        .context_index(context_id)
        .ok_or_else(|| Error::UnknownContext(context_id.into()))?;
    Ok(AugmentedScenario {
        base: scenario.clone(),
        shared: false,
        contexts: alloc::vec![determinize_context(
            scenario,
            ci,
            &indexed.contexts[ci].tables
        )?],
    })
}

/// Determinizes every context, each with its own μ.
pub fn determinize_all(scenario: &Scenario) -> Result<AugmentedScenario> {
    let indexed = scenario.indexed()?;
    let contexts = indexed
        .contexts
        .iter()
        .enumerate()
        .map(|(ci, ic)| determinize_context(scenario, ci, &ic.tables))
        .collect::<Result<_>>()?;
    Ok(AugmentedScenario {
        base: scenario.clone(),
        shared: false,
        contexts,
    })
}

impl AugmentedScenario {
    /// Structural well-formedness: valid base, known contexts, total
    /// response tables with in-range outcome indices.
    pub fn check(&self) -> Result<()> {
        self.base.ensure_valid()?;
        for entry in &self.contexts {
            let context = self.base.context(&entry.context)?;
            let shape: Vec<usize> = self
                .base
                .context_measurements(context)?
                .iter()
                .map(|m| m.outcomes.len())
                .collect();
            if !entry
                .responses
                .is_total(self.base.lambda.len(), &entry.noise)
            {
                return Err(Error::MalformedNoise(format!(
                    "responses of context {:?} do not cover every (λ, cell)",
                    entry.context
                )));
            }
            let in_range = entry.responses.rows.iter().flatten().all(|tuple| {
                tuple.len() == shape.len() && tuple.iter().zip(&shape).all(|(&o, &n)| o < n)
            });
            if !in_range {
                return Err(Error::MalformedNoise(format!(
                    "responses of context {:?} name unknown outcomes",
                    entry.context
                )));
            }
        }
        Ok(())
    }

    pub fn entry(&self, context_id: &str) -> Result<&ContextNoise> {
        self.contexts
            .iter()
            .find(|e| e.context == context_id)
            .ok_or_else(|| Error::UnknownContext(context_id.into()))
    }

    /// Per-measurement responses of a context, all reading the same μ.
    pub fn measurement_responses(&self, context_id: &str) -> Result<Vec<ResponseTable<usize>>> {
        let entry = self.entry(context_id)?;
        let arity = self.base.context(context_id)?.measurement_ids.len();
        Ok((0..arity)
            .map(|k| ResponseTable {
                rows: entry
                    .responses
                    .rows
                    .iter()
                    .map(|row| row.iter().map(|t| t[k]).collect())
                    .collect(),
            })
            .collect())
    }

    /// Per-λ tables obtained by integrating μ out of one context.
    fn pushforward_tables(&self, entry: &ContextNoise) -> Result<Vec<JointTable>> {
        let context = self.base.context(&entry.context)?;
        let shape: Vec<usize> = self
            .base
            .context_measurements(context)?
            .iter()
            .map(|m| m.outcomes.len())
            .collect();
        Ok((0..self.base.lambda.len())
            .map(|l| {
                let mut t = JointTable::zeros(shape.clone());
                for (tuple, w) in entry.responses.pushforward(l, &entry.noise) {
                    t.add_mass(tuple, &w);
                }
                t
            })
            .collect())
    }

    /// One single-context scenario per determinized context, over the γ
    /// points (λ, cell) with weight ρ(λ)·w(cell) and point-mass tables.
    pub fn induced_scenarios(&self) -> Result<Vec<Scenario>> {
        self.check()?;
        self.contexts
            .iter()
            .map(|entry| {
                let context = self.base.context(&entry.context)?;
                let measurements = self.base.context_measurements(context)?;
                let shape: Vec<usize> = measurements.iter().map(|m| m.outcomes.len()).collect();
                let mut points = Vec::new();
                let mut tables = Vec::new();
                for (l, point) in self.base.lambda.points.iter().enumerate() {
                    for cell in 0..entry.noise.cell_count() {
                        points.push(LambdaPoint {
                            id: gamma_id(&point.id, cell),
                            weight: &point.weight * &entry.noise.weight(cell),
                        });
                        tables.push(JointTable::point_mass(
                            shape.clone(),
                            entry.responses.get(l, cell),
                        ));
                    }
                }
                let mut induced = Scenario {
                    name: format!("{}@γ[{}]", self.base.name, entry.context),
                    lambda: LambdaSpace { points },
                    parties: self.base.parties.clone(),
                    measurements: measurements.into_iter().cloned().collect(),
                    contexts: Vec::new(),
                };
                induced.contexts.push(Context {
                    id: context.id.clone(),
                    measurement_ids: context.measurement_ids.clone(),
                    table: Default::default(),
                });
                induced.set_tables(&context.id, &tables)?;
                Ok(induced)
            })
            .collect()
    }
}

/// Integrates μ out: every determinized context's table is rebuilt from the
/// noise weights and responses; other contexts are copied from the base.
pub fn marginalize(augmented: &AugmentedScenario) -> Result<Scenario> {
    augmented.check()?;
    let mut out = augmented.base.clone();
    for entry in &augmented.contexts {
        let tables = augmented.pushforward_tables(entry)?;
        out.set_tables(&entry.context, &tables)?;
    }
    out.ensure_valid()?;
    Ok(out)
}

/// CH factorability of every determinized context at the level of γ.
pub fn is_gamma_factorizable(augmented: &AugmentedScenario) -> Result<bool> {
    for induced in augmented.induced_scenarios()? {
        if !analysis::is_ch_factorizable(&induced)?.holds() {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Determinism and factorability verdicts on the γ-level scenarios; the
/// first failing context supplies the witness.
pub fn analyze_gamma(augmented: &AugmentedScenario) -> Result<AnalysisReport> {
    let mut report = AnalysisReport {
        scenario: format!("{}@γ", augmented.base.name),
        determinism: Verdict::Holds,
        ch_factorability: Verdict::Holds,
    };
    for induced in augmented.induced_scenarios()? {
        let r = analysis::analyze(&induced)?;
        if report.determinism.holds() {
            report.determinism = r.determinism;
        }
        if report.ch_factorability.holds() {
            report.ch_factorability = r.ch_factorability;
        }
    }
    Ok(report)
}

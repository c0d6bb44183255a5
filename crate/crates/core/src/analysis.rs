//! Exact decisions on a scenario: determinism, Clauser–Horne factorability,
//! correlations and the CHSH value.
//!
//! Every check walks contexts in scenario order, λ points in λ-space order
//! and outcome tuples in canonical order, and reports the first failure it
//! meets, so witnesses are reproducible.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scenario::{render_tuple, OutcomeTuple, Scenario};

/// Outcome of a yes/no check that carries a counterexample when it fails.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict<W> {
    Holds,
    Fails(W),
}

impl<W> Verdict<W> {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::Holds)
    }

    pub fn witness(&self) -> Option<&W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }

    pub fn into_witness(self) -> Option<W> {
        match self {
            Verdict::Holds => None,
            Verdict::Fails(w) => Some(w),
        }
    }
}

/// A joint outcome whose probability at some λ lies strictly between 0 and 1.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DeterminismWitness {
    pub context: String,
    pub lambda: String,
    pub outcome: OutcomeTuple,
    pub probability: Rational,
}

/// A point where the joint probability differs from the product of the
/// single-measurement marginals.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChWitness {
    pub context: String,
    pub lambda: String,
    pub outcome: OutcomeTuple,
    /// P(a, b, … | λ)
    pub lhs: Rational,
    /// P(a | λ) · P(b | λ) · …
    pub rhs: Rational,
}

impl core::fmt::Display for ChWitness {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} {}: {} ≠ {}",
            self.lambda,
            render_tuple(&self.outcome),
            self.lhs,
            self.rhs
        )
    }
}

impl core::fmt::Display for DeterminismWitness {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(
            f,
            "{} {}: p = {}",
            self.lambda,
            render_tuple(&self.outcome),
            self.probability
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalysisReport {
    pub scenario: String,
    pub determinism: Verdict<DeterminismWitness>,
    pub ch_factorability: Verdict<ChWitness>,
}

impl AnalysisReport {
    pub fn deterministic(&self) -> bool {
        self.determinism.holds()
    }

    pub fn ch_factorizable(&self) -> bool {
        self.ch_factorability.holds()
    }
}

/// True iff every entry of every per-λ context table is exactly 0 or 1.
pub fn is_deterministic(scenario: &Scenario) -> Result<Verdict<DeterminismWitness>> {
    let indexed = scenario.indexed()?;
    for (context, ic) in scenario.contexts.iter().zip(&indexed.contexts) {
        for (point, table) in scenario.lambda.points.iter().zip(&ic.tables) {
            if let Some((tuple, p)) = table.entries().find(|(_, p)| p.is_fractional_probability()) {
                return Ok(Verdict::Fails(DeterminismWitness {
                    context: context.id.clone(),
                    lambda: point.id.clone(),
                    outcome: scenario.tuple_labels(context, &tuple)?,
                    probability: p.clone(),
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}

/// True iff, for every context and λ, the joint table equals the product of
/// its single-measurement marginals. Contexts with more than two
/// measurements are checked against the full product.
pub fn is_ch_factorizable(scenario: &Scenario) -> Result<Verdict<ChWitness>> {
    let indexed = scenario.indexed()?;
    for (context, ic) in scenario.contexts.iter().zip(&indexed.contexts) {
        for (point, table) in scenario.lambda.points.iter().zip(&ic.tables) {
            let product = table.product_of_marginals();
            let mismatch = table
                .probs()
                .iter()
                .zip(product.probs())
                .position(|(lhs, rhs)| lhs != rhs);
            if let Some(i) = mismatch {
                return Ok(Verdict::Fails(ChWitness {
                    context: context.id.clone(),
                    lambda: point.id.clone(),
                    outcome: scenario.tuple_labels(context, &table.tuple_of(i))?,
                    lhs: table.probs()[i].clone(),
                    rhs: product.probs()[i].clone(),
                }));
            }
        }
    }
    Ok(Verdict::Holds)
}

pub fn analyze(scenario: &Scenario) -> Result<AnalysisReport> {
    Ok(AnalysisReport {
        scenario: scenario.name.clone(),
        determinism: is_deterministic(scenario)?,
        ch_factorability: is_ch_factorizable(scenario)?,
    })
}

/// Recomputes both sides of a factorability witness from the raw tables.
pub fn recheck_ch_witness(
    scenario: &Scenario,
    witness: &ChWitness,
) -> Result<(Rational, Rational)> {
    let context = scenario.context(&witness.context)?;
    let ms = scenario.context_measurements(context)?;
    let table = scenario.joint_table(&witness.context, &witness.lambda)?;
    let tuple: Vec<usize> = ms
        .iter()
        .zip(&witness.outcome)
        .map(|(m, label)| {
            m.outcome_index(label)
                .ok_or_else(|| Error::UnsupportedStructure(format!("unknown outcome {label:?}")))
        })
        .collect::<Result<_>>()?;
    let rhs = tuple
        .iter()
        .enumerate()
        .map(|(k, &o)| table.marginal(k)[o].clone())
        .product();
    Ok((table.get(&tuple).clone(), rhs))
}

/// Expectation of the product of outcome values in a context,
/// Σ_λ ρ(λ) Σ_t (Π_k value_k(t_k)) · P(t | λ).
pub fn correlation(scenario: &Scenario, context_id: &str) -> Result<Rational> {
    let indexed = scenario.indexed()?;
    let ci = scenario
        .context_index(context_id)
        .ok_or_else(|| Error::UnknownContext(context_id.into()))?;
    let ic = &indexed.contexts[ci];
    let values: Vec<&Vec<Rational>> = ic
        .measurements
        .iter()
        .map(|&mi| {
            let m = &scenario.measurements[mi];
            m.outcome_values
                .as_ref()
                .ok_or_else(|| Error::MissingOutcomeValues(m.id.clone()))
        })
        .collect::<Result<_>>()?;
    let mut total = Rational::zero();
    for (point, table) in scenario.lambda.points.iter().zip(&ic.tables) {
        let mut expectation = Rational::zero();
        for (tuple, p) in table.entries() {
            if p.is_zero() {
                continue;
            }
            let value: Rational = tuple.iter().zip(&values).map(|(&o, v)| &v[o]).product();
            expectation += value * p;
        }
        total += &point.weight * &expectation;
    }
    Ok(total)
}

/// Four context ids in the order (A1B1, A1B2, A2B1, A2B2).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChshPattern(pub [String; 4]);

impl ChshPattern {
    pub fn new(ids: [&str; 4]) -> Self {
        ChshPattern(ids.map(String::from))
    }
}

fn pair_of<'a>(scenario: &'a Scenario, context_id: &str) -> Result<(&'a str, &'a str)> {
    let c = scenario.context(context_id)?;
    match c.measurement_ids.as_slice() {
        [a, b] => Ok((a.as_str(), b.as_str())),
        other => Err(Error::ChshPattern(format!(
            "context {context_id:?} has {} measurements, expected 2",
            other.len()
        ))),
    }
}

/// Checks that the contexts read (A1,B1), (A1,B2), (A2,B1), (A2,B2) with
/// A1 ≠ A2 and B1 ≠ B2.
pub fn check_chsh_pattern(scenario: &Scenario, pattern: &ChshPattern) -> Result<()> {
    let [c11, c12, c21, c22] = &pattern.0;
    let (a1, b1) = pair_of(scenario, c11)?;
    let (a1_, b2) = pair_of(scenario, c12)?;
    let (a2, b1_) = pair_of(scenario, c21)?;
    let (a2_, b2_) = pair_of(scenario, c22)?;
    let ok = a1 == a1_ && a2 == a2_ && b1 == b1_ && b2 == b2_ && a1 != a2 && b1 != b2;
    if ok {
        Ok(())
    } else {
        Err(Error::ChshPattern(format!(
            "expected contexts (A1,B1), (A1,B2), (A2,B1), (A2,B2) with A1 ≠ A2 and B1 ≠ B2; \
             got ({a1},{b1}), ({a1_},{b2}), ({a2},{b1_}), ({a2_},{b2_})"
        )))
    }
}

/// S = E(A1B1) + E(A1B2) + E(A2B1) − E(A2B2).
pub fn chsh(scenario: &Scenario, pattern: &ChshPattern) -> Result<Rational> {
    check_chsh_pattern(scenario, pattern)?;
    let [c11, c12, c21, c22] = &pattern.0;
    Ok(
        correlation(scenario, c11)? + correlation(scenario, c12)? + correlation(scenario, c21)?
            - correlation(scenario, c22)?,
    )
}

/// Every ordered CHSH pattern that can be formed from the scenario's
/// two-measurement contexts, in context order.
pub fn chsh_patterns(scenario: &Scenario) -> Vec<ChshPattern> {
    let pairs: Vec<(&str, &str, &str)> = scenario
        .contexts
        .iter()
        .filter_map(|c| match c.measurement_ids.as_slice() {
            [a, b] => Some((c.id.as_str(), a.as_str(), b.as_str())),
            _ => None,
        })
        .collect();
    let find = |a: &str, b: &str| {
        pairs
            .iter()
            .find(|(_, x, y)| *x == a && *y == b)
            .map(|(id, _, _)| *id)
    };
    let mut out = Vec::new();
    for &(c11, a1, b1) in &pairs {
        for &(c22, a2, b2) in &pairs {
            if a1 == a2 || b1 == b2 {
                continue;
            }
            if let (Some(c12), Some(c21)) = (find(a1, b2), find(a2, b1)) {
                out.push(ChshPattern::new([c11, c12, c21, c22]));
            }
        }
    }
    out
}

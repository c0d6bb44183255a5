//! λ-factorization: independent per-party noises ξ_party, independent of λ
//! and of each other, with every measurement a deterministic function of
//! (λ, ξ_party).
//!
//! For finite scenarios with one measurement per party in each context this
//! exists exactly when every per-λ joint table is the product of its
//! marginals. If one table is not, no independent ξ's can exist and the
//! failing entry is returned. Otherwise each party's ξ is built by stacking the
//! per-λ marginals of all of that party's measurements on one partition of
//! [0, 1), in the same way [`crate::determinize`] stacks joint outcomes.
//!
//! Everywhere in this module the weight of a configuration (λ, ξ_A, ξ_B, …)
//! is ρ(λ)·w(ξ_A)·w(ξ_B)·…; the coupled case ξ_i ≡ μ is only produced by
//! [`build_shared_noise`].

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::analysis::{self, ChWitness, Verdict};
use crate::determinize::{determinize_all, AugmentedScenario};
use crate::error::{Error, Result};
use crate::noise::{stack_distributions, NoisePartition, ResponseTable};
use crate::rational::Rational;
use crate::scenario::Scenario;
use crate::table::JointTable;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartyNoise {
    pub party: String,
    pub noise: NoisePartition,
}

/// Deterministic outcome index of one measurement at each (λ, ξ cell).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MeasurementResponse {
    pub measurement: String,
    pub responses: ResponseTable<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FactorizedModel {
    pub base: Scenario,
    /// One noise per party that has measurements in some context, in party
    /// order.
    pub xi: Vec<PartyNoise>,
    /// One table per measurement that appears in some context, in
    /// measurement order.
    pub responses: Vec<MeasurementResponse>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Factorization {
    Factorized(FactorizedModel),
    NotFactorizable(ChWitness),
}

impl Factorization {
    pub fn model(&self) -> Option<&FactorizedModel> {
        match self {
            Factorization::Factorized(fm) => Some(fm),
            Factorization::NotFactorizable(_) => None,
        }
    }
}

fn check_one_measurement_per_party(scenario: &Scenario) -> Result<()> {
    for c in &scenario.contexts {
        let mut parties = Vec::new();
        for mid in &c.measurement_ids {
            let Ok(m) = scenario.measurement(mid) else {
                continue;
            };
            if parties.contains(&&m.party) {
                return Err(Error::UnsupportedStructure(format!(
                    "context {:?} has several measurements of party {:?}",
                    c.id, m.party
                )));
            }
            parties.push(&m.party);
        }
    }
    Ok(())
}

/// Builds independent ξ's when the scenario is CH-factorizable, or returns
/// the first failure of factorability.
pub fn factorize_independent(scenario: &Scenario) -> Result<Factorization> {
    check_one_measurement_per_party(scenario)?;
    let indexed = scenario.indexed()?;
    if let Verdict::Fails(witness) = analysis::is_ch_factorizable(scenario)? {
        return Ok(Factorization::NotFactorizable(witness));
    }

    // per-λ marginal of each measurement, from the first context using it;
    // other contexts agree by the marginal-consistency invariant
    let mut marginals: Vec<Option<Vec<Vec<Rational>>>> = vec![None; scenario.measurements.len()];
    for ic in &indexed.contexts {
        for (k, &mi) in ic.measurements.iter().enumerate() {
            if marginals[mi].is_none() {
                marginals[mi] = Some(ic.tables.iter().map(|t| t.marginal(k)).collect());
            }
        }
    }

    let mut xi = Vec::new();
    let mut responses = Vec::new();
    for party in &scenario.parties {
        let members: Vec<usize> = (0..scenario.measurements.len())
            .filter(|&mi| &scenario.measurements[mi].party == party && marginals[mi].is_some())
            .collect();
        if members.is_empty() {
            continue;
        }
        let items: Vec<Vec<Vec<(usize, Rational)>>> = members
            .iter()
            .map(|&mi| {
                marginals[mi]
                    .as_ref()
                    .expect("filtered")
                    .iter()
                    .map(|dist| dist.iter().cloned().enumerate().collect())
                    .collect()
            })
            .collect();
        let (noise, tables) = stack_distributions(&items)?;
        xi.push(PartyNoise {
            party: party.clone(),
            noise,
        });
        for (&mi, table) in members.iter().zip(tables) {
            responses.push((mi, table));
        }
    }
    responses.sort_by_key(|(mi, _)| *mi);
    let fm = FactorizedModel {
        base: scenario.clone(),
        xi,
        responses: responses
            .into_iter()
            .map(|(mi, responses)| MeasurementResponse {
                measurement: scenario.measurements[mi].id.clone(),
                responses,
            })
            .collect(),
    };

    for (c, ic) in scenario.contexts.iter().zip(&indexed.contexts) {
        for (point, table) in scenario.lambda.points.iter().zip(&ic.tables) {
            if reconstruct(&fm, &c.id, &point.id)? != *table {
                return Err(Error::ReconstructionMismatch {
                    context: c.id.clone(),
                    lambda: point.id.clone(),
                });
            }
        }
    }
    Ok(Factorization::Factorized(fm))
}

impl FactorizedModel {
    pub fn noise_of(&self, party: &str) -> Result<&NoisePartition> {
        self.xi
            .iter()
            .find(|x| x.party == party)
            .map(|x| &x.noise)
            .ok_or_else(|| Error::MalformedNoise(format!("no noise for party {party:?}")))
    }

    pub fn response_of(&self, measurement: &str) -> Result<&ResponseTable<usize>> {
        self.responses
            .iter()
            .find(|r| r.measurement == measurement)
            .map(|r| &r.responses)
            .ok_or_else(|| Error::MalformedNoise(format!("no responses for {measurement:?}")))
    }

    /// Structural well-formedness: valid base, a noise for every party whose
    /// measurements have responses, total tables, in-range outcomes.
    pub fn check(&self) -> Result<()> {
        self.base.ensure_valid()?;
        for x in &self.xi {
            if self.base.party_index(&x.party).is_none() {
                return Err(Error::MalformedNoise(format!(
                    "unknown party {:?}",
                    x.party
                )));
            }
        }
        for r in &self.responses {
            let m = self.base.measurement(&r.measurement)?;
            let noise = self.noise_of(&m.party)?;
            if !r.responses.is_total(self.base.lambda.len(), noise) {
                return Err(Error::MalformedNoise(format!(
                    "responses of {:?} do not cover every (λ, ξ cell)",
                    r.measurement
                )));
            }
            if r.responses
                .rows
                .iter()
                .flatten()
                .any(|&o| o >= m.outcomes.len())
            {
                return Err(Error::MalformedNoise(format!(
                    "responses of {:?} name unknown outcomes",
                    r.measurement
                )));
            }
        }
        for c in &self.base.contexts {
            for mid in &c.measurement_ids {
                self.response_of(mid)?;
            }
        }
        Ok(())
    }
}

/// P(t | λ) = Σ over ξ cells of Π_k w(ξ_k) · [responses at (λ, ξ) give t],
/// the exact finite form of integrating the deterministic responses against
/// independent noise densities.
pub fn reconstruct(fm: &FactorizedModel, context_id: &str, lambda_id: &str) -> Result<JointTable> {
    let context = fm.base.context(context_id)?;
    let l = fm
        .base
        .lambda
        .position(lambda_id)
        .ok_or_else(|| Error::UnknownLambda(lambda_id.into()))?;
    let measurements = fm.base.context_measurements(context)?;
    let mut factors = Vec::with_capacity(measurements.len());
    for m in &measurements {
        let noise = fm.noise_of(&m.party)?;
        let table = fm.response_of(&m.id)?;
        let row = table
            .rows
            .get(l)
            .filter(|row| row.len() == noise.cell_count())
            .ok_or_else(|| Error::MalformedNoise(format!("responses of {:?} incomplete", m.id)))?;
        factors.push((noise.weights(), row));
    }
    let shape: Vec<usize> = measurements.iter().map(|m| m.outcomes.len()).collect();
    let mut out = JointTable::zeros(shape);
    // odometer over the product of the parties' cells
    let mut cells = vec![0usize; factors.len()];
    loop {
        let weight: Rational = cells
            .iter()
            .zip(&factors)
            .map(|(&j, (w, _))| &w[j])
            .product();
        let tuple: Vec<usize> = cells
            .iter()
            .zip(&factors)
            .map(|(&j, (_, row))| row[j])
            .collect();
        if tuple.iter().zip(out.shape()).any(|(&o, &n)| o >= n) {
            return Err(Error::MalformedNoise(format!(
                "context {context_id:?}: response out of range"
            )));
        }
        out.add_mass(&tuple, &weight);

        let mut k = factors.len();
        loop {
            if k == 0 {
                return Ok(out);
            }
            k -= 1;
            cells[k] += 1;
            if cells[k] < factors[k].0.len() {
                break;
            }
            cells[k] = 0;
        }
    }
}

/// Checks that every reconstructed per-λ table is the product of its
/// marginals.
pub fn verify_lemma_iii(fm: &FactorizedModel) -> Result<bool> {
    fm.check()?;
    for c in &fm.base.contexts {
        for point in &fm.base.lambda.points {
            let t = reconstruct(fm, &c.id, &point.id)?;
            if t != t.product_of_marginals() {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Integrates every ξ out: the base scenario with each table rebuilt by
/// [`reconstruct`].
pub fn marginalize_model(fm: &FactorizedModel) -> Result<Scenario> {
    fm.check()?;
    let mut out = fm.base.clone();
    for c in &fm.base.contexts {
        let tables = fm
            .base
            .lambda
            .points
            .iter()
            .map(|p| reconstruct(fm, &c.id, &p.id))
            .collect::<Result<Vec<_>>>()?;
        out.set_tables(&c.id, &tables)?;
    }
    out.ensure_valid()?;
    Ok(out)
}

/// The coupled model in which every party reads the same μ (ξ_i ≡ μ): the
/// determinization of every context, flagged as shared. Its λ-level
/// statistics are the input's, so a non-factorizable input stays
/// non-factorizable at λ.
pub fn build_shared_noise(scenario: &Scenario) -> Result<AugmentedScenario> {
    let mut aug = determinize_all(scenario)?;
    aug.shared = true;
    Ok(aug)
}

//! Seeded generators of random valid scenarios for property suites.
//!
//! Every generator returns a scenario that passes validation. Layout: two or
//! three parties, one or two measurements per party, every combination of
//! one measurement per party as a context, 1–4 λ points with random
//! positive weights, and small-denominator probabilities.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use crate::rational::Rational;
use crate::scenario::{LambdaPoint, LambdaSpace, Measurement, Scenario};
use crate::table::JointTable;

#[derive(Debug, Clone)]
pub struct Shape {
    pub lambda: core::ops::RangeInclusive<usize>,
    pub parties: core::ops::RangeInclusive<usize>,
    pub settings: core::ops::RangeInclusive<usize>,
    pub outcomes: core::ops::RangeInclusive<usize>,
    /// Two outcomes `+1`/`-1` with values for every measurement.
    pub pm_one: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            lambda: 1..=4,
            parties: 2..=2,
            settings: 1..=2,
            outcomes: 2..=3,
            pm_one: false,
        }
    }
}

impl Shape {
    /// Two parties with two ±1 measurements each: every scenario contains a
    /// CHSH pattern.
    pub fn chsh() -> Self {
        Shape {
            lambda: 1..=4,
            parties: 2..=2,
            settings: 2..=2,
            outcomes: 2..=2,
            pm_one: true,
        }
    }
}

const PARTY_NAMES: [&str; 3] = ["A", "B", "C"];

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q).expect("positive denominator")
}

/// Random distribution over `n` outcomes from integer weights in
/// `min..=4`; at least one weight is positive.
fn distribution<R: Rng + ?Sized>(rng: &mut R, n: usize, min: i64) -> Vec<Rational> {
    loop {
        let weights: Vec<i64> = (0..n).map(|_| rng.random_range(min..=4)).collect();
        let total: i64 = weights.iter().sum();
        if total > 0 {
            return weights.into_iter().map(|w| r(w, total)).collect();
        }
    }
}

/// Empty scenario skeleton: λ-space, parties and measurements, no contexts.
pub fn skeleton<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Scenario {
    let n_lambda = rng.random_range(shape.lambda.clone());
    let raw: Vec<i64> = (0..n_lambda).map(|_| rng.random_range(1..=5)).collect();
    let total: i64 = raw.iter().sum();
    let lambda = LambdaSpace {
        points: raw
            .iter()
            .enumerate()
            .map(|(i, &w)| LambdaPoint {
                id: format!("λ{i}"),
                weight: r(w, total),
            })
            .collect(),
    };
    let n_parties = rng.random_range(shape.parties.clone());
    let parties = &PARTY_NAMES[..n_parties];
    let mut s = Scenario::new("random", lambda, parties);
    for party in parties {
        for k in 1..=rng.random_range(shape.settings.clone()) {
            let id = format!("{party}{k}");
            let m = if shape.pm_one {
                Measurement::pm_one(&id, party)
            } else {
                let n = rng.random_range(shape.outcomes.clone());
                let labels: Vec<String> = (0..n).map(|o| format!("o{o}")).collect();
                let refs: Vec<&str> = labels.iter().map(String::as_str).collect();
                Measurement::new(&id, party, &refs)
            };
            s.measurements.push(m);
        }
    }
    s
}

/// Every choice of one measurement per party, as measurement indices.
fn context_layout(s: &Scenario) -> Vec<Vec<usize>> {
    let mut layouts = vec![Vec::new()];
    for party in &s.parties {
        let members: Vec<usize> = (0..s.measurements.len())
            .filter(|&i| &s.measurements[i].party == party)
            .collect();
        layouts = layouts
            .into_iter()
            .flat_map(|prefix| {
                members.iter().map(move |&m| {
                    let mut next = prefix.clone();
                    next.push(m);
                    next
                })
            })
            .collect();
    }
    layouts
}

/// Adds every context, with per-λ tables produced by
/// `table(context index, λ, measurement indices)`.
fn fill_contexts(s: &mut Scenario, mut table: impl FnMut(usize, usize, &[usize]) -> JointTable) {
    for (ci, layout) in context_layout(s).into_iter().enumerate() {
        let ids: Vec<String> = layout
            .iter()
            .map(|&m| s.measurements[m].id.clone())
            .collect();
        let id: String = ids.concat();
        let tables: Vec<JointTable> = (0..s.lambda.len()).map(|l| table(ci, l, &layout)).collect();
        let refs: Vec<&str> = ids.iter().map(String::as_str).collect();
        s.push_context(&id, &refs, &tables)
            .expect("generated layout");
    }
}

/// Per-λ marginals `[λ][measurement]`; `min_weight` 1 makes all positive.
fn random_marginals<R: Rng + ?Sized>(
    rng: &mut R,
    s: &Scenario,
    min_weight: i64,
) -> Vec<Vec<Vec<Rational>>> {
    (0..s.lambda.len())
        .map(|_| {
            s.measurements
                .iter()
                .map(|m| distribution(rng, m.outcomes.len(), min_weight))
                .collect()
        })
        .collect()
}

/// Every measurement has a fixed outcome at each λ.
pub fn deterministic<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Scenario {
    let mut s = skeleton(rng, shape);
    let assignment: Vec<Vec<usize>> = (0..s.lambda.len())
        .map(|_| {
            s.measurements
                .iter()
                .map(|m| rng.random_range(0..m.outcomes.len()))
                .collect()
        })
        .collect();
    let shapes: Vec<usize> = s.measurements.iter().map(|m| m.outcomes.len()).collect();
    fill_contexts(&mut s, |_, l, layout| {
        let tuple: Vec<usize> = layout.iter().map(|&m| assignment[l][m]).collect();
        JointTable::point_mass(layout.iter().map(|&m| shapes[m]).collect(), &tuple)
    });
    s.name = "random-deterministic".into();
    s
}

/// Every joint table is the product of random marginals.
pub fn product<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Scenario {
    let mut s = skeleton(rng, shape);
    let marginals = random_marginals(rng, &s, 0);
    fill_contexts(&mut s, |_, l, layout| {
        let factors: Vec<Vec<Rational>> = layout.iter().map(|&m| marginals[l][m].clone()).collect();
        JointTable::product(&factors)
    });
    s.name = "random-product".into();
    s
}

/// Moves mass ε around a rectangle in two coordinates, which leaves every
/// single-coordinate marginal unchanged. Returns false when the table has no
/// rectangle with positive mass on its two decreasing corners.
pub fn perturb<R: Rng + ?Sized>(rng: &mut R, table: &mut JointTable) -> bool {
    if table.arity() < 2 {
        return false;
    }
    let k1 = rng.random_range(0..table.arity() - 1);
    let k2 = rng.random_range(k1 + 1..table.arity());
    let base = table.tuple_of(rng.random_range(0..table.len()));
    let (n1, n2) = (table.shape()[k1], table.shape()[k2]);
    let mut candidates = Vec::new();
    for i in 0..n1 {
        for i2 in 0..n1 {
            for j in 0..n2 {
                for j2 in 0..n2 {
                    if i == i2 || j == j2 {
                        continue;
                    }
                    let at = |a: usize, b: usize| {
                        let mut t = base.clone();
                        t[k1] = a;
                        t[k2] = b;
                        t
                    };
                    let (minus1, minus2) = (at(i, j2), at(i2, j));
                    if table.get(&minus1).is_positive() && table.get(&minus2).is_positive() {
                        candidates.push((at(i, j), at(i2, j2), minus1, minus2));
                    }
                }
            }
        }
    }
    if candidates.is_empty() {
        return false;
    }
    let (plus1, plus2, minus1, minus2) =
        candidates.swap_remove(rng.random_range(0..candidates.len()));
    let room = core::cmp::min(table.get(&minus1).clone(), table.get(&minus2).clone());
    let epsilon = room * r(rng.random_range(1..=4), 4);
    table.add_mass(&plus1, &epsilon);
    table.add_mass(&plus2, &epsilon);
    table.add_mass(&minus1, &-&epsilon);
    table.add_mass(&minus2, &-&epsilon);
    true
}

/// Product tables with at least one marginal-preserving perturbation, so at
/// least one (context, λ) table is not a product. Marginals stay consistent
/// across contexts.
pub fn perturbed<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Scenario {
    let mut s = skeleton(rng, shape);
    let marginals = random_marginals(rng, &s, 1);
    let n_contexts = context_layout(&s).len();
    let target = (
        rng.random_range(0..n_contexts),
        rng.random_range(0..s.lambda.len()),
    );
    fill_contexts(&mut s, |context, l, layout| {
        let factors: Vec<Vec<Rational>> = layout.iter().map(|&m| marginals[l][m].clone()).collect();
        let mut t = JointTable::product(&factors);
        if (context, l) == target {
            // a single nonzero marginal-preserving move cannot land on the product
            assert!(perturb(rng, &mut t), "positive marginals admit a rectangle");
        } else if rng.random_bool(0.5) {
            perturb(rng, &mut t);
        }
        t
    });
    s.name = "random-perturbed".into();
    s
}

/// A mix: deterministic, product, or perturbed (possibly with zero
/// entries).
pub fn general<R: Rng + ?Sized>(rng: &mut R, shape: &Shape) -> Scenario {
    match rng.random_range(0..5) {
        0 => deterministic(rng, shape),
        1 => product(rng, shape),
        2 => perturbed(rng, shape),
        _ => {
            let mut s = skeleton(rng, shape);
            let marginals = random_marginals(rng, &s, 0);
            fill_contexts(&mut s, |_, l, layout| {
                let factors: Vec<Vec<Rational>> =
                    layout.iter().map(|&m| marginals[l][m].clone()).collect();
                let mut t = JointTable::product(&factors);
                for _ in 0..rng.random_range(0..=3) {
                    perturb(rng, &mut t);
                }
                t
            });
            s.name = "random-general".into();
            s
        }
    }
}

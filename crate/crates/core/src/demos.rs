//! Built-in example scenarios.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rational::Rational;
use crate::scenario::{LambdaSpace, Measurement, Scenario};
use crate::table::JointTable;

/// Names accepted by [`build_demo`], in listing order.
pub const DEMO_NAMES: [&str; 6] = [
    "counterexample",
    "deterministic-pair",
    "product-noise",
    "prbox",
    "singlet-chsh",
    "shared-noise",
];

/// Default correlation coefficient of the singlet demo: cos(π/4) to eight
/// decimal places.
pub const SINGLET_COEFFICIENT: (i64, i64) = (70_710_678, 100_000_000);

pub fn demo_description(name: &str) -> Option<&'static str> {
    Some(match name {
        "counterexample" => {
            "one λ with A = B = +1 or A = B = -1, each with probability 1/2; \
             indeterministic and not CH-factorizable"
        }
        "deterministic-pair" => {
            "two λ points fixing the outcomes of A and B; deterministic, hence CH-factorizable"
        }
        "product-noise" => {
            "two λ points, four CHSH contexts, joints built as products of marginals; \
             CH-factorizable but indeterministic"
        }
        "prbox" => "PR box: maximal no-signalling CHSH correlations, S = 4",
        "singlet-chsh" => {
            "singlet-state statistics at optimal CHSH settings with rational cos(π/4); S ≈ 2√2"
        }
        "shared-noise" => {
            "joints generated by one noise variable read by both parties; not CH-factorizable"
        }
        _ => return None,
    })
}

/// CHSH contexts `(A1B1, A1B2, A2B1, A2B2)` for demos that have them.
pub fn default_chsh_contexts(name: &str) -> Option<[&'static str; 4]> {
    match name {
        "product-noise" | "prbox" | "singlet-chsh" => Some(["A1B1", "A1B2", "A2B1", "A2B2"]),
        _ => None,
    }
}

pub fn build_demo(name: &str) -> Result<Scenario> {
    match name {
        "counterexample" => Ok(counterexample()),
        "deterministic-pair" => Ok(deterministic_pair()),
        "product-noise" => Ok(product_noise()),
        "prbox" => Ok(prbox()),
        "singlet-chsh" => {
            let (p, q) = SINGLET_COEFFICIENT;
            Ok(singlet_chsh(&Rational::new(p, q)?))
        }
        "shared-noise" => Ok(shared_noise()),
        _ => Err(Error::UnknownDemo {
            name: name.into(),
            available: DEMO_NAMES.to_vec(),
        }),
    }
}

fn r(p: i64, q: i64) -> Rational {
    Rational::new(p, q).expect("nonzero denominator")
}

fn two_party_pm(name: &str, lambda: LambdaSpace, ids: &[(&str, &str)]) -> Scenario {
    let mut s = Scenario::new(name, lambda, &["A", "B"]);
    s.measurements = ids
        .iter()
        .map(|&(id, party)| Measurement::pm_one(id, party))
        .collect();
    s
}

/// P(+1,+1|λ0) = P(-1,-1|λ0) = 1/2.
fn counterexample() -> Scenario {
    let mut s = two_party_pm(
        "counterexample",
        LambdaSpace::uniform(&["λ0"]),
        &[("A", "A"), ("B", "B")],
    );
    let t = JointTable::from_parts(vec![2, 2], vec![r(1, 2), r(0, 1), r(0, 1), r(1, 2)]);
    s.push_context("AB", &["A", "B"], &[t]).expect("demo");
    s
}

fn deterministic_pair() -> Scenario {
    let mut s = two_party_pm(
        "deterministic-pair",
        LambdaSpace::uniform(&["λ0", "λ1"]),
        &[("A", "A"), ("B", "B")],
    );
    let tables = [
        JointTable::point_mass(vec![2, 2], &[0, 0]),
        JointTable::point_mass(vec![2, 2], &[1, 0]),
    ];
    s.push_context("AB", &["A", "B"], &tables).expect("demo");
    s
}

fn chsh_ids() -> [(&'static str, &'static str); 4] {
    [("A1", "A"), ("A2", "A"), ("B1", "B"), ("B2", "B")]
}

const CHSH_CONTEXTS: [(&str, [&str; 2], [usize; 2]); 4] = [
    ("A1B1", ["A1", "B1"], [0, 0]),
    ("A1B2", ["A1", "B2"], [0, 1]),
    ("A2B1", ["A2", "B1"], [1, 0]),
    ("A2B2", ["A2", "B2"], [1, 1]),
];

fn product_noise() -> Scenario {
    let mut s = two_party_pm(
        "product-noise",
        LambdaSpace::uniform(&["λ0", "λ1"]),
        &chsh_ids(),
    );
    let uniform = vec![r(1, 2), r(1, 2)];
    // marginals[λ][A-setting or B-setting]
    let a = [
        [uniform.clone(), uniform.clone()],
        [uniform.clone(), vec![r(1, 3), r(2, 3)]],
    ];
    let b = [
        [uniform.clone(), uniform.clone()],
        [vec![r(1, 4), r(3, 4)], vec![r(1, 5), r(4, 5)]],
    ];
    for (id, ms, [x, y]) in CHSH_CONTEXTS {
        let tables: Vec<JointTable> = (0..2)
            .map(|l| JointTable::product(&[a[l][x].clone(), b[l][y].clone()]))
            .collect();
        s.push_context(id, &ms, &tables).expect("demo");
    }
    s
}

/// Correlated pair with P(a, b) = (1 + a·b·E)/4 for outcomes a, b = ±1.
fn correlated_pair(correlation: &Rational) -> JointTable {
    let quarter = r(1, 4);
    let same = &quarter + &(&quarter * correlation);
    let diff = &quarter - &(&quarter * correlation);
    JointTable::from_parts(vec![2, 2], vec![same.clone(), diff.clone(), diff, same])
}

/// a ⊕ b = x·y with uniform marginals.
fn prbox() -> Scenario {
    let mut s = two_party_pm("prbox", LambdaSpace::uniform(&["λ0"]), &chsh_ids());
    for (id, ms, [x, y]) in CHSH_CONTEXTS {
        let e = if x * y == 1 {
            -Rational::one()
        } else {
            Rational::one()
        };
        s.push_context(id, &ms, &[correlated_pair(&e)])
            .expect("demo");
    }
    s
}

/// Singlet statistics P(a, b) = (1 - a·b·c_xy)/4 with c_xy = -c for three
/// setting pairs and +c for (A2, B2), so S = 4c. `c` stands in for cos(π/4).
pub fn singlet_chsh(c: &Rational) -> Scenario {
    let mut s = two_party_pm("singlet-chsh", LambdaSpace::uniform(&["λ0"]), &chsh_ids());
    for (id, ms, [x, y]) in CHSH_CONTEXTS {
        let coefficient = if x * y == 1 { c.clone() } else { -c };
        s.push_context(id, &ms, &[correlated_pair(&-coefficient)])
            .expect("demo");
    }
    s
}

/// Both parties read the same noise variable with cells of weight 1/3 and
/// 2/3; the joint at each λ is the pushforward of that common noise.
fn shared_noise() -> Scenario {
    let mut s = two_party_pm(
        "shared-noise",
        LambdaSpace::uniform(&["λ0", "λ1"]),
        &[("A", "A"), ("B", "B")],
    );
    let cells = [r(1, 3), r(2, 3)];
    // responses[λ][cell] = (A outcome, B outcome)
    let responses = [[[0, 0], [1, 1]], [[0, 1], [1, 0]]];
    let tables: Vec<JointTable> = responses
        .iter()
        .map(|per_cell| {
            let mut t = JointTable::zeros(vec![2, 2]);
            for (w, tuple) in cells.iter().zip(per_cell) {
                t.add_mass(tuple, w);
            }
            t
        })
        .collect();
    s.push_context("AB", &["A", "B"], &tables).expect("demo");
    s
}

/// Lists `(name, description)` for every demo.
pub fn list_demos() -> Vec<(&'static str, String)> {
    DEMO_NAMES
        .iter()
        .map(|&n| (n, demo_description(n).unwrap_or_default().into()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_demo_validates() {
        for name in DEMO_NAMES {
            let s = build_demo(name).unwrap();
            assert_eq!(s.name, name);
            assert!(s.validate().is_valid(), "{name}: {}", s.validate());
            assert!(demo_description(name).is_some());
        }
    }

    #[test]
    fn unknown_demo_lists_available() {
        match build_demo("nope") {
            Err(Error::UnknownDemo { name, available }) => {
                assert_eq!(name, "nope");
                assert_eq!(available, DEMO_NAMES.to_vec());
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn counterexample_table() {
        let s = build_demo("counterexample").unwrap();
        let t = &s.context("AB").unwrap().table["λ0"];
        assert_eq!(t.len(), 2);
        assert_eq!(t[&vec!["+1".into(), "+1".into()]], r(1, 2));
        assert_eq!(t[&vec!["-1".into(), "-1".into()]], r(1, 2));
    }

    #[test]
    fn deterministic_pair_entries_are_zero_or_one() {
        let s = build_demo("deterministic-pair").unwrap();
        for p in &s.lambda.points {
            let t = s.joint_table("AB", &p.id).unwrap();
            assert!(t.probs().iter().all(|p| p.is_zero() || p.is_one()));
        }
    }

    #[test]
    fn prbox_satisfies_xor_rule() {
        let s = build_demo("prbox").unwrap();
        for (id, _, [x, y]) in CHSH_CONTEXTS {
            let t = s.joint_table(id, "λ0").unwrap();
            for (tuple, p) in t.entries() {
                let xor = tuple[0] ^ tuple[1];
                let expected = if xor == x * y { r(1, 2) } else { r(0, 1) };
                assert_eq!(*p, expected, "{id} {tuple:?}");
            }
        }
    }
}

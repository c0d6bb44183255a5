//! Finite noise variables as partitions of the unit interval, and
//! deterministic response tables over them.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Partition of [0, 1) into half-open cells `[b_j, b_{j+1})`; the weight of
/// a cell is its width.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoisePartition {
    breakpoints: Vec<Rational>,
}

impl NoisePartition {
    /// Breakpoints must increase strictly from 0 to 1.
    pub fn new(breakpoints: Vec<Rational>) -> Result<Self> {
        let starts_at_zero = breakpoints.first().is_some_and(Rational::is_zero);
        let ends_at_one = breakpoints.last().is_some_and(Rational::is_one);
        if breakpoints.len() < 2 || !starts_at_zero || !ends_at_one {
            return Err(Error::MalformedNoise(format!(
                "breakpoints must run from 0 to 1, got {breakpoints:?}"
            )));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::MalformedNoise(format!(
                "breakpoints not strictly increasing: {breakpoints:?}"
            )));
        }
        Ok(NoisePartition { breakpoints })
    }

    /// The single cell [0, 1).
    pub fn trivial() -> Self {
        NoisePartition {
            breakpoints: vec![Rational::zero(), Rational::one()],
        }
    }

    /// Common refinement: the sorted union of `points` with 0 and 1. Points
    /// must lie in [0, 1].
    pub fn from_points<'a>(points: impl IntoIterator<Item = &'a Rational>) -> Result<Self> {
        let mut all = vec![Rational::zero(), Rational::one()];
        all.extend(points.into_iter().cloned());
        if let Some(p) = all.iter().find(|p| !p.is_probability()) {
            return Err(Error::MalformedNoise(format!(
                "breakpoint {p} outside [0, 1]"
            )));
        }
        all.sort();
        all.dedup();
        NoisePartition::new(all)
    }

    pub fn breakpoints(&self) -> &[Rational] {
        &self.breakpoints
    }

    pub fn cell_count(&self) -> usize {
        self.breakpoints.len() - 1
    }

    pub fn cell_start(&self, cell: usize) -> &Rational {
        &self.breakpoints[cell]
    }

    pub fn weight(&self, cell: usize) -> Rational {
        &self.breakpoints[cell + 1] - &self.breakpoints[cell]
    }

    pub fn weights(&self) -> Vec<Rational> {
        (0..self.cell_count()).map(|j| self.weight(j)).collect()
    }
}

/// Deterministic response per (λ, cell): `rows[λ][cell]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResponseTable<R> {
    pub rows: Vec<Vec<R>>,
}

impl<R> ResponseTable<R> {
    pub fn get(&self, lambda: usize, cell: usize) -> &R {
        &self.rows[lambda][cell]
    }

    /// Every λ row covers every cell of `noise`.
    pub fn is_total(&self, lambda_count: usize, noise: &NoisePartition) -> bool {
        self.rows.len() == lambda_count
            && self.rows.iter().all(|row| row.len() == noise.cell_count())
    }

    /// Pushes the cell weights of `noise` at one λ through the table.
    pub fn pushforward(&self, lambda: usize, noise: &NoisePartition) -> Vec<(&R, Rational)> {
        self.rows[lambda]
            .iter()
            .enumerate()
            .map(|(cell, r)| (r, noise.weight(cell)))
            .collect()
    }
}

/// Stacks several families of per-λ distributions on one partition of the
/// unit interval.
///
/// `items[i][λ]` lists `(response, probability)` pairs in the order in which
/// they are stacked; probabilities at each λ must sum to 1. For each item and
/// λ the outcomes occupy consecutive intervals `[c_{k-1}, c_k)` of the
/// cumulative sums. The partition is the union of every cumulative sum of
/// every item and λ, so it does not depend on λ, and a cell maps to the
/// outcome whose interval contains it. Zero-probability outcomes get no
/// interval.
pub fn stack_distributions<R: Clone>(
    items: &[Vec<Vec<(R, Rational)>>],
) -> Result<(NoisePartition, Vec<ResponseTable<R>>)> {
    // cumulative[i][λ] = [(end, response)] over nonzero outcomes
    let mut cumulative: Vec<Vec<Vec<(Rational, R)>>> = Vec::with_capacity(items.len());
    for item in items {
        let mut per_lambda = Vec::with_capacity(item.len());
        for dist in item {
            let mut acc = Rational::zero();
            let mut ends = Vec::new();
            for (response, p) in dist {
                if p.is_negative() {
                    return Err(Error::MalformedNoise(format!("negative probability {p}")));
                }
                if p.is_zero() {
                    continue;
                }
                acc += p;
                ends.push((acc.clone(), response.clone()));
            }
            if !acc.is_one() {
                return Err(Error::MalformedNoise(format!(
                    "probabilities sum to {acc}, not 1"
                )));
            }
            per_lambda.push(ends);
        }
        cumulative.push(per_lambda);
    }

    let partition =
        NoisePartition::from_points(cumulative.iter().flatten().flatten().map(|(end, _)| end))?;

    let tables = cumulative
        .into_iter()
        .map(|per_lambda| ResponseTable {
            rows: per_lambda
                .into_iter()
                .map(|ends| {
                    let mut row = Vec::with_capacity(partition.cell_count());
                    let mut k = 0;
                    for cell in 0..partition.cell_count() {
                        // cells are sorted, so the containing interval only moves right
                        while ends[k].0 <= *partition.cell_start(cell) {
                            k += 1;
                        }
                        row.push(ends[k].1.clone());
                    }
                    row
                })
                .collect(),
        })
        .collect();
    Ok((partition, tables))
}

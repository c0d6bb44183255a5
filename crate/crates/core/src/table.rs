//! Dense joint distributions over a product of finite outcome sets.

use alloc::vec;
use alloc::vec::Vec;

use crate::rational::Rational;

/// Probabilities over the Cartesian product of several outcome sets, stored
/// row-major so that index order is the canonical lexicographic order of
/// outcome-index tuples (first factor most significant).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct JointTable {
    shape: Vec<usize>,
    probs: Vec<Rational>,
}

impl JointTable {
    pub fn zeros(shape: Vec<usize>) -> Self {
        let len = shape.iter().product();
        JointTable {
            shape,
            probs: vec![Rational::zero(); len],
        }
    }

    /// Panics if `probs.len()` disagrees with `shape`.
    pub fn from_parts(shape: Vec<usize>, probs: Vec<Rational>) -> Self {
        assert_eq!(shape.iter().product::<usize>(), probs.len());
        JointTable { shape, probs }
    }

    /// Point mass on `tuple`.
    pub fn point_mass(shape: Vec<usize>, tuple: &[usize]) -> Self {
        let mut t = JointTable::zeros(shape);
        let i = t.index_of(tuple);
        t.probs[i] = Rational::one();
        t
    }

    /// Product distribution of independent factors.
    pub fn product(factors: &[Vec<Rational>]) -> Self {
        let shape: Vec<usize> = factors.iter().map(Vec::len).collect();
        let mut t = JointTable::zeros(shape);
        for i in 0..t.len() {
            let tuple = t.tuple_of(i);
            t.probs[i] = tuple.iter().zip(factors).map(|(&o, f)| &f[o]).product();
        }
        t
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn arity(&self) -> usize {
        self.shape.len()
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[Rational] {
        &self.probs
    }

    pub fn index_of(&self, tuple: &[usize]) -> usize {
        debug_assert_eq!(tuple.len(), self.shape.len());
        tuple.iter().zip(&self.shape).fold(0, |acc, (&o, &n)| {
            debug_assert!(o < n);
            acc * n + o
        })
    }

    pub fn tuple_of(&self, mut index: usize) -> Vec<usize> {
        let mut tuple = vec![0; self.shape.len()];
        for (slot, &n) in tuple.iter_mut().zip(&self.shape).rev() {
            *slot = index % n;
            index /= n;
        }
        tuple
    }

    pub fn get(&self, tuple: &[usize]) -> &Rational {
        &self.probs[self.index_of(tuple)]
    }

    pub fn add_mass(&mut self, tuple: &[usize], mass: &Rational) {
        let i = self.index_of(tuple);
        self.probs[i] += mass;
    }

    /// `(tuple, probability)` pairs in canonical order.
    pub fn entries(&self) -> impl Iterator<Item = (Vec<usize>, &Rational)> + '_ {
        self.probs
            .iter()
            .enumerate()
            .map(move |(i, p)| (self.tuple_of(i), p))
    }

    pub fn total(&self) -> Rational {
        self.probs.iter().sum()
    }

    /// Single-factor marginal of factor `k`.
    pub fn marginal(&self, k: usize) -> Vec<Rational> {
        let mut out = vec![Rational::zero(); self.shape[k]];
        for (tuple, p) in self.entries() {
            out[tuple[k]] += p;
        }
        out
    }

    pub fn marginals(&self) -> Vec<Vec<Rational>> {
        (0..self.arity()).map(|k| self.marginal(k)).collect()
    }

    /// Product of this table's own single-factor marginals.
    pub fn product_of_marginals(&self) -> JointTable {
        JointTable::product(&self.marginals())
    }
}

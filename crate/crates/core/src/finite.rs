//! Finite hypothesis classes with an explicit prior.

use crate::bits::BitSet;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, TableHypothesis, VersionSpaceConstraints};
use crate::pool::Pool;

/// Tolerance on the prior weights summing to one.
pub const WEIGHT_SUM_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct FiniteClass {
    hypotheses: Vec<Hypothesis>,
    weights: Vec<f64>,
}

impl FiniteClass {
    /// Builds a class from positive weights, normalizing them to sum to one.
    pub fn new(hypotheses: Vec<Hypothesis>, weights: Vec<f64>) -> Result<Self> {
        if hypotheses.is_empty() {
            return Err(invalid("finite class must contain at least one hypothesis"));
        }
        if hypotheses.len() != weights.len() {
            return Err(invalid(format!(
                "{} hypotheses but {} weights",
                hypotheses.len(),
                weights.len()
            )));
        }
        if let Some(w) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(invalid(format!("prior weights must be positive, got {w}")));
        }
        for h in &hypotheses[1..] {
            hypotheses[0].check_compatible(h)?;
        }
        let total: f64 = weights.iter().sum();
        let weights = weights.into_iter().map(|w| w / total).collect();
        Ok(Self {
            hypotheses,
            weights,
        })
    }

    pub fn uniform(hypotheses: Vec<Hypothesis>) -> Result<Self> {
        let n = hypotheses.len();
        Self::new(hypotheses, vec![1.0; n])
    }

    /// `{e_1, .., e_n}` as linear separators in `R^n`, uniform prior.
    pub fn coordinate_vectors(n: usize) -> Result<Self> {
        let hs = (0..n)
            .map(|i| {
                let mut w = vec![0.0; n];
                w[i] = 1.0;
                Hypothesis::linear(w)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::uniform(hs)
    }

    /// Table class from explicit positive-position bitsets over `{0, .., n-1}`.
    pub fn from_tables(tables: Vec<BitSet>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = tables.len();
        let hs = tables
            .into_iter()
            .map(|b| TableHypothesis::new(b).into())
            .collect();
        Self::new(hs, weights.unwrap_or_else(|| vec![1.0; n]))
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.hypotheses.is_empty()
    }

    pub fn hypotheses(&self) -> &[Hypothesis] {
        &self.hypotheses
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn get(&self, i: usize) -> &Hypothesis {
        &self.hypotheses[i]
    }

    pub fn index_of(&self, h: &Hypothesis) -> Option<usize> {
        self.hypotheses.iter().position(|g| g == h)
    }

    pub fn consistent_indices(&self, constraints: &VersionSpaceConstraints) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| constraints.admits(&self.hypotheses[i]))
            .collect()
    }

    /// Prior mass of the version space.
    pub fn mass(&self, constraints: &VersionSpaceConstraints) -> f64 {
        self.consistent_indices(constraints)
            .into_iter()
            .map(|i| self.weights[i])
            .sum()
    }

    /// Members at `indices` with their weights renormalized.
    pub fn subset(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::EmptyVersionSpace);
        }
        Self::new(
            indices.iter().map(|&i| self.hypotheses[i].clone()).collect(),
            indices.iter().map(|&i| self.weights[i]).collect(),
        )
    }

    /// The version space as a class with the conditional prior.
    pub fn restrict(&self, constraints: &VersionSpaceConstraints) -> Result<Self> {
        self.subset(&self.consistent_indices(constraints))
    }

    /// Re-expresses every member as a label table over `pool`, so that
    /// `Point::Index(i)` refers to `pool.get(i)`.
    pub fn tabulate(&self, pool: &Pool) -> Result<Self> {
        let tables = self
            .hypotheses
            .iter()
            .map(|h| {
                pool.check_hypothesis(h)?;
                Ok(pool.signature(h).into_owned())
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_tables(tables, Some(self.weights.clone()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hypothesis::{Label, LabeledExample, Point};

    #[test]
    fn weights_are_normalized() {
        let c = FiniteClass::from_tables(
            vec![BitSet::from_bools([true]), BitSet::from_bools([false])],
            Some(vec![1.0, 3.0]),
        )
        .unwrap();
        assert!((c.weights().iter().sum::<f64>() - 1.0).abs() < WEIGHT_SUM_TOL);
        assert_eq!(c.weights(), &[0.25, 0.75]);
    }

    #[test]
    fn rejects_bad_priors() {
        let t = || vec![BitSet::from_bools([true])];
        assert!(FiniteClass::from_tables(t(), Some(vec![0.0])).is_err());
        assert!(FiniteClass::from_tables(t(), Some(vec![1.0, 1.0])).is_err());
        assert!(FiniteClass::from_tables(vec![], None).is_err());
        let mixed = vec![
            Hypothesis::linear(vec![1.0]).unwrap(),
            Hypothesis::table([Label::Pos]),
        ];
        assert!(FiniteClass::uniform(mixed).is_err());
    }

    #[test]
    fn restriction_renormalizes() {
        let c = FiniteClass::from_tables(
            vec![
                BitSet::from_bools([true, true]),
                BitSet::from_bools([true, false]),
                BitSet::from_bools([false, false]),
            ],
            Some(vec![1.0, 1.0, 2.0]),
        )
        .unwrap();
        let cons: VersionSpaceConstraints =
            [LabeledExample::new(Point::Index(0), Label::Pos)].into_iter().collect();
        assert_eq!(c.mass(&cons), 0.5);
        let v = c.restrict(&cons).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v.weights(), &[0.5, 0.5]);
        let none: VersionSpaceConstraints = [
            LabeledExample::new(Point::Index(0), Label::Pos),
            LabeledExample::new(Point::Index(0), Label::Neg),
        ]
        .into_iter()
        .collect();
        assert!(matches!(c.restrict(&none), Err(Error::EmptyVersionSpace)));
    }
}

//! Points, labels and the three hypothesis families.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{invalid, Error, Result};

/// Tolerance on the Euclidean norm of a linear separator.
pub const UNIT_NORM_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Label {
    Neg,
    Pos,
}

impl Label {
    /// Sign convention: zero is positive.
    #[inline]
    pub fn from_score(score: f64) -> Label {
        if score >= 0.0 {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn from_bool(positive: bool) -> Label {
        if positive {
            Label::Pos
        } else {
            Label::Neg
        }
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self == Label::Pos
    }

    pub fn as_i8(self) -> i8 {
        match self {
            Label::Pos => 1,
            Label::Neg => -1,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+}", self.as_i8())
    }
}

/// A data point. `Real` points are used with linear separators, `Bits` with
/// monotone disjunctions and `Index` addresses an element of the finite
/// domain a [`TableHypothesis`] is defined on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Point {
    Real(Box<[f64]>),
    Bits(BitSet),
    Index(usize),
}

impl Point {
    pub fn real(coords: Vec<f64>) -> Point {
        Point::Real(coords.into_boxed_slice())
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Point::Real(_) => "real",
            Point::Bits(_) => "bits",
            Point::Index(_) => "index",
        }
    }

    /// Dimension for vector points; `None` for domain indices.
    pub fn dimension(&self) -> Option<usize> {
        match self {
            Point::Real(c) => Some(c.len()),
            Point::Bits(b) => Some(b.len()),
            Point::Index(_) => None,
        }
    }
}

/// Homogeneous linear separator `x -> sign(<w, x>)` with `|w| = 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearSeparator {
    w: Box<[f64]>,
}

impl LinearSeparator {
    /// Normalizes `w`; rejects zero or non-finite vectors.
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(invalid("linear separator needs at least one coordinate"));
        }
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !norm.is_finite() || norm == 0.0 {
            return Err(invalid("linear separator weight vector must be finite and non-zero"));
        }
        Ok(Self {
            w: w.into_iter().map(|v| v / norm).collect(),
        })
    }

    /// Accepts `w` only if it already has unit norm.
    pub fn from_unit(w: Vec<f64>) -> Result<Self> {
        let norm = w.iter().map(|v| v * v).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(invalid(format!("weight vector has norm {norm}, expected 1")));
        }
        Ok(Self { w: w.into() })
    }

    pub fn dim(&self) -> usize {
        self.w.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.w
    }

    #[inline]
    pub fn score(&self, x: &[f64]) -> f64 {
        self.w.iter().zip(x).map(|(a, b)| a * b).sum()
    }
}

/// OR of `k` positive literals over `{0,1}^d`.
#[derive(Clone, Debug, PartialEq)]
pub struct MonotoneDisjunction {
    literals: Box<[usize]>,
    mask: BitSet,
}

impl MonotoneDisjunction {
    pub fn new(dim: usize, literals: impl IntoIterator<Item = usize>) -> Result<Self> {
        let mut lits: Vec<usize> = literals.into_iter().collect();
        lits.sort_unstable();
        let before = lits.len();
        lits.dedup();
        if lits.len() != before {
            return Err(invalid("disjunction literals must be distinct"));
        }
        if lits.is_empty() {
            return Err(invalid("disjunction needs at least one literal"));
        }
        if let Some(&bad) = lits.iter().find(|&&l| l >= dim) {
            return Err(invalid(format!("literal {bad} out of range for dimension {dim}")));
        }
        let mask = BitSet::from_indices(dim, lits.iter().copied());
        Ok(Self {
            literals: lits.into_boxed_slice(),
            mask,
        })
    }

    pub fn dim(&self) -> usize {
        self.mask.len()
    }

    pub fn k(&self) -> usize {
        self.literals.len()
    }

    pub fn literals(&self) -> &[usize] {
        &self.literals
    }

    pub fn mask(&self) -> &BitSet {
        &self.mask
    }
}

/// A hypothesis given by its full label vector over a finite domain
/// `{0, .., n-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct TableHypothesis {
    labels: BitSet,
}

impl TableHypothesis {
    pub fn new(labels: BitSet) -> Self {
        Self { labels }
    }

    pub fn from_labels(labels: impl IntoIterator<Item = Label>) -> Self {
        Self::new(BitSet::from_bools(labels.into_iter().map(Label::is_positive)))
    }

    pub fn domain_size(&self) -> usize {
        self.labels.len()
    }

    /// Positive positions.
    pub fn bits(&self) -> &BitSet {
        &self.labels
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Hypothesis {
    Linear(Arc<LinearSeparator>),
    Disjunction(Arc<MonotoneDisjunction>),
    Table(Arc<TableHypothesis>),
}

impl From<LinearSeparator> for Hypothesis {
    fn from(h: LinearSeparator) -> Self {
        Hypothesis::Linear(Arc::new(h))
    }
}

impl From<MonotoneDisjunction> for Hypothesis {
    fn from(h: MonotoneDisjunction) -> Self {
        Hypothesis::Disjunction(Arc::new(h))
    }
}

impl From<TableHypothesis> for Hypothesis {
    fn from(h: TableHypothesis) -> Self {
        Hypothesis::Table(Arc::new(h))
    }
}

impl Hypothesis {
    pub fn linear(w: Vec<f64>) -> Result<Self> {
        LinearSeparator::new(w).map(Into::into)
    }

    pub fn disjunction(dim: usize, literals: impl IntoIterator<Item = usize>) -> Result<Self> {
        MonotoneDisjunction::new(dim, literals).map(Into::into)
    }

    pub fn table(labels: impl IntoIterator<Item = Label>) -> Self {
        TableHypothesis::from_labels(labels).into()
    }

    pub fn kind(&self) -> &'static str {
        match self {
            Hypothesis::Linear(_) => "linear",
            Hypothesis::Disjunction(_) => "disjunction",
            Hypothesis::Table(_) => "table",
        }
    }

    /// Feature dimension, or domain size for tables.
    pub fn dim(&self) -> usize {
        match self {
            Hypothesis::Linear(h) => h.dim(),
            Hypothesis::Disjunction(h) => h.dim(),
            Hypothesis::Table(h) => h.domain_size(),
        }
    }

    /// Errors unless `x` can be classified by this hypothesis.
    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (self, x) {
            (Hypothesis::Linear(h), Point::Real(c)) => dim_eq(h.dim(), c.len()),
            (Hypothesis::Disjunction(h), Point::Bits(b)) => dim_eq(h.dim(), b.len()),
            (Hypothesis::Table(h), Point::Index(i)) => {
                if *i < h.domain_size() {
                    Ok(())
                } else {
                    Err(invalid(format!(
                        "domain index {i} out of range for table of size {}",
                        h.domain_size()
                    )))
                }
            }
            _ => Err(Error::VariantMismatch {
                hypothesis: self.kind(),
                point: x.kind(),
            }),
        }
    }

    /// Errors unless both hypotheses act on the same kind of points.
    pub fn check_compatible(&self, other: &Hypothesis) -> Result<()> {
        if self.kind() != other.kind() {
            return Err(invalid(format!(
                "cannot compare {} with {} hypothesis",
                self.kind(),
                other.kind()
            )));
        }
        dim_eq(self.dim(), other.dim())
    }

    pub fn predict(&self, x: &Point) -> Result<Label> {
        self.check_point(x)?;
        Ok(self.label(x))
    }

    /// Classifies `x` without validation.
    ///
    /// Panics on a variant mismatch; callers validate once up front.
    #[inline]
    pub fn label(&self, x: &Point) -> Label {
        match (self, x) {
            (Hypothesis::Linear(h), Point::Real(c)) => Label::from_score(h.score(c)),
            (Hypothesis::Disjunction(h), Point::Bits(b)) => Label::from_bool(h.mask.intersects(b)),
            (Hypothesis::Table(h), Point::Index(i)) => Label::from_bool(h.labels.get(*i)),
            _ => panic!("cannot apply {} hypothesis to {} point", self.kind(), x.kind()),
        }
    }

    pub fn is_consistent(&self, example: &LabeledExample) -> bool {
        self.label(&example.point) == example.label
    }
}

fn dim_eq(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LabeledExample {
    pub point: Point,
    pub label: Label,
}

impl LabeledExample {
    pub fn new(point: Point, label: Label) -> Self {
        Self { point, label }
    }
}

/// The labeled examples that define a version space.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct VersionSpaceConstraints {
    examples: Vec<LabeledExample>,
}

impl VersionSpaceConstraints {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, example: LabeledExample) {
        self.examples.push(example);
    }

    pub fn examples(&self) -> &[LabeledExample] {
        &self.examples
    }

    pub fn len(&self) -> usize {
        self.examples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.examples.is_empty()
    }

    pub fn admits(&self, h: &Hypothesis) -> bool {
        self.examples.iter().all(|e| h.is_consistent(e))
    }
}

impl FromIterator<LabeledExample> for VersionSpaceConstraints {
    fn from_iter<I: IntoIterator<Item = LabeledExample>>(iter: I) -> Self {
        Self {
            examples: iter.into_iter().collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_points_are_positive() {
        let h = Hypothesis::linear(vec![1.0, 0.0]).unwrap();
        assert_eq!(h.predict(&Point::real(vec![0.0, 1.0])).unwrap(), Label::Pos);
        assert_eq!(h.predict(&Point::real(vec![-0.1, 1.0])).unwrap(), Label::Neg);
    }

    #[test]
    fn linear_weights_are_normalized() {
        let h = LinearSeparator::new(vec![3.0, 4.0]).unwrap();
        let n: f64 = h.weights().iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((n - 1.0).abs() < UNIT_NORM_TOL);
        assert!(LinearSeparator::from_unit(vec![3.0, 4.0]).is_err());
        assert!(LinearSeparator::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn disjunction_fires_on_any_literal() {
        let h = Hypothesis::disjunction(5, [1, 3]).unwrap();
        let x = |ix: &[usize]| Point::Bits(BitSet::from_indices(5, ix.iter().copied()));
        assert_eq!(h.predict(&x(&[3])).unwrap(), Label::Pos);
        assert_eq!(h.predict(&x(&[0, 2, 4])).unwrap(), Label::Neg);
        assert!(MonotoneDisjunction::new(5, [1, 1]).is_err());
        assert!(MonotoneDisjunction::new(5, [5]).is_err());
    }

    #[test]
    fn mismatches_are_reported() {
        let h = Hypothesis::linear(vec![1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(
            h.predict(&Point::real(vec![1.0, 0.0])),
            Err(Error::DimensionMismatch { expected: 3, found: 2 })
        ));
        assert!(matches!(
            h.predict(&Point::Index(0)),
            Err(Error::VariantMismatch { .. })
        ));
        let t = Hypothesis::table([Label::Pos, Label::Neg]);
        assert!(t.predict(&Point::Index(2)).is_err());
        assert_eq!(t.predict(&Point::Index(1)).unwrap(), Label::Neg);
    }
}

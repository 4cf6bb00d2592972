use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;

use crate::error::{Error, Result};
use crate::finite::FiniteClass;
use crate::hypothesis::{Hypothesis, LabeledExample};

/// Exact draws from the prior renormalized over consistent members.
#[derive(Clone, Debug)]
pub(crate) struct FiniteSampler {
    class: FiniteClass,
    consistent: Vec<usize>,
    index: Option<WeightedIndex<f64>>,
}

impl FiniteSampler {
    pub(crate) fn new(class: FiniteClass) -> Self {
        let consistent = (0..class.len()).collect();
        let mut s = Self {
            class,
            consistent,
            index: None,
        };
        s.rebuild();
        s
    }

    pub(crate) fn class(&self) -> &FiniteClass {
        &self.class
    }

    pub(crate) fn consistent(&self) -> &[usize] {
        &self.consistent
    }

    fn rebuild(&mut self) {
        self.index = WeightedIndex::new(self.consistent.iter().map(|&i| self.class.weights()[i])).ok();
    }

    pub(crate) fn observe(&mut self, example: &LabeledExample) {
        let class = &self.class;
        self.consistent
            .retain(|&i| class.get(i).is_consistent(example));
        self.rebuild();
    }

    pub(crate) fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Hypothesis> {
        let index = self.index.as_ref().ok_or(Error::EmptyVersionSpace)?;
        Ok(self.class.get(self.consistent[index.sample(rng)]).clone())
    }
}

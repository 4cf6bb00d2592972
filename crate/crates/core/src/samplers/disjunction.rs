//! Uniform sampling of `k`-sparse monotone disjunctions consistent with a
//! set of labeled Boolean points.
//!
//! A negative example rules out every literal it contains, so draws are
//! taken uniformly from the `k`-subsets of the still-allowed coordinates and
//! rejected unless they hit every positive example. Conditioning the uniform
//! distribution on allowed subsets and then on the positives is still the
//! uniform distribution on the version space.
//!
//! When the acceptance rate collapses and the allowed subsets are few enough
//! to list, the version space is enumerated once and sampled directly; both
//! routes draw from the same uniform law.

use itertools::Itertools;
use rand::seq::index;
use rand::Rng;

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Label, LabeledExample, MonotoneDisjunction, Point};

use super::SamplerConfig;

/// Attempts observed before the acceptance rate is trusted.
const RATE_WARMUP: u64 = 2_000;
/// Acceptance rate (per mille) below which enumeration is considered.
const LOW_RATE_PER_MILLE: u64 = 10;

#[derive(Clone, Debug)]
pub(crate) struct DisjunctionSampler {
    dim: usize,
    k: usize,
    allowed: Vec<usize>,
    positives: Vec<BitSet>,
    enumerated: Option<Vec<Hypothesis>>,
    attempts: u64,
    accepted: u64,
}

impl DisjunctionSampler {
    pub(crate) fn new(dim: usize, k: usize) -> Self {
        Self {
            dim,
            k,
            allowed: (0..dim).collect(),
            positives: Vec::new(),
            enumerated: None,
            attempts: 0,
            accepted: 0,
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn observe(&mut self, example: &LabeledExample) {
        let Point::Bits(x) = &example.point else {
            unreachable!("validated by PriorSampler")
        };
        match example.label {
            Label::Neg => self.allowed.retain(|&i| !x.get(i)),
            Label::Pos => self.positives.push(x.clone()),
        }
        if let Some(list) = &mut self.enumerated {
            list.retain(|h| h.is_consistent(example));
        }
        self.attempts = 0;
        self.accepted = 0;
    }

    pub(crate) fn draw<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        config: &SamplerConfig,
    ) -> Result<Hypothesis> {
        if let Some(list) = &self.enumerated {
            if list.is_empty() {
                return Err(Error::EmptyVersionSpace);
            }
            return Ok(list[rng.random_range(0..list.len())].clone());
        }
        if self.allowed.len() < self.k {
            return Err(Error::EmptyVersionSpace);
        }
        let mut literals = vec![0usize; self.k];
        for _ in 0..config.max_rejections {
            for (slot, i) in literals.iter_mut().zip(index::sample(rng, self.allowed.len(), self.k)) {
                *slot = self.allowed[i];
            }
            self.attempts += 1;
            if self
                .positives
                .iter()
                .all(|x| literals.iter().any(|&l| x.get(l)))
            {
                self.accepted += 1;
                return Hypothesis::disjunction(self.dim, literals.iter().copied());
            }
            if self.should_enumerate(config) {
                self.enumerate()?;
                return self.draw(rng, config);
            }
        }
        Err(Error::SamplerStarved {
            rejections: config.max_rejections,
        })
    }

    fn should_enumerate(&self, config: &SamplerConfig) -> bool {
        self.attempts >= RATE_WARMUP
            && self.accepted * 1000 < self.attempts * LOW_RATE_PER_MILLE
            && binomial(self.allowed.len(), self.k) <= config.enumeration_limit as u128
    }

    fn enumerate(&mut self) -> Result<()> {
        let mut list = Vec::new();
        for lits in self.allowed.iter().copied().combinations(self.k) {
            if self.positives.iter().all(|x| lits.iter().any(|&l| x.get(l))) {
                list.push(MonotoneDisjunction::new(self.dim, lits)?.into());
            }
        }
        self.enumerated = Some(list);
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomial_values() {
        assert_eq!(binomial(10, 2), 45);
        assert_eq!(binomial(75, 4), 1_215_450);
        assert_eq!(binomial(3, 5), 0);
        assert_eq!(binomial(6, 0), 1);
    }
}

//! Samplers for the prior restricted to the current version space.
//!
//! * linear separators: great-circle hit-and-run on the unit sphere,
//! * monotone disjunctions: rejection sampling over allowed literals,
//! * finite classes: exact draws from the renormalized prior.
//!
//! A [`PriorSampler`] owns its constraints and its random stream, so two
//! samplers built with the same seed and fed the same constraints emit the
//! same hypotheses.

mod disjunction;
mod finite;
mod sphere;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::estimator::EdgeSample;
use crate::finite::FiniteClass;
use crate::hypothesis::{Hypothesis, LabeledExample, Point, VersionSpaceConstraints};
use crate::pool::Pool;

use disjunction::DisjunctionSampler;
use finite::FiniteSampler;
use sphere::SphereChain;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SamplerConfig {
    /// Hit-and-run moves between emitted hypotheses.
    pub chain_steps: u64,
    /// Hit-and-run moves after (re)initializing the chain.
    pub burn_in: u64,
    /// Rejection budget per draw before reporting starvation.
    pub max_rejections: u64,
    pub rng_seed: u64,
    /// Largest number of candidate disjunctions the rejection sampler may
    /// enumerate once its acceptance rate collapses; 0 disables enumeration.
    pub enumeration_limit: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self {
            chain_steps: 20,
            burn_in: 100,
            max_rejections: 1_000_000,
            rng_seed: 0,
            enumeration_limit: 2_000_000,
        }
    }
}

impl SamplerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self {
            rng_seed: seed,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.chain_steps == 0 {
            return Err(Error::Config("chain_steps must be at least 1".into()));
        }
        if self.burn_in == 0 {
            return Err(Error::Config("burn_in must be at least 1".into()));
        }
        if self.max_rejections == 0 {
            return Err(Error::Config("max_rejections must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug)]
enum Kind {
    HitAndRunSphere(SphereChain),
    RejectionDisjunction(DisjunctionSampler),
    ExhaustiveFinite(FiniteSampler),
}

/// Draws hypotheses from the prior restricted to a version space.
#[derive(Clone, Debug)]
pub struct PriorSampler {
    kind: Kind,
    config: SamplerConfig,
    constraints: VersionSpaceConstraints,
    rng: ChaCha8Rng,
    drawn: u64,
}

impl PriorSampler {
    fn build(kind: Kind, config: SamplerConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            kind,
            rng: ChaCha8Rng::seed_from_u64(config.rng_seed),
            config,
            constraints: VersionSpaceConstraints::new(),
            drawn: 0,
        })
    }

    /// Uniform prior on the unit sphere in `R^dim`.
    pub fn hit_and_run(dim: usize, config: SamplerConfig) -> Result<Self> {
        if dim == 0 {
            return Err(invalid("sphere dimension must be positive"));
        }
        Self::build(Kind::HitAndRunSphere(SphereChain::new(dim)), config)
    }

    /// Uniform prior over `k`-sparse monotone disjunctions on `{0,1}^dim`.
    pub fn disjunction(dim: usize, k: usize, config: SamplerConfig) -> Result<Self> {
        if k == 0 || k > dim {
            return Err(invalid(format!("need 0 < k <= d, got k={k}, d={dim}")));
        }
        Self::build(
            Kind::RejectionDisjunction(DisjunctionSampler::new(dim, k)),
            config,
        )
    }

    /// The class's own prior.
    pub fn finite(class: FiniteClass, config: SamplerConfig) -> Result<Self> {
        Self::build(Kind::ExhaustiveFinite(FiniteSampler::new(class)), config)
    }

    pub fn config(&self) -> &SamplerConfig {
        &self.config
    }

    pub fn constraints(&self) -> &VersionSpaceConstraints {
        &self.constraints
    }

    /// Total hypotheses emitted so far.
    pub fn hypotheses_drawn(&self) -> u64 {
        self.drawn
    }

    /// The underlying class and indices of its consistent members, for
    /// exhaustive samplers.
    pub fn finite_state(&self) -> Option<(&FiniteClass, &[usize])> {
        match &self.kind {
            Kind::ExhaustiveFinite(f) => Some((f.class(), f.consistent())),
            _ => None,
        }
    }

    /// Same class and constraints with an independent random stream.
    pub fn fork(&self, seed: u64) -> Self {
        let mut s = self.clone();
        s.config.rng_seed = seed;
        s.rng = ChaCha8Rng::seed_from_u64(seed);
        s.drawn = 0;
        s
    }

    pub fn check_point(&self, x: &Point) -> Result<()> {
        match (&self.kind, x) {
            (Kind::HitAndRunSphere(c), Point::Real(v)) if v.len() == c.dim() => Ok(()),
            (Kind::RejectionDisjunction(s), Point::Bits(b)) if b.len() == s.dim() => Ok(()),
            (Kind::ExhaustiveFinite(f), _) => f.class().get(0).check_point(x),
            (Kind::HitAndRunSphere(c), Point::Real(v)) => Err(Error::DimensionMismatch {
                expected: c.dim(),
                found: v.len(),
            }),
            (Kind::RejectionDisjunction(s), Point::Bits(b)) => Err(Error::DimensionMismatch {
                expected: s.dim(),
                found: b.len(),
            }),
            (k, _) => Err(Error::VariantMismatch {
                hypothesis: match k {
                    Kind::HitAndRunSphere(_) => "linear",
                    _ => "disjunction",
                },
                point: x.kind(),
            }),
        }
    }

    pub fn add_constraint(&mut self, example: LabeledExample) -> Result<()> {
        self.check_point(&example.point)?;
        match &mut self.kind {
            Kind::HitAndRunSphere(c) => c.observe(&example),
            Kind::RejectionDisjunction(s) => s.observe(&example),
            Kind::ExhaustiveFinite(f) => f.observe(&example),
        }
        self.constraints.push(example);
        Ok(())
    }

    /// One draw from the prior restricted to the version space.
    pub fn sample_hypothesis(&mut self) -> Result<Hypothesis> {
        let h = match &mut self.kind {
            Kind::HitAndRunSphere(c) => c.draw(&mut self.rng, &self.config)?,
            Kind::RejectionDisjunction(s) => s.draw(&mut self.rng, &self.config)?,
            Kind::ExhaustiveFinite(f) => f.draw(&mut self.rng)?,
        };
        assert!(
            self.constraints.admits(&h),
            "sampler emitted a hypothesis outside the version space"
        );
        self.drawn += 1;
        Ok(h)
    }

    /// `n` independent pairs (`2n` independent draws).
    pub fn sample_pairs(&mut self, n: usize) -> Result<Vec<(Hypothesis, Hypothesis)>> {
        if n == 0 {
            return Err(invalid("edge sample size must be at least 1"));
        }
        (0..n)
            .map(|_| Ok((self.sample_hypothesis()?, self.sample_hypothesis()?)))
            .collect()
    }

    /// `n` edges with distances measured on `pool`.
    pub fn sample_edges(&mut self, n: usize, pool: &Pool) -> Result<EdgeSample> {
        EdgeSample::new(self.sample_pairs(n)?, pool)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::BitSet;
    use crate::hypothesis::Label;
    use crate::stats::{chi_square_independence_p_value, chi_square_p_value};
    use std::f64::consts::PI;

    fn bits(d: usize, ones: &[usize]) -> Point {
        Point::Bits(BitSet::from_indices(d, ones.iter().copied()))
    }

    #[test]
    fn uniform_finite_class_frequencies() {
        let class = FiniteClass::from_tables(
            vec![
                BitSet::from_bools([true, true]),
                BitSet::from_bools([false, true]),
                BitSet::from_bools([true, false]),
            ],
            None,
        )
        .unwrap();
        let mut s = PriorSampler::finite(class.clone(), SamplerConfig::with_seed(1)).unwrap();
        let mut counts = [0usize; 3];
        let n = 10_000;
        for _ in 0..n {
            let h = s.sample_hypothesis().unwrap();
            counts[class.index_of(&h).unwrap()] += 1;
        }
        let sigma = (n as f64 * (1.0 / 3.0) * (2.0 / 3.0)).sqrt();
        for c in counts {
            assert!((c as f64 - n as f64 / 3.0).abs() < 3.0 * sigma, "{counts:?}");
        }
        assert_eq!(s.hypotheses_drawn(), n as u64);
    }

    #[test]
    fn single_consistent_literal() {
        let mut s = PriorSampler::disjunction(5, 1, SamplerConfig::with_seed(4)).unwrap();
        s.add_constraint(LabeledExample::new(bits(5, &[0]), Label::Pos))
            .unwrap();
        for _ in 0..200 {
            match s.sample_hypothesis().unwrap() {
                Hypothesis::Disjunction(h) => assert_eq!(h.literals(), &[0]),
                other => panic!("unexpected {other:?}"),
            }
        }
    }

    #[test]
    fn sphere_chain_respects_constraints_and_norm() {
        let mut s = PriorSampler::hit_and_run(6, SamplerConfig::with_seed(8)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let target = Hypothesis::linear(crate::pool::uniform_sphere(&mut rng, 6)).unwrap();
        for _ in 0..15 {
            let x = Point::real(crate::pool::uniform_sphere(&mut rng, 6));
            let y = target.label(&x);
            s.add_constraint(LabeledExample::new(x, y)).unwrap();
            for _ in 0..20 {
                let h = s.sample_hypothesis().unwrap();
                let Hypothesis::Linear(w) = &h else { unreachable!() };
                let n: f64 = w.weights().iter().map(|v| v * v).sum::<f64>().sqrt();
                assert!((n - 1.0).abs() < 1e-9);
                assert!(s.constraints().admits(&h));
            }
        }
    }

    #[test]
    fn two_dimensional_arc_is_uniform() {
        // Feasible set for x = (1, 0) labeled + is the arc angle in [-pi/2, pi/2].
        let mut s = PriorSampler::hit_and_run(2, SamplerConfig::with_seed(21)).unwrap();
        s.add_constraint(LabeledExample::new(Point::real(vec![1.0, 0.0]), Label::Pos))
            .unwrap();
        let bins = 10;
        let mut counts = vec![0.0; bins];
        let n = 10_000;
        for _ in 0..n {
            let Hypothesis::Linear(w) = s.sample_hypothesis().unwrap() else { unreachable!() };
            let angle = w.weights()[1].atan2(w.weights()[0]);
            assert!(angle.abs() <= PI / 2.0);
            let b = (((angle + PI / 2.0) / PI) * bins as f64).floor() as usize;
            counts[b.min(bins - 1)] += 1.0;
        }
        let expected = vec![n as f64 / bins as f64; bins];
        assert!(chi_square_p_value(&counts, &expected) > 0.01, "{counts:?}");
    }

    #[test]
    fn same_seed_same_stream() {
        let mk = || {
            let mut s = PriorSampler::hit_and_run(4, SamplerConfig::with_seed(99)).unwrap();
            s.add_constraint(LabeledExample::new(
                Point::real(vec![0.5, 0.5, 0.5, 0.5]),
                Label::Neg,
            ))
            .unwrap();
            (0..50).map(|_| s.sample_hypothesis().unwrap()).collect::<Vec<_>>()
        };
        assert_eq!(mk(), mk());
    }

    fn literal_counts(s: &mut PriorSampler, n: usize, pairs: &[[usize; 2]]) -> Vec<f64> {
        let mut counts = vec![0.0; pairs.len()];
        for _ in 0..n {
            let Hypothesis::Disjunction(h) = s.sample_hypothesis().unwrap() else { unreachable!() };
            let i = pairs.iter().position(|p| p == h.literals()).expect("outside version space");
            counts[i] += 1.0;
        }
        counts
    }

    #[test]
    fn rare_disjunctions_fall_back_to_enumeration() {
        // 4 of the 780 pairs on 40 coordinates hit both positives.
        let mut s = PriorSampler::disjunction(40, 2, SamplerConfig::with_seed(6)).unwrap();
        s.add_constraint(LabeledExample::new(bits(40, &[0, 1]), Label::Pos)).unwrap();
        s.add_constraint(LabeledExample::new(bits(40, &[2, 3]), Label::Pos)).unwrap();
        let pairs = [[0, 2], [0, 3], [1, 2], [1, 3]];
        let n = 8_000;
        let counts = literal_counts(&mut s, n, &pairs);
        assert!(chi_square_p_value(&counts, &[n as f64 / 4.0; 4]) > 0.01, "{counts:?}");
        // A later negative prunes the enumerated list.
        s.add_constraint(LabeledExample::new(bits(40, &[3]), Label::Neg)).unwrap();
        let counts = literal_counts(&mut s, 3_000, &pairs);
        assert_eq!(counts[1] + counts[3], 0.0);
        assert!(chi_square_p_value(&[counts[0], counts[2]], &[1500.0; 2]) > 0.01, "{counts:?}");
    }

    #[test]
    fn rejection_route_is_uniform() {
        // Pairs on 6 coordinates that hit {0, 1}: 15 - 6 = 9 of them.
        let mut s = PriorSampler::disjunction(6, 2, SamplerConfig::with_seed(12)).unwrap();
        s.add_constraint(LabeledExample::new(bits(6, &[0, 1]), Label::Pos)).unwrap();
        let pairs: Vec<[usize; 2]> = (0..6)
            .flat_map(|a| (a + 1..6).map(move |b| [a, b]))
            .filter(|p| p[0] <= 1)
            .collect();
        assert_eq!(pairs.len(), 9);
        let n = 9_000;
        let counts = literal_counts(&mut s, n, &pairs);
        assert!(chi_square_p_value(&counts, &vec![n as f64 / 9.0; 9]) > 0.01, "{counts:?}");
    }

    #[test]
    fn edge_endpoints_are_independent() {
        let class = FiniteClass::from_tables(
            vec![
                BitSet::from_bools([true, true]),
                BitSet::from_bools([false, true]),
                BitSet::from_bools([true, false]),
            ],
            Some(vec![0.5, 0.3, 0.2]),
        )
        .unwrap();
        let mut s = PriorSampler::finite(class.clone(), SamplerConfig::with_seed(31)).unwrap();
        let mut table = vec![vec![0.0; 3]; 3];
        for (a, b) in s.sample_pairs(20_000).unwrap() {
            table[class.index_of(&a).unwrap()][class.index_of(&b).unwrap()] += 1.0;
        }
        assert!(chi_square_independence_p_value(&table) > 0.01, "{table:?}");
    }

    #[test]
    fn zero_edges_is_rejected() {
        let mut s = PriorSampler::hit_and_run(3, SamplerConfig::default()).unwrap();
        assert!(s.sample_pairs(0).is_err());
    }

    #[test]
    fn singleton_class_gives_loops() {
        let class = FiniteClass::from_tables(vec![BitSet::from_bools([true, false])], None).unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::default()).unwrap();
        for (a, b) in s.sample_pairs(20).unwrap() {
            assert_eq!(a, b);
        }
    }

    #[test]
    fn starvation_is_reported() {
        let cfg = SamplerConfig {
            max_rejections: 10,
            enumeration_limit: 0,
            ..SamplerConfig::with_seed(2)
        };
        let mut s = PriorSampler::disjunction(40, 1, cfg).unwrap();
        s.add_constraint(LabeledExample::new(bits(40, &[7]), Label::Pos))
            .unwrap();
        // Acceptance 1/40 per draw; 10 tries starve often. Find a starving draw.
        let starved = (0..200).any(|_| {
            matches!(s.sample_hypothesis(), Err(Error::SamplerStarved { rejections: 10 }))
        });
        assert!(starved);
    }

    #[test]
    fn constraint_points_are_validated() {
        let mut s = PriorSampler::hit_and_run(3, SamplerConfig::default()).unwrap();
        assert!(s
            .add_constraint(LabeledExample::new(Point::real(vec![1.0]), Label::Pos))
            .is_err());
        assert!(s
            .add_constraint(LabeledExample::new(Point::Index(0), Label::Pos))
            .is_err());
        let mut d = PriorSampler::disjunction(5, 2, SamplerConfig::default()).unwrap();
        assert!(d
            .add_constraint(LabeledExample::new(bits(4, &[0]), Label::Pos))
            .is_err());
    }

    #[test]
    fn config_validation() {
        let bad = SamplerConfig {
            chain_steps: 0,
            ..SamplerConfig::default()
        };
        assert!(PriorSampler::hit_and_run(2, bad).is_err());
        assert!(PriorSampler::disjunction(3, 4, SamplerConfig::default()).is_err());
    }
}

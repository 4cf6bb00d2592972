//! Edge samples and the `psi` statistic.
//!
//! For an edge sequence `E = ((h_1, h'_1), ..., (h_n, h'_n))` drawn from the
//! restricted prior, `psi(E) = sum_i d(h_i, h'_i)`. An edge contributes to
//! `psi_plus(x)` when both endpoints label `x` positive and to `psi_minus(x)`
//! when both label it negative; edges cut by `x` count in neither.

use crate::error::Result;
use crate::hypothesis::{Hypothesis, Label, Point};
use crate::pool::Pool;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SplitStats {
    pub psi_total: f64,
    pub psi_plus: f64,
    pub psi_minus: f64,
}

impl SplitStats {
    pub fn worst(&self) -> f64 {
        self.psi_plus.max(self.psi_minus)
    }
}

#[derive(Clone, Debug, Default)]
pub struct EdgeSample {
    edges: Vec<(Hypothesis, Hypothesis)>,
    distances: Vec<f64>,
}

impl EdgeSample {
    /// Measures every edge against `pool` once.
    pub fn new(edges: Vec<(Hypothesis, Hypothesis)>, pool: &Pool) -> Result<Self> {
        let mut distances = Vec::with_capacity(edges.len());
        for (a, b) in &edges {
            pool.check_hypothesis(a)?;
            pool.check_hypothesis(b)?;
            let (sa, sb) = (pool.signature(a), pool.signature(b));
            distances.push(pool.signature_distance(&sa, &sb));
        }
        Ok(Self { edges, distances })
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edges(&self) -> &[(Hypothesis, Hypothesis)] {
        &self.edges
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn psi(&self) -> f64 {
        self.distances.iter().sum()
    }

    /// `psi / n`, or 0 for an empty sample.
    pub fn mean_distance(&self) -> f64 {
        if self.edges.is_empty() {
            0.0
        } else {
            self.psi() / self.edges.len() as f64
        }
    }

    pub fn split_stats(&self, x: &Point) -> Result<SplitStats> {
        if let Some((a, _)) = self.edges.first() {
            a.check_point(x)?;
        }
        let mut stats = SplitStats {
            psi_total: self.psi(),
            ..SplitStats::default()
        };
        for ((a, b), &d) in self.edges.iter().zip(&self.distances) {
            match (a.label(x), b.label(x)) {
                (Label::Pos, Label::Pos) => stats.psi_plus += d,
                (Label::Neg, Label::Neg) => stats.psi_minus += d,
                _ => {}
            }
        }
        Ok(stats)
    }

    pub fn split_stats_batch(&self, xs: &[Point]) -> Result<Vec<SplitStats>> {
        xs.iter().map(|x| self.split_stats(x)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FiniteClass;
    use crate::oracle::ClassGeometry;
    use crate::samplers::{PriorSampler, SamplerConfig};
    use proptest::prelude::*;

    fn table(bits: &str) -> Hypothesis {
        Hypothesis::table(bits.chars().map(|c| Label::from_bool(c == '+')))
    }

    #[test]
    fn empty_sample() {
        let e = EdgeSample::default();
        assert_eq!(e.psi(), 0.0);
        assert_eq!(e.mean_distance(), 0.0);
    }

    #[test]
    fn loops_weigh_nothing() {
        let pool = Pool::domain(4).unwrap();
        let h = table("+-+-");
        let e = EdgeSample::new(vec![(h.clone(), h.clone()); 5], &pool).unwrap();
        assert_eq!(e.psi(), 0.0);
    }

    #[test]
    fn unanimous_and_cut_points() {
        let pool = Pool::domain(4).unwrap();
        let a = table("++-+");
        let b = table("+-+-");
        let e = EdgeSample::new(vec![(a.clone(), b.clone()), (b, a)], &pool).unwrap();
        assert!((e.psi() - 1.5).abs() < 1e-12);
        let s = e.split_stats(&Point::Index(0)).unwrap();
        assert_eq!(s.psi_plus, e.psi());
        assert_eq!(s.psi_minus, 0.0);
        let s = e.split_stats(&Point::Index(1)).unwrap();
        assert_eq!((s.psi_plus, s.psi_minus), (0.0, 0.0));
    }

    #[test]
    fn side_statistics_track_exact_potentials() {
        // Five tables on six points with unequal weights.
        let class = FiniteClass::new(
            ["++--+-", "+-+-+-", "-++-++", "+++---", "--+++-"]
                .iter()
                .map(|s| table(s))
                .collect(),
            vec![0.1, 0.3, 0.2, 0.25, 0.15],
        )
        .unwrap();
        let pool = Pool::domain(6).unwrap();
        let geo = ClassGeometry::new(&class, &pool).unwrap();
        let x = Point::Index(2);
        let exact = geo.split_at(&x).unwrap();
        let mut sampler = PriorSampler::finite(class, SamplerConfig::with_seed(5)).unwrap();
        let (reps, n) = (200, 500);
        let (mut phi, mut plus, mut minus) = (Vec::new(), Vec::new(), Vec::new());
        for _ in 0..reps {
            let e = sampler.sample_edges(n, &pool).unwrap();
            let s = e.split_stats(&x).unwrap();
            phi.push(s.psi_total / n as f64);
            plus.push(s.psi_plus / n as f64);
            minus.push(s.psi_minus / n as f64);
        }
        for (xs, want) in [
            (&phi, geo.phi()),
            (&plus, exact.potential_plus),
            (&minus, exact.potential_minus),
        ] {
            let (m, sd) = crate::stats::mean_std(xs);
            let band = 3.0 * sd / (reps as f64).sqrt() + 1e-12;
            assert!((m - want).abs() <= band, "mean {m} vs exact {want} (band {band})");
        }
    }

    proptest! {
        #[test]
        fn psi_ignores_edge_order(
            rows in prop::collection::vec((0u8..16, 0u8..16), 1..30),
            seed in any::<u64>(),
        ) {
            let pool = Pool::domain(4).unwrap();
            let h = |v: u8| Hypothesis::table((0..4).map(|i| Label::from_bool(v >> i & 1 == 1)));
            let edges: Vec<_> = rows.iter().map(|&(a, b)| (h(a), h(b))).collect();
            let mut shuffled = edges.clone();
            use rand::seq::SliceRandom;
            use rand::SeedableRng;
            shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
            let a = EdgeSample::new(edges, &pool).unwrap();
            let b = EdgeSample::new(shuffled, &pool).unwrap();
            prop_assert!((a.psi() - b.psi()).abs() < 1e-9);
            for i in 0..4 {
                let (sa, sb) = (a.split_stats(&Point::Index(i)).unwrap(), b.split_stats(&Point::Index(i)).unwrap());
                prop_assert!((sa.psi_plus - sb.psi_plus).abs() < 1e-9);
                prop_assert!(sa.worst() <= sa.psi_total + 1e-12);
                prop_assert!(sa.psi_plus + sa.psi_minus <= sa.psi_total + 1e-12);
            }
        }
    }
}

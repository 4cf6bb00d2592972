//! Evaluation pools, data distributions and the empirical hypothesis distance.

use std::borrow::Cow;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::bits::BitSet;
use crate::error::{invalid, Error, Result};
use crate::hypothesis::{Hypothesis, Point};

/// An ordered, non-empty list of points standing in for the data
/// distribution when measuring distances between hypotheses.
#[derive(Clone, Debug, PartialEq)]
pub struct Pool {
    points: Vec<Point>,
    /// Set when the points are exactly `Index(0), .., Index(n-1)`.
    identity_domain: bool,
}

impl Pool {
    pub fn new(points: Vec<Point>) -> Result<Self> {
        let first = points
            .first()
            .ok_or_else(|| invalid("pool must contain at least one point"))?;
        let (kind, dim) = (first.kind(), first.dimension());
        for p in &points[1..] {
            if p.kind() != kind {
                return Err(invalid(format!(
                    "pool mixes {} and {} points",
                    kind,
                    p.kind()
                )));
            }
            if p.dimension() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim.unwrap_or(0),
                    found: p.dimension().unwrap_or(0),
                });
            }
        }
        let identity_domain = points
            .iter()
            .enumerate()
            .all(|(i, p)| matches!(p, Point::Index(j) if *j == i));
        Ok(Self {
            points,
            identity_domain,
        })
    }

    /// The whole finite domain `{0, .., n-1}` of a table class.
    pub fn domain(n: usize) -> Result<Self> {
        Self::new((0..n).map(Point::Index).collect())
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn get(&self, i: usize) -> &Point {
        &self.points[i]
    }

    /// Validates that `h` can label every point in the pool.
    pub fn check_hypothesis(&self, h: &Hypothesis) -> Result<()> {
        match h {
            Hypothesis::Table(t) => {
                let max = self
                    .points
                    .iter()
                    .map(|p| match p {
                        Point::Index(i) => Ok(*i),
                        other => Err(Error::VariantMismatch {
                            hypothesis: "table",
                            point: other.kind(),
                        }),
                    })
                    .try_fold(0usize, |m, i| i.map(|i| m.max(i)))?;
                if max >= t.domain_size() {
                    return Err(invalid(format!(
                        "pool index {max} outside table domain of size {}",
                        t.domain_size()
                    )));
                }
                Ok(())
            }
            _ => h.check_point(&self.points[0]),
        }
    }

    /// Labels of `h` on every pool point, positive = set bit.
    ///
    /// Assumes `h` has been validated against the pool.
    pub fn signature<'a>(&self, h: &'a Hypothesis) -> Cow<'a, BitSet> {
        if let Hypothesis::Table(t) = h {
            if self.identity_domain && t.domain_size() == self.points.len() {
                return Cow::Borrowed(t.bits());
            }
        }
        Cow::Owned(BitSet::from_bools(
            self.points.iter().map(|x| h.label(x).is_positive()),
        ))
    }

    /// Fraction of pool points with differing signatures.
    #[inline]
    pub fn signature_distance(&self, a: &BitSet, b: &BitSet) -> f64 {
        a.hamming(b) as f64 / self.points.len() as f64
    }
}

/// `Pr_{x ~ pool}(h(x) != g(x))`.
pub fn empirical_distance(h: &Hypothesis, g: &Hypothesis, pool: &Pool) -> Result<f64> {
    h.check_compatible(g)?;
    pool.check_hypothesis(h)?;
    pool.check_hypothesis(g)?;
    let (a, b) = (pool.signature(h), pool.signature(g));
    Ok(pool.signature_distance(&a, &b))
}

/// Source of fresh unlabeled points.
#[derive(Clone, Debug, PartialEq)]
pub enum DataDistribution {
    /// Uniform on the unit sphere in `R^dim`.
    UniformSphere { dim: usize },
    /// Independent Bernoulli(p) coordinates.
    Bernoulli { dim: usize, p: f64 },
    /// Uniform over a finite domain `{0, .., size-1}`.
    UniformDomain { size: usize },
}

impl DataDistribution {
    pub fn validate(&self) -> Result<()> {
        match *self {
            DataDistribution::UniformSphere { dim } if dim == 0 => {
                Err(invalid("sphere dimension must be positive"))
            }
            DataDistribution::Bernoulli { dim, p } if dim == 0 || !(0.0..=1.0).contains(&p) => {
                Err(invalid(format!("bad Bernoulli distribution dim={dim} p={p}")))
            }
            DataDistribution::UniformDomain { size } if size == 0 => {
                Err(invalid("domain must be non-empty"))
            }
            _ => Ok(()),
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            DataDistribution::UniformSphere { dim } => Point::real(uniform_sphere(rng, dim)),
            DataDistribution::Bernoulli { dim, p } => {
                Point::Bits(BitSet::from_bools((0..dim).map(|_| rng.random_bool(p))))
            }
            DataDistribution::UniformDomain { size } => Point::Index(rng.random_range(0..size)),
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Vec<Point> {
        (0..n).map(|_| self.sample(rng)).collect()
    }

    pub fn sample_pool<R: Rng + ?Sized>(&self, rng: &mut R, n: usize) -> Result<Pool> {
        Pool::new(self.sample_n(rng, n))
    }
}

/// A uniformly random unit vector in `R^dim` (normalized Gaussian).
pub fn uniform_sphere<R: Rng + ?Sized>(rng: &mut R, dim: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

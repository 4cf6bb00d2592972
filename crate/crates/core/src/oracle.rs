//! Exhaustive computation of average diameter, diameter, splitting and
//! average splitting on finite classes.
//!
//! Everything here is computed exactly from the full pairwise distance
//! matrix over an evaluation pool. The weights of a [`FiniteClass`] are read
//! as the conditional prior on the version space `V`, so for a subset `S` of
//! `V` the *potential* `sum_{h,g in S} w(h) w(g) d(h,g)` equals
//! `(pi(S)/pi(V))^2 * Phi(S)`.

use crate::error::{invalid, Result};
use crate::finite::FiniteClass;
use crate::hypothesis::{Hypothesis, Point};
use crate::pool::Pool;

/// Unordered pair of member indices, `i < j`.
pub type EdgeIndex = (usize, usize);

/// Masses and potentials on each side of a query point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SplitPotentials {
    pub mass_plus: f64,
    pub mass_minus: f64,
    pub potential_plus: f64,
    pub potential_minus: f64,
}

impl SplitPotentials {
    pub fn worst_potential(&self) -> f64 {
        self.potential_plus.max(self.potential_minus)
    }
}

/// Precomputed pairwise geometry of a finite class over a pool.
#[derive(Clone, Debug)]
pub struct ClassGeometry {
    hypotheses: Vec<Hypothesis>,
    weights: Vec<f64>,
    dist: Vec<f64>,
    phi: f64,
}

impl ClassGeometry {
    pub fn new(class: &FiniteClass, pool: &Pool) -> Result<Self> {
        let n = class.len();
        let sigs = class
            .hypotheses()
            .iter()
            .map(|h| {
                pool.check_hypothesis(h)?;
                Ok(pool.signature(h).into_owned())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut dist = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let d = pool.signature_distance(&sigs[i], &sigs[j]);
                dist[i * n + j] = d;
                dist[j * n + i] = d;
            }
        }
        let mut geo = Self {
            hypotheses: class.hypotheses().to_vec(),
            weights: class.weights().to_vec(),
            dist,
            phi: 0.0,
        };
        geo.phi = geo.potential(&vec![true; n]);
        Ok(geo)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    #[inline]
    pub fn distance(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.len() + j]
    }

    /// Average diameter of the whole class.
    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn diam(&self) -> f64 {
        self.dist.iter().copied().fold(0.0, f64::max)
    }

    /// `sum_{i,j in S} w_i w_j d_ij` over the members flagged in `members`.
    pub fn potential(&self, members: &[bool]) -> f64 {
        let n = self.len();
        let mut total = 0.0;
        for i in (0..n).filter(|&i| members[i]) {
            for j in (0..n).filter(|&j| members[j]) {
                total += self.weights[i] * self.weights[j] * self.dist[i * n + j];
            }
        }
        total
    }

    pub fn mass(&self, members: &[bool]) -> f64 {
        self.weights
            .iter()
            .zip(members)
            .filter(|(_, &m)| m)
            .map(|(w, _)| w)
            .sum()
    }

    /// Average diameter of a subset under the renormalized prior; zero for
    /// the empty set.
    pub fn phi_of(&self, members: &[bool]) -> f64 {
        let mass = self.mass(members);
        if mass == 0.0 {
            0.0
        } else {
            self.potential(members) / (mass * mass)
        }
    }

    /// Whether each member labels `x` positive.
    pub fn labels_at(&self, x: &Point) -> Result<Vec<bool>> {
        self.hypotheses
            .iter()
            .map(|h| h.predict(x).map(|l| l.is_positive()))
            .collect()
    }

    pub fn split_at(&self, x: &Point) -> Result<SplitPotentials> {
        Ok(self.split_from_labels(&self.labels_at(x)?))
    }

    pub fn split_from_labels(&self, plus: &[bool]) -> SplitPotentials {
        let minus: Vec<bool> = plus.iter().map(|b| !b).collect();
        SplitPotentials {
            mass_plus: self.mass(plus),
            mass_minus: self.mass(&minus),
            potential_plus: self.potential(plus),
            potential_minus: self.potential(&minus),
        }
    }

    /// Largest `rho` for which `x` rho-average splits the class; 1 when the
    /// class has zero average diameter.
    pub fn average_split_ratio(&self, x: &Point) -> Result<f64> {
        Ok(self.ratio_from_split(&self.split_at(x)?))
    }

    fn ratio_from_split(&self, s: &SplitPotentials) -> f64 {
        if self.phi == 0.0 {
            1.0
        } else {
            1.0 - s.worst_potential() / self.phi
        }
    }

    pub fn average_splits(&self, x: &Point, rho: f64) -> Result<bool> {
        let s = self.split_at(x)?;
        Ok(s.worst_potential() <= (1.0 - rho) * self.phi)
    }

    pub fn all_pairs(&self) -> Vec<EdgeIndex> {
        let n = self.len();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .collect()
    }

    /// Edges strictly longer than `epsilon`.
    pub fn long_edges(&self, edges: &[EdgeIndex], epsilon: f64) -> Vec<EdgeIndex> {
        edges
            .iter()
            .copied()
            .filter(|&(i, j)| self.distance(i, j) > epsilon)
            .collect()
    }

    /// Length buckets `E_1, .., E_K` with `K = ceil(log2(1/epsilon))`:
    /// `E_k` holds pairs with distance in `[2^{k-1} eps, 2^k eps)`, the last
    /// bucket closed above. Pairs shorter than `epsilon` are dropped.
    pub fn length_buckets(&self, edges: &[EdgeIndex], epsilon: f64) -> Vec<Vec<EdgeIndex>> {
        let k_max = log2_ceil_inv(epsilon);
        let mut buckets = vec![Vec::new(); k_max];
        for &(i, j) in edges {
            let d = self.distance(i, j);
            if d < epsilon {
                continue;
            }
            let mut k = 1;
            while k < k_max && d >= epsilon * (1u64 << k) as f64 {
                k += 1;
            }
            buckets[k - 1].push((i, j));
        }
        buckets
    }

    /// Pool fraction of points that rho-split the long part of `edges`.
    /// Vacuously 1 when no edge is longer than `epsilon`.
    pub fn splitting_tau(
        &self,
        pool: &Pool,
        edges: &[EdgeIndex],
        rho: f64,
        epsilon: f64,
    ) -> Result<f64> {
        let long = self.long_edges(edges, epsilon);
        if long.is_empty() {
            return Ok(1.0);
        }
        let mut hits = 0usize;
        for x in pool.points() {
            if rho_splits(&self.labels_at(x)?, &long, rho) {
                hits += 1;
            }
        }
        Ok(hits as f64 / pool.len() as f64)
    }

    /// Pool fraction of points that rho-average split the class.
    pub fn average_splitting_tau(&self, pool: &Pool, rho: f64) -> Result<f64> {
        let mut hits = 0usize;
        for x in pool.points() {
            let s = self.split_from_labels(&self.labels_at(x)?);
            if s.worst_potential() <= (1.0 - rho) * self.phi {
                hits += 1;
            }
        }
        Ok(hits as f64 / pool.len() as f64)
    }
}

/// Whether `max(|E+|, |E-|) <= (1 - rho)|E|` for the given member labels.
pub fn rho_splits(labels: &[bool], edges: &[EdgeIndex], rho: f64) -> bool {
    let (mut plus, mut minus) = (0usize, 0usize);
    for &(i, j) in edges {
        match (labels[i], labels[j]) {
            (true, true) => plus += 1,
            (false, false) => minus += 1,
            _ => {}
        }
    }
    plus.max(minus) as f64 <= (1.0 - rho) * edges.len() as f64
}

/// `ceil(log2(1/epsilon))`, at least 1. Base two throughout the crate.
pub fn log2_ceil_inv(epsilon: f64) -> usize {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut k = 1usize;
    while epsilon * ((1u64 << k) as f64) < 1.0 {
        k += 1;
    }
    k
}

fn check_rho(rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(invalid(format!("rho must lie in (0, 1], got {rho}")))
    }
}

/// Exact average diameter of `class` over `pool`.
pub fn brute_phi(class: &FiniteClass, pool: &Pool) -> Result<f64> {
    Ok(ClassGeometry::new(class, pool)?.phi())
}

/// Exact diameter of `class` over `pool`.
pub fn brute_diam(class: &FiniteClass, pool: &Pool) -> Result<f64> {
    Ok(ClassGeometry::new(class, pool)?.diam())
}

/// Whether `x` rho-average splits `class`. An empty side contributes zero.
pub fn brute_average_split_check(
    class: &FiniteClass,
    pool: &Pool,
    x: &Point,
    rho: f64,
) -> Result<bool> {
    check_rho(rho)?;
    ClassGeometry::new(class, pool)?.average_splits(x, rho)
}

/// Pool fraction of points that rho-split the long edges of the full pair set.
pub fn brute_splitting_index_tau(
    class: &FiniteClass,
    pool: &Pool,
    rho: f64,
    epsilon: f64,
) -> Result<f64> {
    check_rho(rho)?;
    if epsilon <= 0.0 {
        return Err(invalid("epsilon must be positive"));
    }
    let geo = ClassGeometry::new(class, pool)?;
    let pairs = geo.all_pairs();
    geo.splitting_tau(pool, &pairs, rho, epsilon)
}

/// Pool fraction of points that rho-average split `class`.
pub fn brute_average_splitting_tau(class: &FiniteClass, pool: &Pool, rho: f64) -> Result<f64> {
    check_rho(rho)?;
    ClassGeometry::new(class, pool)?.average_splitting_tau(pool, rho)
}

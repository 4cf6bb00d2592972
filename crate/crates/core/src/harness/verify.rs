//! Acceptance criteria, each checked against exact oracles or closed forms.
//!
//! Every criterion returns a [`CriterionReport`] with what was measured,
//! the bound it was held to and the wall-clock time it took.

use std::collections::BTreeSet;
use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bits::BitSet;
use crate::error::Result;
use crate::estimator::{EdgeSample, SplitStats};
use crate::finite::FiniteClass;
use crate::hypothesis::{Hypothesis, Label, LabeledExample, Point};
use crate::learner::{
    split_implication_diagnostics, run_dbal, termination_check, dbal_round_bound, CandidateSource,
    DbalConfig, LearnerState, RunStatus,
};
use crate::oracle::{log2_ceil_inv, ClassGeometry};
use crate::pool::{DataDistribution, Pool};
use crate::samplers::{PriorSampler, SamplerConfig};
use crate::select::{select, select_edge_bound, SelectConfig};
use crate::stats::{chi_square_p_value, mean_std, median};

use super::config::{Algorithm, ClassSpec, ExperimentConfig};
use super::experiment::{labels_to_threshold_by_trial, run_experiment};

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionReport {
    pub name: &'static str,
    pub passed: bool,
    pub measured: String,
    pub bound: String,
    pub elapsed: Duration,
}

impl fmt::Display for CriterionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "[{}] {}: {} | required: {} | {:.1}s",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.measured,
            self.bound,
            self.elapsed.as_secs_f64()
        )
    }
}

fn report(name: &'static str, start: Instant, passed: bool, measured: String, bound: String) -> CriterionReport {
    CriterionReport {
        name,
        passed,
        measured,
        bound,
        elapsed: start.elapsed(),
    }
}

fn failed(name: &'static str, start: Instant, err: crate::Error) -> CriterionReport {
    report(name, start, false, format!("error: {err}"), "no error".into())
}

/// Distinct random label tables over `{0, .., domain-1}`.
pub fn random_tables<R: Rng + ?Sized>(rng: &mut R, count: usize, domain: usize, flip: f64) -> Vec<BitSet> {
    let base: Vec<bool> = (0..domain).map(|_| rng.random_bool(0.5)).collect();
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let row: Vec<bool> = base.iter().map(|&b| b ^ rng.random_bool(flip)).collect();
        if seen.insert(row.clone()) {
            out.push(BitSet::from_bools(row));
        }
    }
    out
}

fn random_weights<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(0.05..1.0f64).powi(2)).collect()
}

fn sphere_pool(seed: u64, dim: usize, n: usize) -> Result<Pool> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DataDistribution::UniformSphere { dim }.sample_pool(&mut rng, n)
}

fn members(labels: &[bool], side: bool) -> Vec<bool> {
    labels.iter().map(|&l| l == side).collect()
}

// ---------------------------------------------------------------------------

pub const COORDINATE: &str = "coordinate_vectors_exact";

/// `V = {e_1, .., e_4}` with a uniform prior: `Phi(V) = 3/8`, and every
/// point leaves a side with at least `(n-2)/(n-1)` of the average diameter.
pub fn coordinate_exactness(pool_size: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let n = 4usize;
        let class = FiniteClass::coordinate_vectors(n)?;
        let pool = sphere_pool(seed, n, pool_size)?;
        let geo = ClassGeometry::new(&class, &pool)?;
        let phi = geo.phi();
        let exact = (n as f64 - 1.0) / (2.0 * n as f64);
        let factor = (n as f64 - 2.0) / (n as f64 - 1.0);
        let mut worst_gap = f64::INFINITY;
        let mut failures = 0usize;
        for x in pool.points() {
            let labels = geo.labels_at(x)?;
            let side = geo
                .phi_of(&members(&labels, true))
                .max(geo.phi_of(&members(&labels, false)));
            let gap = side - factor * phi;
            worst_gap = worst_gap.min(gap);
            if gap < -0.01 {
                failures += 1;
            }
        }
        let phi_ok = (phi - exact).abs() <= 0.01;
        Ok(report(
            COORDINATE,
            start,
            phi_ok && failures == 0,
            format!(
                "Phi = {phi:.4} (closed form {exact}), diam = {:.4}, min over {} points of max side Phi - {factor:.4} Phi = {worst_gap:.4}, {failures} violations",
                geo.diam(),
                pool.len()
            ),
            "|Phi - 0.375| <= 0.01 and every gap >= -0.01".into(),
        ))
    };
    run().unwrap_or_else(|e| failed(COORDINATE, start, e))
}

// ---------------------------------------------------------------------------

pub const PSI: &str = "psi_unbiasedness";

pub type SplitStatistic = fn(&EdgeSample, &Point) -> SplitStats;

pub fn honest_split_stats(e: &EdgeSample, x: &Point) -> SplitStats {
    e.split_stats(x).expect("candidate matches the class")
}

/// On `classes` random 5-member classes, the means of `psi/n`, `psi+/n` and
/// `psi-/n` over `reps` samples of `n` edges sit within `3 sd / sqrt(reps)`
/// of the exact average diameter and side potentials.
pub fn psi_unbiasedness(classes: usize, reps: usize, n: usize, seed: u64, stat: SplitStatistic) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = 10;
        let pool = Pool::domain(domain)?;
        let mut checks = 0usize;
        let mut misses = Vec::new();
        let mut worst = 0.0f64;
        for c in 0..classes {
            let flip = rng.random_range(0.15..0.5);
            let tables = random_tables(&mut rng, 5, domain, flip);
            let class = FiniteClass::from_tables(tables, Some(random_weights(&mut rng, 5)))?;
            let geo = ClassGeometry::new(&class, &pool)?;
            let x = Point::Index(rng.random_range(0..domain));
            let exact = geo.split_at(&x)?;
            let mut sampler = PriorSampler::finite(class, SamplerConfig::with_seed(rng.random()))?;
            let (mut phi, mut plus, mut minus) = (Vec::new(), Vec::new(), Vec::new());
            for _ in 0..reps {
                let e = sampler.sample_edges(n, &pool)?;
                let s = stat(&e, &x);
                phi.push(s.psi_total / n as f64);
                plus.push(s.psi_plus / n as f64);
                minus.push(s.psi_minus / n as f64);
            }
            for (what, xs, want) in [
                ("Phi", &phi, geo.phi()),
                ("pot+", &plus, exact.potential_plus),
                ("pot-", &minus, exact.potential_minus),
            ] {
                let (m, sd) = mean_std(xs);
                let band = 3.0 * sd / (reps as f64).sqrt();
                checks += 1;
                let z = if band > 0.0 { (m - want).abs() / band } else if (m - want).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
                worst = worst.max(z);
                if (m - want).abs() > band + 1e-12 {
                    misses.push(format!("class {c} {what}: mean {m:.5} vs exact {want:.5}"));
                }
            }
        }
        Ok(report(
            PSI,
            start,
            misses.is_empty(),
            format!(
                "{checks} checks on {classes} classes, {reps} x {n} edges each, largest |mean - exact| / band = {worst:.3}{}",
                if misses.is_empty() { String::new() } else { format!("; misses: {}", misses.join("; ")) }
            ),
            "every |mean - exact| <= 3 sd / sqrt(reps)".into(),
        ))
    };
    run().unwrap_or_else(|e| failed(PSI, start, e))
}

// ---------------------------------------------------------------------------

pub const SPLIT_IMPLICATIONS: &str = "split_implications";

/// Random 6-member classes clustered around a target; both implications
/// are checked exactly on each instance.
pub fn split_implications(instances: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = 10;
        let pool = Pool::domain(domain)?;
        let (mut prem_a, mut prem_b, mut viol_a, mut viol_b) = (0, 0, 0, 0);
        for _ in 0..instances {
            let flip = rng.random_range(0.02..0.4);
            let tables = random_tables(&mut rng, 6, domain, flip);
            let mut weights = random_weights(&mut rng, 6);
            let star = rng.random_range(0..6);
            weights[star] *= rng.random_range(1.0..20.0);
            let class = FiniteClass::from_tables(tables, Some(weights))?;
            let eps = rng.random_range(0.01..0.6);
            let p_map = class.weights().iter().copied().fold(0.0, f64::max);
            let alpha = rng.random_range(0.0..p_map);
            let r = split_implication_diagnostics(&class, &pool, class.get(star), eps, alpha)?;
            prem_a += r.premise_a as usize;
            prem_b += r.premise_b as usize;
            viol_a += !r.holds_a as usize;
            viol_b += !r.holds_b as usize;
        }
        Ok(report(
            SPLIT_IMPLICATIONS,
            start,
            viol_a == 0 && viol_b == 0,
            format!(
                "{instances} instances; part (a) premise held {prem_a} times, {viol_a} violations; part (b) premise held {prem_b} times, {viol_b} violations"
            ),
            "zero violations".into(),
        ))
    };
    run().unwrap_or_else(|e| failed(SPLIT_IMPLICATIONS, start, e))
}

// ---------------------------------------------------------------------------

pub const AVERAGE_SPLIT: &str = "splitting_to_average_splitting";

/// Version spaces reachable from `class` by labeling domain points, as
/// member index lists with at least two members.
fn reachable_version_spaces(geo: &ClassGeometry, pool: &Pool) -> Result<Vec<Vec<usize>>> {
    let n = geo.len();
    let labels: Vec<Vec<bool>> = pool.points().iter().map(|x| geo.labels_at(x)).collect::<Result<_>>()?;
    let mut seen: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut frontier = vec![(0..n).collect::<Vec<usize>>()];
    while let Some(v) = frontier.pop() {
        if v.len() < 2 || !seen.insert(v.clone()) {
            continue;
        }
        for l in &labels {
            for side in [true, false] {
                let next: Vec<usize> = v.iter().copied().filter(|&i| l[i] == side).collect();
                if next.len() >= 2 && next.len() < v.len() {
                    frontier.push(next);
                }
            }
        }
    }
    Ok(seen.into_iter().collect())
}

/// For uniform-prior classes on a 40-point domain: measure the splitting
/// level `tau` at `(rho, eps)` as the minimum over a family of edge sets,
/// then require every tested version space with `Phi > 2 eps` to be
/// `rho / (4 ceil(log2(1/eps)))`-average split with probability `>= tau`.
///
/// The edge family holds all pairs of the class, all pairs and every
/// length bucket `[2^{k-1} eps, 2^k eps)` of each tested version space, and
/// random subsets of pairs.
pub fn average_split_direction(classes: usize, epsilon: f64, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let domain = 40;
        let pool = Pool::domain(domain)?;
        let k = log2_ceil_inv(epsilon);
        let rhos = [0.1, 0.25, 0.5];
        let (mut checks, mut live, mut counter) = (0usize, 0usize, Vec::new());
        let mut min_slack = f64::INFINITY;
        for c in 0..classes {
            let size = rng.random_range(5..=9);
            let flip = rng.random_range(0.05..0.5);
            let class = FiniteClass::from_tables(random_tables(&mut rng, size, domain, flip), None)?;
            let geo = ClassGeometry::new(&class, &pool)?;
            let mut spaces = reachable_version_spaces(&geo, &pool)?;
            if spaces.len() > 12 {
                // Keep the full class plus a random sample of the rest.
                let full = spaces.iter().position(|v| v.len() == size).expect("full class reachable");
                let keep = spaces.swap_remove(full);
                let idx = rand::seq::index::sample(&mut rng, spaces.len(), 11);
                let mut picked: Vec<Vec<usize>> = idx.iter().map(|i| spaces[i].clone()).collect();
                picked.push(keep);
                spaces = picked;
            }
            let geos: Vec<ClassGeometry> = spaces
                .iter()
                .map(|v| ClassGeometry::new(&class.subset(v)?, &pool))
                .collect::<Result<_>>()?;
            for &rho in &rhos {
                let mut tau = geo.splitting_tau(&pool, &geo.all_pairs(), rho, epsilon)?;
                for g in &geos {
                    let pairs = g.all_pairs();
                    tau = tau.min(g.splitting_tau(&pool, &pairs, rho, epsilon)?);
                    for bucket in g.length_buckets(&pairs, epsilon) {
                        if !bucket.is_empty() {
                            tau = tau.min(g.splitting_tau(&pool, &bucket, rho, epsilon)?);
                        }
                    }
                }
                let all = geo.all_pairs();
                for _ in 0..20 {
                    let sub: Vec<_> = all.iter().copied().filter(|_| rng.random_bool(0.5)).collect();
                    if !sub.is_empty() {
                        tau = tau.min(geo.splitting_tau(&pool, &sub, rho, epsilon)?);
                    }
                }
                let rho_avg = rho / (4.0 * k as f64);
                for (v, g) in spaces.iter().zip(&geos) {
                    if g.phi() <= 2.0 * epsilon {
                        continue;
                    }
                    checks += 1;
                    live += (tau > 0.0) as usize;
                    let tau_avg = g.average_splitting_tau(&pool, rho_avg)?;
                    min_slack = min_slack.min(tau_avg - tau);
                    if tau_avg < tau {
                        counter.push(format!(
                            "class {c}, |V| = {}, rho {rho}: tau' {tau_avg:.3} < tau {tau:.3}",
                            v.len()
                        ));
                    }
                }
            }
        }
        Ok(report(
            AVERAGE_SPLIT,
            start,
            counter.is_empty(),
            format!(
                "{checks} (class, version space, rho) checks with Phi > 2 eps, {live} with tau > 0, min tau' - tau = {min_slack:.3}, {} counterexamples{}",
                counter.len(),
                if counter.is_empty() { String::new() } else { format!(": {}", counter.join("; ")) }
            ),
            format!("eps = {epsilon}, K = {k}; tau' at rho/(4K) >= tau everywhere"),
        ))
    };
    run().unwrap_or_else(|e| failed(AVERAGE_SPLIT, start, e))
}

// ---------------------------------------------------------------------------

/// A finite class, the pool its distances are measured on and the
/// candidate points offered to query selection.
#[derive(Clone, Debug)]
pub struct Fixture {
    pub name: String,
    pub class: FiniteClass,
    pub pool: Pool,
    pub candidates: Vec<Point>,
}

impl Fixture {
    /// Largest `rho` achieved by any candidate on the full class.
    pub fn best_rho(&self) -> Result<f64> {
        let geo = ClassGeometry::new(&self.class, &self.pool)?;
        let mut best = 0.0f64;
        for x in &self.candidates {
            best = best.max(geo.average_split_ratio(x)?);
        }
        Ok(best)
    }
}

/// The four coordinate separators, tabulated on a sphere pool.
pub fn coordinate_fixture(pool_size: usize, candidates: usize, seed: u64) -> Result<Fixture> {
    let pool = sphere_pool(seed, 4, pool_size)?;
    let class = FiniteClass::coordinate_vectors(4)?.tabulate(&pool)?;
    Ok(Fixture {
        name: "coordinate:4".into(),
        class,
        pool: Pool::domain(pool_size)?,
        candidates: (0..candidates.min(pool_size)).map(Point::Index).collect(),
    })
}

/// Two tables at distance 0.6 on five points.
pub fn two_point_fixture() -> Result<Fixture> {
    let t = |s: &str| BitSet::from_bools(s.chars().map(|c| c == '+'));
    Ok(Fixture {
        name: "two-hypothesis".into(),
        class: FiniteClass::from_tables(vec![t("+++--"), t("-+-+-")], None)?,
        pool: Pool::domain(5)?,
        candidates: (0..5).map(Point::Index).collect(),
    })
}

/// Random weighted 6-member table class on 12 points, offered a random
/// handful of candidates whose best `rho` lies in `[lo, hi]`.
pub fn random_fixture(seed: u64, lo: f64, hi: f64) -> Result<Fixture> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let flip = rng.random_range(0.2..0.5);
        let tables = random_tables(&mut rng, 6, 12, flip);
        let count = rng.random_range(2..=6);
        let f = Fixture {
            name: format!("random:{seed}"),
            class: FiniteClass::from_tables(tables, Some(random_weights(&mut rng, 6)))?,
            pool: Pool::domain(12)?,
            candidates: rand::seq::index::sample(&mut rng, 12, count).iter().map(Point::Index).collect(),
        };
        let rho = f.best_rho()?;
        if (lo..=hi).contains(&rho) {
            return Ok(f);
        }
    }
}

pub const SELECT: &str = "select_theory_mode";

#[derive(Clone, Debug, Default)]
pub struct SelectTally {
    pub runs: usize,
    pub splitting: usize,
    pub within_rounds: usize,
    pub within_budget: usize,
    pub estimate_rounds: usize,
    pub estimate_ok: usize,
}

/// Theory-mode selection on `fixture` over `runs` seeds.
pub fn select_tally(fixture: &Fixture, runs: usize, delta0: f64, seed: u64) -> Result<(SelectTally, f64, f64)> {
    let geo = ClassGeometry::new(&fixture.class, &fixture.pool)?;
    let phi = geo.phi();
    let rho = fixture.best_rho()?;
    let eps = (phi / 2.0).min(0.2);
    let cfg = SelectConfig::theory(eps, delta0);
    let max_rounds = (1.0 / rho).log2().ceil() as usize + 1;
    let budget = select_edge_bound(eps, rho, phi, delta0);
    let mut t = SelectTally::default();
    for r in 0..runs {
        let mut sampler = PriorSampler::finite(fixture.class.clone(), SamplerConfig::with_seed(seed.wrapping_add(r as u64)))?;
        t.runs += 1;
        let out = match select(&mut sampler, &fixture.candidates, &fixture.pool, &cfg) {
            Ok(o) => o,
            Err(crate::Error::SelectExhausted { .. }) => continue,
            Err(e) => return Err(e),
        };
        assert_eq!(sampler.hypotheses_drawn(), out.hypotheses_drawn());
        if geo.average_splits(&fixture.candidates[out.index], rho / 8.0)? {
            t.splitting += 1;
        }
        t.within_rounds += (out.rounds() <= max_rounds) as usize;
        t.within_budget += (out.edges_drawn as f64 <= budget) as usize;
        for round in &out.trace {
            t.estimate_rounds += 1;
            t.estimate_ok += (round.phi_hat >= (1.0 - round.rho_hat / 4.0) * phi) as usize;
        }
    }
    Ok((t, rho, budget))
}

/// On each fixture, theory-mode selection returns a `rho/8`-average
/// splitting point and halts within `ceil(log2(1/rho)) + 1` rounds in at
/// least 95 of 100 runs. Also reports the summed sample bound and the
/// lower confidence side of the diameter estimate.
pub fn select_correctness(fixtures: &[Fixture], runs: usize, delta0: f64, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let need = (runs * 95).div_ceil(100);
        let mut pass = true;
        let mut parts = Vec::new();
        for f in fixtures {
            let (t, rho, budget) = select_tally(f, runs, delta0, seed)?;
            let est_rate = t.estimate_ok as f64 / t.estimate_rounds.max(1) as f64;
            let ok = t.splitting >= need
                && t.within_rounds >= need
                && t.within_budget == t.runs
                && est_rate >= 1.0 - delta0;
            pass &= ok;
            parts.push(format!(
                "{} (rho {rho:.3}): split {}/{}, rounds {}/{}, samples within {budget:.0} edges {}/{}, estimate lower band {:.3}",
                f.name, t.splitting, t.runs, t.within_rounds, t.runs, t.within_budget, t.runs, est_rate
            ));
        }
        Ok(report(
            SELECT,
            start,
            pass,
            parts.join("; "),
            format!("split and rounds >= {need}/{runs}; all within the summed sample bound; estimate band >= {}", 1.0 - delta0),
        ))
    };
    run().unwrap_or_else(|e| failed(SELECT, start, e))
}

// ---------------------------------------------------------------------------

pub const TERMINATION: &str = "termination_rates";

/// `n = ceil(48/eps * ln 20)` edges make both error rates at most 5%.
pub fn termination_sample_size(epsilon: f64) -> usize {
    (48.0 / epsilon * 20f64.ln()).ceil() as usize
}

/// Two-member classes with average diameter exactly `eps` and `eps/2`.
pub fn termination_rates(trials: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let eps = 0.1;
        let n = termination_sample_size(eps);
        let t = |s: &str| BitSet::from_bools(s.chars().map(|c| c == '+'));
        // Uniform pair at distance d has Phi = d/2.
        let at_eps = FiniteClass::from_tables(vec![t("++++++++++"), t("--++++++++")], None)?;
        let at_half = FiniteClass::from_tables(vec![t("++++++++++"), t("-+++++++++")], None)?;
        let pool = Pool::domain(10)?;
        let phis = [
            ClassGeometry::new(&at_eps, &pool)?.phi(),
            ClassGeometry::new(&at_half, &pool)?.phi(),
        ];
        let mut stops = [0usize; 2];
        for (i, class) in [at_eps, at_half].into_iter().enumerate() {
            let mut s = PriorSampler::finite(class, SamplerConfig::with_seed(seed ^ i as u64))?;
            for _ in 0..trials {
                stops[i] += termination_check(&mut s, &pool, eps, n)?.terminate as usize;
            }
        }
        let false_stop = stops[0] as f64 / trials as f64;
        let missed = 1.0 - stops[1] as f64 / trials as f64;
        let exact_ok = (phis[0] - eps).abs() < 1e-12 && (phis[1] - eps / 2.0).abs() < 1e-12;
        Ok(report(
            TERMINATION,
            start,
            exact_ok && false_stop <= 0.05 && missed <= 0.05,
            format!(
                "n = {n}; false stops at Phi = {:.3}: {false_stop:.3} (bound exp(-eps n/32) = {:.4}); missed stops at Phi = {:.3}: {missed:.3} (bound exp(-eps n/48) = {:.4})",
                phis[0],
                (-eps * n as f64 / 32.0).exp(),
                phis[1],
                (-eps * n as f64 / 48.0).exp()
            ),
            "both rates <= 0.05".into(),
        ))
    };
    run().unwrap_or_else(|e| failed(TERMINATION, start, e))
}

// ---------------------------------------------------------------------------

pub const ROUND_BOUND: &str = "dbal_round_bound";

/// Smallest best-candidate `rho` over version spaces reachable from the
/// full class whose average diameter exceeds `phi_min`.
pub fn reachable_rho(fixture: &Fixture, phi_min: f64) -> Result<f64> {
    let geo = ClassGeometry::new(&fixture.class, &fixture.pool)?;
    let mut rho = 1.0f64;
    for v in reachable_version_spaces(&geo, &fixture.pool)? {
        let sub = ClassGeometry::new(&fixture.class.subset(&v)?, &fixture.pool)?;
        if sub.phi() <= phi_min {
            continue;
        }
        let mut best = 0.0f64;
        for x in &fixture.candidates {
            best = best.max(sub.average_split_ratio(x)?);
        }
        rho = rho.min(best);
    }
    Ok(rho)
}

/// Labels spent by the full loop stay below `(8/rho)(log2(2/eps) +
/// 2 log2(1/pi(h*)))` in at least 95% of seeds.
pub fn round_bound_check(fixtures: &[Fixture], seeds: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let eps = 0.1;
        let delta = 0.05;
        let need = (seeds * 95).div_ceil(100);
        let mut pass = true;
        let mut parts = Vec::new();
        for f in fixtures {
            let rho = reachable_rho(f, eps / 2.0)?;
            let mut ok = 0usize;
            let mut worst = 0u64;
            let mut bound_min = f64::INFINITY;
            for s in 0..seeds {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(s as u64));
                let target = rng.random_range(0..f.class.len());
                let k = dbal_round_bound(rho, eps, f.class.weights()[target]);
                bound_min = bound_min.min(k);
                let sampler = PriorSampler::finite(f.class.clone(), SamplerConfig::with_seed(rng.random()))?;
                let mut st = LearnerState::new(
                    sampler,
                    f.class.get(target).clone(),
                    CandidateSource::Distribution(DataDistribution::UniformDomain { size: f.pool.len() }),
                    rng.random(),
                );
                let cfg = DbalConfig::new(eps, delta, f.candidates.len().min(50));
                let out = run_dbal(&mut st, &f.pool, &cfg, &SelectConfig::new(eps, delta))?;
                worst = worst.max(st.labels());
                if out.status == RunStatus::Done && (st.labels() as f64) <= k {
                    ok += 1;
                }
            }
            pass &= ok >= need;
            parts.push(format!(
                "{} (rho {rho:.3}, K >= {bound_min:.1}): {ok}/{seeds} within K, most labels {worst}",
                f.name
            ));
        }
        Ok(report(ROUND_BOUND, start, pass, parts.join("; "), format!(">= {need}/{seeds} seeds finish within K")))
    };
    run().unwrap_or_else(|e| failed(ROUND_BOUND, start, e))
}

// ---------------------------------------------------------------------------

pub const END_TO_END: &str = "end_to_end_ordering";

/// Desk-scale settings for the label-efficiency comparison.
pub fn end_to_end_config(class: ClassSpec, seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        class,
        algorithms: vec![Algorithm::Dbal, Algorithm::Qbc, Algorithm::Passive],
        epsilon: 0.15,
        delta: 0.05,
        trials: 20,
        seed,
        pool_size: 1000,
        rounds: 150,
        candidates: 100,
        cap_m: 300,
        cap_n: 300,
        n_term: Some(1000),
        meter_edges: 500,
        max_unlabeled: 200_000,
        ..ExperimentConfig::default()
    }
}

/// For each configuration: median labels until the reported average
/// diameter reaches `threshold` satisfies `dbal <= qbc <= passive` and
/// `dbal < passive`.
pub fn end_to_end_ordering(configs: &[ExperimentConfig], threshold: f64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let mut pass = true;
        let mut parts = Vec::new();
        for cfg in configs {
            let rows = run_experiment(cfg)?;
            let med = |a| median(&labels_to_threshold_by_trial(&rows, a, threshold)).unwrap_or(f64::INFINITY);
            let (d, q, p) = (med(Algorithm::Dbal), med(Algorithm::Qbc), med(Algorithm::Passive));
            let ok = d <= q && q <= p && d < p;
            pass &= ok;
            parts.push(format!("{}: median labels dbal {d}, qbc {q}, passive {p}", cfg.class));
        }
        Ok(report(
            END_TO_END,
            start,
            pass,
            parts.join("; "),
            format!("dbal <= qbc <= passive and dbal < passive at Phi_hat <= {threshold}"),
        ))
    };
    run().unwrap_or_else(|e| failed(END_TO_END, start, e))
}

// ---------------------------------------------------------------------------

pub const SAMPLER: &str = "sampler_exactness";

/// Rejection-sampled disjunctions versus the enumerated version space, and
/// hit-and-run angles versus the uniform law on a feasible arc.
pub fn sampler_exactness(draws: usize, seed: u64) -> CriterionReport {
    let start = Instant::now();
    let run = || -> Result<CriterionReport> {
        let (d, k) = (10, 2);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let target = Hypothesis::disjunction(d, [1, 6])?;
        let cfg = SamplerConfig {
            enumeration_limit: 0,
            ..SamplerConfig::with_seed(seed)
        };
        let mut s = PriorSampler::disjunction(d, k, cfg)?;
        let dist = DataDistribution::Bernoulli { dim: d, p: 0.3 };
        for _ in 0..4 {
            let x = dist.sample(&mut rng);
            let y = target.label(&x);
            s.add_constraint(LabeledExample::new(x, y))?;
        }
        let consistent: Vec<Vec<usize>> = itertools::Itertools::combinations(0..d, k)
            .filter(|lits| s.constraints().admits(&Hypothesis::disjunction(d, lits.iter().copied()).unwrap()))
            .collect();
        let mut counts = vec![0.0; consistent.len()];
        for _ in 0..draws {
            let h = s.sample_hypothesis()?;
            let Hypothesis::Disjunction(h) = h else { unreachable!("disjunction sampler") };
            let lits = h.literals().to_vec();
            let i = consistent.iter().position(|c| *c == lits).expect("drawn subset is consistent");
            counts[i] += 1.0;
        }
        let expected = vec![draws as f64 / consistent.len() as f64; consistent.len()];
        let p_disj = chi_square_p_value(&counts, &expected);

        let mut arc = PriorSampler::hit_and_run(2, SamplerConfig::with_seed(seed ^ 1))?;
        arc.add_constraint(LabeledExample::new(Point::real(vec![1.0, 0.0]), Label::Pos))?;
        arc.add_constraint(LabeledExample::new(Point::real(vec![-0.5, 3f64.sqrt() / 2.0]), Label::Pos))?;
        // Feasible angles: [pi/6, pi/2].
        let (lo, hi) = (std::f64::consts::PI / 6.0, std::f64::consts::FRAC_PI_2);
        let bins = 10;
        let mut hist = vec![0.0; bins];
        let arc_draws = draws.min(20_000);
        for _ in 0..arc_draws {
            let h = arc.sample_hypothesis()?;
            let Hypothesis::Linear(h) = h else { unreachable!("sphere sampler") };
            let w = h.weights();
            let a = w[1].atan2(w[0]);
            let b = (((a - lo) / (hi - lo)) * bins as f64).floor().clamp(0.0, bins as f64 - 1.0) as usize;
            hist[b] += 1.0;
        }
        let p_arc = chi_square_p_value(&hist, &vec![arc_draws as f64 / bins as f64; bins]);
        Ok(report(
            SAMPLER,
            start,
            p_disj > 0.01 && p_arc > 0.01,
            format!(
                "disjunctions d={d} k={k}: {} consistent subsets, {draws} draws, p = {p_disj:.3}; 2-D arc: {arc_draws} draws, p = {p_arc:.3}",
                consistent.len()
            ),
            "both p > 0.01".into(),
        ))
    };
    run().unwrap_or_else(|e| failed(SAMPLER, start, e))
}

// ---------------------------------------------------------------------------

pub const SUITE_SEED: u64 = 20_240_601;
/// The unbiasedness criterion runs 60 separate 3-sigma comparisons and has
/// its own stream.
pub const PSI_SEED: u64 = SUITE_SEED + 17;

pub fn select_fixtures() -> Result<Vec<Fixture>> {
    Ok(vec![
        two_point_fixture()?,
        coordinate_fixture(500, 60, SUITE_SEED)?,
        random_fixture(SUITE_SEED + 1, 0.5, 1.0)?,
        random_fixture(SUITE_SEED + 2, 0.25, 0.5)?,
        random_fixture(SUITE_SEED + 3, 0.12, 0.25)?,
    ])
}

pub fn round_bound_fixtures() -> Result<Vec<Fixture>> {
    Ok(vec![two_point_fixture()?, coordinate_fixture(500, 60, SUITE_SEED)?])
}

/// Runs every criterion whose name passes `filter`, in a fixed order.
pub fn run_verification_suite(filter: impl Fn(&str) -> bool) -> Vec<CriterionReport> {
    let mut out = Vec::new();
    let mut go = |name: &'static str, f: &dyn Fn() -> CriterionReport| {
        if filter(name) {
            out.push(f());
        }
    };
    go(COORDINATE, &|| coordinate_exactness(100_000, SUITE_SEED));
    go(PSI, &|| psi_unbiasedness(20, 200, 10_000, PSI_SEED, honest_split_stats));
    go(SPLIT_IMPLICATIONS, &|| split_implications(1000, SUITE_SEED));
    go(AVERAGE_SPLIT, &|| average_split_direction(50, 0.13, SUITE_SEED));
    go(SELECT, &|| match select_fixtures() {
        Ok(f) => select_correctness(&f, 100, 0.05, SUITE_SEED),
        Err(e) => failed(SELECT, Instant::now(), e),
    });
    go(TERMINATION, &|| termination_rates(1000, SUITE_SEED));
    go(ROUND_BOUND, &|| match round_bound_fixtures() {
        Ok(f) => round_bound_check(&f, 100, SUITE_SEED),
        Err(e) => failed(ROUND_BOUND, Instant::now(), e),
    });
    go(SAMPLER, &|| sampler_exactness(50_000, SUITE_SEED));
    go(END_TO_END, &|| {
        end_to_end_ordering(
            &[
                end_to_end_config(ClassSpec::Linear { dim: 10 }, SUITE_SEED),
                end_to_end_config(ClassSpec::Disjunction { dim: 75, k: 4, p: 0.25 }, SUITE_SEED),
            ],
            0.15,
        )
    });
    out
}

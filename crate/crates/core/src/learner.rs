//! The outer active-learning loop.
//!
//! Each round first draws `n_term` edges from the current version space and
//! stops once `psi / n_term < 3 eps / 4`. Otherwise it draws `m` fresh
//! unlabeled points, asks [`select`] for one of them, queries the target on
//! it and adds the labeled point to the version space.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::finite::FiniteClass;
use crate::hypothesis::{Hypothesis, Label, LabeledExample, Point};
use crate::oracle::ClassGeometry;
use crate::pool::{DataDistribution, Pool};
use crate::samplers::PriorSampler;
use crate::select::{select, SelectConfig, SelectRoundTrace};

/// Fallback round estimate when no bound can be computed.
pub const DEFAULT_ROUND_ESTIMATE: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DbalConfig {
    pub epsilon: f64,
    pub delta: f64,
    /// Unlabeled points drawn per round.
    pub m: usize,
    /// Edges drawn by each termination check.
    pub n_term: usize,
    pub max_rounds: usize,
}

impl DbalConfig {
    /// `max_rounds = 10 * 500` and `n_term` sized from it.
    pub fn new(epsilon: f64, delta: f64, m: usize) -> Self {
        Self::with_round_estimate(epsilon, delta, m, DEFAULT_ROUND_ESTIMATE)
    }

    /// `max_rounds = 10 * k` and `n_term = ceil(48/eps * ln(4 max_rounds / delta))`.
    pub fn with_round_estimate(epsilon: f64, delta: f64, m: usize, k: usize) -> Self {
        let max_rounds = 10 * k.max(1);
        Self {
            epsilon,
            delta,
            m,
            n_term: default_n_term(epsilon, delta, max_rounds),
            max_rounds,
        }
    }

    pub fn validate(&self) -> Result<()> {
        // Thresholds at or above 1 are allowed: they stop immediately.
        if !(self.epsilon > 0.0 && self.epsilon.is_finite()) {
            return Err(Error::Config(format!("epsilon must be positive, got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if self.m == 0 || self.n_term == 0 {
            return Err(Error::Config("m and n_term must be positive".into()));
        }
        Ok(())
    }
}

pub fn default_n_term(epsilon: f64, delta: f64, rounds: usize) -> usize {
    ((48.0 / epsilon) * (4.0 * rounds as f64 / delta).ln()).ceil().max(1.0) as usize
}

/// `(8/rho) (log2(2/eps) + 2 log2(1/pi(h*)))`.
pub fn dbal_round_bound(rho: f64, epsilon: f64, prior_of_target: f64) -> f64 {
    (8.0 / rho) * ((2.0 / epsilon).log2() + 2.0 * (1.0 / prior_of_target).log2())
}

/// Where each round's unlabeled points come from.
#[derive(Clone, Debug, PartialEq)]
pub enum CandidateSource {
    /// `m` fresh i.i.d. draws per round.
    Distribution(DataDistribution),
    /// The same list every round.
    Fixed(Vec<Point>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunStatus {
    /// Still running.
    Ok,
    /// Stopping rule fired.
    Done,
    /// Round or point budget used up.
    Budget,
    /// The sampler could not produce a consistent hypothesis.
    Starved,
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Done => "done",
            RunStatus::Budget => "budget",
            RunStatus::Starved => "starved",
        }
    }
}

/// A labeling run in progress: the version-space sampler, the target that
/// answers queries and the unlabeled stream.
#[derive(Clone, Debug)]
pub struct LearnerState {
    pub sampler: PriorSampler,
    target: Hypothesis,
    source: CandidateSource,
    rng: ChaCha8Rng,
    labels: u64,
    unlabeled: u64,
}

impl LearnerState {
    pub fn new(
        sampler: PriorSampler,
        target: Hypothesis,
        source: CandidateSource,
        point_seed: u64,
    ) -> Self {
        Self {
            sampler,
            target,
            source,
            rng: ChaCha8Rng::seed_from_u64(point_seed),
            labels: 0,
            unlabeled: 0,
        }
    }

    pub fn target(&self) -> &Hypothesis {
        &self.target
    }

    pub fn set_source(&mut self, source: CandidateSource) {
        self.source = source;
    }

    pub fn labels(&self) -> u64 {
        self.labels
    }

    pub fn unlabeled(&self) -> u64 {
        self.unlabeled
    }

    /// Up to `m` unlabeled points; a fixed source yields its whole list.
    pub fn draw_points(&mut self, m: usize) -> Vec<Point> {
        let pts = match &self.source {
            CandidateSource::Distribution(d) => d.sample_n(&mut self.rng, m),
            CandidateSource::Fixed(list) => list.clone(),
        };
        self.unlabeled += pts.len() as u64;
        pts
    }

    pub fn draw_point(&mut self) -> Point {
        let p = match &self.source {
            CandidateSource::Distribution(d) => d.sample(&mut self.rng),
            CandidateSource::Fixed(list) => {
                use rand::Rng;
                list[self.rng.random_range(0..list.len())].clone()
            }
        };
        self.unlabeled += 1;
        p
    }

    /// Asks the target for the label of `x` and shrinks the version space.
    pub fn query(&mut self, x: Point) -> Result<Label> {
        let y = self.target.predict(&x)?;
        self.sampler.add_constraint(LabeledExample::new(x, y))?;
        self.labels += 1;
        Ok(y)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TerminationCheck {
    pub phi_hat: f64,
    pub terminate: bool,
}

/// Fresh `n`-edge estimate; terminate iff `psi / n < 3 eps / 4`.
pub fn termination_check(
    sampler: &mut PriorSampler,
    pool: &Pool,
    epsilon: f64,
    n: usize,
) -> Result<TerminationCheck> {
    let phi_hat = sampler.sample_edges(n, pool)?.mean_distance();
    Ok(TerminationCheck {
        phi_hat,
        terminate: phi_hat < 0.75 * epsilon,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QueryEntry {
    pub round: usize,
    pub point: Point,
    pub label: Label,
    pub phi_estimate_before: f64,
    pub trace: Vec<SelectRoundTrace>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct QueryLog {
    pub entries: Vec<QueryEntry>,
}

impl QueryLog {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("log serializes")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RoundResult {
    Terminated { phi_hat: f64 },
    Queried(QueryEntry),
    /// SELECT found nothing to ask this round.
    Skipped { phi_hat: f64, reason: String },
}

/// One iteration of the loop.
pub fn dbal_round(
    state: &mut LearnerState,
    pool: &Pool,
    round: usize,
    cfg: &DbalConfig,
    scfg: &SelectConfig,
) -> Result<RoundResult> {
    let check = termination_check(&mut state.sampler, pool, cfg.epsilon, cfg.n_term)?;
    if check.terminate {
        return Ok(RoundResult::Terminated {
            phi_hat: check.phi_hat,
        });
    }
    let candidates = state.draw_points(cfg.m);
    match select(&mut state.sampler, &candidates, pool, scfg) {
        Ok(out) => {
            let x = candidates[out.index].clone();
            let label = state.query(x.clone())?;
            Ok(RoundResult::Queried(QueryEntry {
                round,
                point: x,
                label,
                phi_estimate_before: check.phi_hat,
                trace: out.trace,
            }))
        }
        Err(e @ (Error::SelectExhausted { .. } | Error::DegenerateVersionSpace)) => {
            Ok(RoundResult::Skipped {
                phi_hat: check.phi_hat,
                reason: e.to_string(),
            })
        }
        Err(e) => Err(e),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DbalOutcome {
    pub log: QueryLog,
    pub status: RunStatus,
    pub rounds: usize,
    pub skipped_rounds: usize,
    pub final_phi_hat: Option<f64>,
}

/// Runs rounds until the stopping rule fires, the round budget is spent or
/// the sampler starves.
pub fn run_dbal(
    state: &mut LearnerState,
    pool: &Pool,
    cfg: &DbalConfig,
    scfg: &SelectConfig,
) -> Result<DbalOutcome> {
    cfg.validate()?;
    let mut out = DbalOutcome {
        log: QueryLog::default(),
        status: RunStatus::Budget,
        rounds: 0,
        skipped_rounds: 0,
        final_phi_hat: None,
    };
    for round in 1..=cfg.max_rounds {
        out.rounds = round;
        match dbal_round(state, pool, round, cfg, scfg) {
            Ok(RoundResult::Terminated { phi_hat }) => {
                out.final_phi_hat = Some(phi_hat);
                out.status = RunStatus::Done;
                return Ok(out);
            }
            Ok(RoundResult::Queried(entry)) => out.log.entries.push(entry),
            Ok(RoundResult::Skipped { .. }) => out.skipped_rounds += 1,
            Err(Error::SamplerStarved { .. } | Error::EmptyVersionSpace) => {
                out.status = RunStatus::Starved;
                return Ok(out);
            }
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Exact quantities behind the two guarantees on a small version space.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SplitImplicationReport {
    pub phi: f64,
    pub prior_of_target: f64,
    pub p_map: f64,
    pub expected_distance_to_target: f64,
    pub premise_a: bool,
    pub holds_a: bool,
    pub premise_b: bool,
    /// Members with restricted prior at least `p_map - alpha` that lie
    /// farther than `epsilon` from the target.
    pub violations_b: Vec<usize>,
    pub holds_b: bool,
}

/// Checks both implications exactly. The weights of `class` are read as the
/// prior restricted to the version space.
pub fn split_implication_diagnostics(
    class: &FiniteClass,
    pool: &Pool,
    h_star: &Hypothesis,
    epsilon: f64,
    alpha: f64,
) -> Result<SplitImplicationReport> {
    let star = class
        .index_of(h_star)
        .ok_or_else(|| Error::InvalidInput("target is not a member of the class".into()))?;
    let geo = ClassGeometry::new(class, pool)?;
    let w = class.weights();
    let phi = geo.phi();
    let pi_star = w[star];
    let p_map = w.iter().copied().fold(0.0, f64::max);
    let expected: f64 = (0..w.len()).map(|j| w[j] * geo.distance(star, j)).sum();
    let premise_a = phi <= epsilon * pi_star;
    let level = p_map - alpha;
    let premise_b = phi <= 2.0 * epsilon * pi_star.min(level).powi(2);
    let violations_b: Vec<usize> = (0..w.len())
        .filter(|&j| w[j] >= level && geo.distance(star, j) > epsilon)
        .collect();
    Ok(SplitImplicationReport {
        phi,
        prior_of_target: pi_star,
        p_map,
        expected_distance_to_target: expected,
        premise_a,
        holds_a: !premise_a || expected <= epsilon,
        premise_b,
        holds_b: !premise_b || violations_b.is_empty(),
        violations_b,
    })
}

/// Highest-prior member of a finite version space (lowest index on ties).
pub fn map_hypothesis(sampler: &PriorSampler) -> Option<Hypothesis> {
    let (class, consistent) = sampler.finite_state()?;
    consistent
        .iter()
        .copied()
        .reduce(|a, b| if class.weights()[b] > class.weights()[a] { b } else { a })
        .map(|i| class.get(i).clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::brute_average_split_check;
    use crate::samplers::SamplerConfig;

    fn table(bits: &str) -> Hypothesis {
        Hypothesis::table(bits.chars().map(|c| Label::from_bool(c == '+')))
    }

    fn finite_state(class: &FiniteClass, target: usize, seed: u64) -> LearnerState {
        let sampler = PriorSampler::finite(class.clone(), SamplerConfig::with_seed(seed)).unwrap();
        let n = class.get(0).dim();
        LearnerState::new(
            sampler,
            class.get(target).clone(),
            CandidateSource::Distribution(DataDistribution::UniformDomain { size: n }),
            seed ^ 0xabcd,
        )
    }

    #[test]
    fn singleton_always_terminates() {
        let class = FiniteClass::uniform(vec![table("+-+")]).unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::default()).unwrap();
        let pool = Pool::domain(3).unwrap();
        for _ in 0..20 {
            let c = termination_check(&mut s, &pool, 0.01, 50).unwrap();
            assert!(c.terminate);
            assert_eq!(c.phi_hat, 0.0);
        }
    }

    #[test]
    fn large_threshold_stops_before_any_query() {
        let class = FiniteClass::coordinate_vectors(4).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let dist = DataDistribution::UniformSphere { dim: 4 };
        let pool = dist.sample_pool(&mut rng, 500).unwrap();
        let sampler = PriorSampler::finite(class.clone(), SamplerConfig::with_seed(1)).unwrap();
        let mut st = LearnerState::new(sampler, class.get(0).clone(), CandidateSource::Distribution(dist), 3);
        let cfg = DbalConfig::new(1.5, 0.05, 20);
        let out = run_dbal(&mut st, &pool, &cfg, &SelectConfig::new(0.5, 0.05)).unwrap();
        assert_eq!(out.status, RunStatus::Done);
        assert!(out.log.is_empty());
        assert_eq!(st.labels(), 0);
    }

    #[test]
    fn two_far_hypotheses_need_one_query() {
        // Distance 0.6 on a 5-point domain.
        let class = FiniteClass::uniform(vec![table("+++--"), table("-+-+-")]).unwrap();
        let pool = Pool::domain(5).unwrap();
        let mut ones = 0;
        for seed in 0..100 {
            let mut st = finite_state(&class, (seed % 2) as usize, seed);
            let cfg = DbalConfig::new(0.1, 0.05, 10);
            let out = run_dbal(&mut st, &pool, &cfg, &SelectConfig::new(0.1, 0.05)).unwrap();
            assert_eq!(out.status, RunStatus::Done);
            if out.log.len() == 1 {
                ones += 1;
            }
        }
        assert!(ones >= 95, "{ones}/100");
    }

    #[test]
    fn labels_come_from_target_and_target_survives() {
        let class = FiniteClass::uniform(
            ["++--++", "+-+-+-", "-++--+", "+++---", "--++-+", "-+-+-+"]
                .iter()
                .map(|s| table(s))
                .collect(),
        )
        .unwrap();
        let pool = Pool::domain(6).unwrap();
        let mut st = finite_state(&class, 3, 11);
        let out = run_dbal(&mut st, &pool, &DbalConfig::new(0.05, 0.05, 6), &SelectConfig::new(0.05, 0.05)).unwrap();
        for e in &out.log.entries {
            assert_eq!(e.label, st.target().label(&e.point));
        }
        let (_, consistent) = st.sampler.finite_state().unwrap();
        assert!(consistent.contains(&3));
        assert_eq!(st.labels() as usize, out.log.len());
    }

    #[test]
    fn potential_shrinks_by_the_split_ratio() {
        let class = FiniteClass::new(
            ["++--++", "+-+-+-", "-++--+", "+++---", "--++-+"]
                .iter()
                .map(|s| table(s))
                .collect(),
            vec![0.3, 0.1, 0.2, 0.15, 0.25],
        )
        .unwrap();
        let pool = Pool::domain(6).unwrap();
        let cands: Vec<Point> = (0..6).map(Point::Index).collect();
        for seed in 0..30 {
            let mut sampler = PriorSampler::finite(class.clone(), SamplerConfig::with_seed(seed)).unwrap();
            let out = select(&mut sampler, &cands, &pool, &SelectConfig::new(0.1, 0.05)).unwrap();
            let x = &cands[out.index];
            let geo = ClassGeometry::new(&class, &pool).unwrap();
            let ratio = geo.average_split_ratio(x).unwrap();
            let rho = 1.0 - ratio;
            if rho <= 0.0 {
                continue;
            }
            assert!(brute_average_split_check(&class, &pool, x, rho).unwrap());
            let before = geo.phi();
            for target in 0..class.len() {
                let y = class.get(target).label(x);
                let kept: Vec<usize> = (0..class.len())
                    .filter(|&i| class.get(i).label(x) == y)
                    .collect();
                let mass: f64 = kept.iter().map(|&i| class.weights()[i]).sum();
                let after = mass * mass * ClassGeometry::new(&class.subset(&kept).unwrap(), &pool).unwrap().phi();
                assert!(after <= (1.0 - rho) * before + 1e-12);
            }
        }
    }

    #[test]
    fn same_seed_replays_identical_log() {
        let run = || {
            let dist = DataDistribution::UniformSphere { dim: 3 };
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let pool = dist.sample_pool(&mut rng, 300).unwrap();
            let target = Hypothesis::linear(vec![0.3, -0.5, 0.8]).unwrap();
            let sampler = PriorSampler::hit_and_run(3, SamplerConfig::with_seed(5)).unwrap();
            let mut st = LearnerState::new(sampler, target, CandidateSource::Distribution(dist), 6);
            let mut cfg = DbalConfig::new(0.2, 0.1, 30);
            cfg.max_rounds = 6;
            let scfg = SelectConfig {
                cap_m: 100,
                cap_n: 100,
                ..SelectConfig::new(0.2, 0.1)
            };
            run_dbal(&mut st, &pool, &cfg, &scfg).unwrap().log.to_json()
        };
        let a = run();
        assert!(a.len() > 20);
        assert_eq!(a, run());
    }

    #[test]
    fn split_implications_singleton_and_vacuous_cases() {
        let pool = Pool::domain(4).unwrap();
        let single = FiniteClass::uniform(vec![table("+-+-")]).unwrap();
        let r = split_implication_diagnostics(&single, &pool, single.get(0), 0.1, 0.0).unwrap();
        assert_eq!(r.phi, 0.0);
        assert!(r.premise_a && r.holds_a && r.premise_b && r.holds_b);

        let wide = FiniteClass::uniform(vec![table("++++"), table("----")]).unwrap();
        let r = split_implication_diagnostics(&wide, &pool, wide.get(0), 0.1, 0.0).unwrap();
        assert!(!r.premise_a && r.holds_a);
        assert!(r.expected_distance_to_target > 0.1);
    }

    #[test]
    fn map_picks_heaviest_consistent_member() {
        let class = FiniteClass::new(vec![table("++"), table("+-"), table("-+")], vec![0.5, 0.3, 0.2]).unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::default()).unwrap();
        assert_eq!(map_hypothesis(&s), Some(table("++")));
        s.add_constraint(LabeledExample::new(Point::Index(1), Label::Neg)).unwrap();
        assert_eq!(map_hypothesis(&s), Some(table("+-")));
    }

    #[test]
    fn round_bound_formula() {
        let k = dbal_round_bound(0.5, 0.25, 0.25);
        assert!((k - 16.0 * (3.0 + 4.0)).abs() < 1e-12);
        let cfg = DbalConfig::with_round_estimate(0.1, 0.05, 10, 20);
        assert_eq!(cfg.max_rounds, 200);
        assert_eq!(cfg.n_term, (480.0 * (800.0f64 / 0.05).ln()).ceil() as usize);
    }
}

//! Seeded trials and their CSV rows.
//!
//! Trial `i` of an experiment uses seed `s = seed + i`. Five independent
//! generators are derived from `s` in a fixed order: target, evaluation
//! pool, unlabeled stream, learner sampler and the sampler that measures the
//! reported average diameter. Every algorithm of a trial therefore faces the
//! same target and pool.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::baselines::BaselineKind;
use crate::error::{Error, Result};
use crate::finite::FiniteClass;
use crate::hypothesis::Hypothesis;
use crate::learner::{
    dbal_round, default_n_term, CandidateSource, DbalConfig, LearnerState, RoundResult, RunStatus,
};
use crate::pool::{uniform_sphere, Pool};
use crate::samplers::{PriorSampler, SamplerConfig};
use crate::select::SelectConfig;

use super::config::{Algorithm, ClassSpec, ExperimentConfig};

pub const CSV_HEADER: &str = "trial,seed,algorithm,round,labels,unlabeled,hyp_sampled,phi_hat,status,ms";

/// One CSV row: the state of a trial after one round.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub trial: usize,
    pub seed: u64,
    pub algorithm: Algorithm,
    pub round: usize,
    pub labels: u64,
    pub unlabeled: u64,
    pub hyp_sampled: u64,
    pub phi_hat: f64,
    pub status: RunStatus,
    pub ms: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialStreams {
    pub target: u64,
    pub pool: u64,
    pub points: u64,
    pub sampler: u64,
    pub meter: u64,
}

impl TrialStreams {
    pub fn derive(trial_seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed);
        Self {
            target: rng.next_u64(),
            pool: rng.next_u64(),
            points: rng.next_u64(),
            sampler: rng.next_u64(),
            meter: rng.next_u64(),
        }
    }
}

pub fn trial_seed(master: u64, trial: usize) -> u64 {
    master.wrapping_add(trial as u64)
}

/// Everything a trial needs before the first label.
#[derive(Clone, Debug)]
pub struct TrialSetup {
    pub pool: Pool,
    pub target: Hypothesis,
    pub sampler: PriorSampler,
    pub source: CandidateSource,
    pub streams: TrialStreams,
}

pub fn setup_trial(cfg: &ExperimentConfig, seed: u64) -> Result<TrialSetup> {
    let streams = TrialStreams::derive(seed);
    let dist = cfg.class.distribution()?;
    let finite = cfg.class.finite_class()?;
    let scfg = SamplerConfig {
        rng_seed: streams.sampler,
        ..cfg.sampler.clone()
    };
    let mut target_rng = ChaCha8Rng::seed_from_u64(streams.target);
    let mut pool_rng = ChaCha8Rng::seed_from_u64(streams.pool);
    let pool = match &cfg.class {
        ClassSpec::Finite { .. } => Pool::domain(finite.as_ref().expect("finite").get(0).dim())?,
        _ => dist.sample_pool(&mut pool_rng, cfg.pool_size)?,
    };
    let (target, sampler) = match (&cfg.class, finite) {
        (ClassSpec::Linear { dim }, _) => (
            Hypothesis::linear(uniform_sphere(&mut target_rng, *dim))?,
            PriorSampler::hit_and_run(*dim, scfg)?,
        ),
        (ClassSpec::Disjunction { dim, k, .. }, _) => {
            let lits = rand::seq::index::sample(&mut target_rng, *dim, *k);
            (
                Hypothesis::disjunction(*dim, lits)?,
                PriorSampler::disjunction(*dim, *k, scfg)?,
            )
        }
        (_, Some(class)) => (draw_member(&class, &mut target_rng)?, PriorSampler::finite(class, scfg)?),
        (_, None) => unreachable!("enumerable class specs yield a class"),
    };
    Ok(TrialSetup {
        pool,
        target,
        sampler,
        source: CandidateSource::Distribution(dist),
        streams,
    })
}

fn draw_member<R: Rng + ?Sized>(class: &FiniteClass, rng: &mut R) -> Result<Hypothesis> {
    let w = WeightedIndex::new(class.weights()).map_err(|e| Error::Config(e.to_string()))?;
    Ok(class.get(w.sample(rng)).clone())
}

struct Meter<'a> {
    pool: &'a Pool,
    seed: u64,
    edges: usize,
}

impl Meter<'_> {
    /// Average-diameter estimate from a fork of the learner's sampler, so the
    /// learner's own stream is untouched.
    fn measure(&self, sampler: &PriorSampler, round: usize) -> Result<f64> {
        let seed = self.seed ^ (round as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15);
        Ok(sampler.fork(seed).sample_edges(self.edges, self.pool)?.mean_distance())
    }
}

/// Runs one algorithm on one trial.
pub fn run_trial(cfg: &ExperimentConfig, trial: usize, algorithm: Algorithm) -> Result<Vec<ExperimentRecord>> {
    let seed = trial_seed(cfg.seed, trial);
    let setup = setup_trial(cfg, seed)?;
    let meter = Meter {
        pool: &setup.pool,
        seed: setup.streams.meter,
        edges: cfg.meter_edges,
    };
    let mut state = LearnerState::new(setup.sampler, setup.target, setup.source, setup.streams.points);
    let start = Instant::now();
    let mut rows = Vec::new();
    let mut row = |state: &LearnerState, round: usize, phi_hat: f64, status: RunStatus| {
        rows.push(ExperimentRecord {
            trial,
            seed,
            algorithm,
            round,
            labels: state.labels(),
            unlabeled: state.unlabeled(),
            hyp_sampled: state.sampler.hypotheses_drawn(),
            phi_hat,
            status,
            ms: if cfg.timing { start.elapsed().as_millis() as u64 } else { 0 },
        });
    };
    let pool = &setup.pool;
    let done_below = 0.75 * cfg.epsilon;
    match algorithm {
        Algorithm::Dbal => {
            let dcfg = DbalConfig {
                epsilon: cfg.epsilon,
                delta: cfg.delta,
                m: cfg.candidates,
                n_term: cfg.n_term.unwrap_or_else(|| default_n_term(cfg.epsilon, cfg.delta, cfg.rounds)),
                max_rounds: cfg.rounds,
            };
            dcfg.validate()?;
            let scfg = SelectConfig {
                theory_mode: cfg.theory_mode,
                cap_m: cfg.cap_m,
                cap_n: cfg.cap_n,
                ..SelectConfig::new(cfg.epsilon, cfg.delta)
            };
            for round in 1..=cfg.rounds {
                let status = match dbal_round(&mut state, pool, round, &dcfg, &scfg) {
                    Ok(RoundResult::Terminated { .. }) => RunStatus::Done,
                    Ok(_) => RunStatus::Ok,
                    Err(Error::SamplerStarved { .. } | Error::EmptyVersionSpace) => RunStatus::Starved,
                    Err(e) => return Err(e),
                };
                let status = if status == RunStatus::Ok && round == cfg.rounds {
                    RunStatus::Budget
                } else {
                    status
                };
                let phi = measure_or_starve(&meter, &state, round, status)?;
                row(&state, round, phi.0, phi.1);
                if phi.1 != RunStatus::Ok {
                    break;
                }
            }
        }
        baseline => {
            let kind = match baseline {
                Algorithm::Passive => BaselineKind::Passive,
                Algorithm::Cal => BaselineKind::Cal {
                    committee: cfg.committee,
                },
                _ => BaselineKind::Qbc,
            };
            kind.validate()?;
            'rounds: for round in 1..=cfg.rounds {
                loop {
                    if state.unlabeled() >= cfg.max_unlabeled {
                        let phi = measure_or_starve(&meter, &state, round, RunStatus::Budget)?;
                        row(&state, round, phi.0, phi.1);
                        break 'rounds;
                    }
                    match kind.step(&mut state) {
                        Ok(out) if out.queried => break,
                        Ok(_) => {}
                        Err(Error::SamplerStarved { .. } | Error::EmptyVersionSpace) => {
                            row(&state, round, f64::NAN, RunStatus::Starved);
                            break 'rounds;
                        }
                        Err(e) => return Err(e),
                    }
                }
                let (phi, status) = measure_or_starve(&meter, &state, round, RunStatus::Ok)?;
                let status = match status {
                    RunStatus::Ok if phi < done_below => RunStatus::Done,
                    RunStatus::Ok if round == cfg.rounds => RunStatus::Budget,
                    s => s,
                };
                row(&state, round, phi, status);
                if status != RunStatus::Ok {
                    break;
                }
            }
        }
    }
    Ok(rows)
}

fn measure_or_starve(
    meter: &Meter<'_>,
    state: &LearnerState,
    round: usize,
    status: RunStatus,
) -> Result<(f64, RunStatus)> {
    if status == RunStatus::Starved {
        return Ok((f64::NAN, status));
    }
    match meter.measure(&state.sampler, round) {
        Ok(phi) => Ok((phi, status)),
        Err(Error::SamplerStarved { .. } | Error::EmptyVersionSpace) => Ok((f64::NAN, RunStatus::Starved)),
        Err(e) => Err(e),
    }
}

/// All trials of all configured algorithms, ordered by trial, then
/// algorithm (in configuration order), then round.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    cfg.validate()?;
    let jobs: Vec<(usize, Algorithm)> = (0..cfg.trials)
        .flat_map(|t| cfg.algorithms.iter().map(move |&a| (t, a)))
        .collect();
    let results: Vec<Result<Vec<ExperimentRecord>>> =
        jobs.par_iter().map(|&(t, a)| run_trial(cfg, t, a)).collect();
    let mut rows = Vec::new();
    for r in results {
        rows.extend(r?);
    }
    Ok(rows)
}

pub fn write_csv<W: Write>(records: &[ExperimentRecord], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_csv_file(records: &[ExperimentRecord], path: &Path) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_csv(records, std::io::BufWriter::new(file))
}

pub fn read_csv<R: std::io::Read>(input: R) -> Result<Vec<ExperimentRecord>> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_owned).collect();
    if header.join(",") != CSV_HEADER {
        return Err(Error::Config(format!("unexpected CSV header {:?}", header.join(","))));
    }
    r.deserialize().map(|row| row.map_err(Error::from)).collect()
}

/// Labels spent when the reported average diameter first reaches
/// `threshold`, or `None` if it never does.
pub fn labels_to_threshold(rows: &[ExperimentRecord], threshold: f64) -> Option<u64> {
    rows.iter().find(|r| r.phi_hat <= threshold).map(|r| r.labels)
}

/// Per-trial labels-to-threshold of one algorithm; unreached trials count
/// as infinitely many labels.
pub fn labels_to_threshold_by_trial(
    rows: &[ExperimentRecord],
    algorithm: Algorithm,
    threshold: f64,
) -> Vec<f64> {
    let mut trials: Vec<usize> = rows.iter().filter(|r| r.algorithm == algorithm).map(|r| r.trial).collect();
    trials.dedup();
    trials
        .into_iter()
        .map(|t| {
            let mine: Vec<ExperimentRecord> = rows
                .iter()
                .filter(|r| r.algorithm == algorithm && r.trial == t)
                .cloned()
                .collect();
            labels_to_threshold(&mine, threshold).map_or(f64::INFINITY, |l| l as f64)
        })
        .collect()
}

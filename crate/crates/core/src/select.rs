//! Adaptive query selection.
//!
//! Round `t` guesses a splitting level `rho_t = 2^-t`. It estimates the
//! average diameter from `m_t` fresh edges, then draws `n_t` more edges and
//! returns the first candidate whose worse side keeps at most
//! `(1 - rho_t) * phi_hat` of the estimated potential. If no candidate
//! qualifies the guess is halved and both samples are redrawn.
//!
//! Sample sizes use natural logarithms:
//!
//! ```text
//! m_t = ceil(48 / (rho_t^2 eps) * ln(4 / delta0))
//! n_t = ceil(max(32 / (rho_t^2 phi_hat), 40 / phi_hat^2) * ln(4 / delta0))
//! ```
//!
//! Outside theory mode both are clipped to `cap_m` / `cap_n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypothesis::Point;
use crate::pool::Pool;
use crate::samplers::PriorSampler;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectConfig {
    pub epsilon: f64,
    pub delta0: f64,
    /// Smallest splitting level tried before giving up.
    pub rho_floor: f64,
    pub theory_mode: bool,
    pub cap_m: usize,
    pub cap_n: usize,
}

impl SelectConfig {
    /// Practical mode with the floor derived from `epsilon`.
    pub fn new(epsilon: f64, delta0: f64) -> Self {
        Self {
            epsilon,
            delta0,
            rho_floor: rho_floor_from_epsilon(epsilon.clamp(f64::MIN_POSITIVE, 0.999)),
            theory_mode: false,
            cap_m: 1000,
            cap_n: 1000,
        }
    }

    pub fn theory(epsilon: f64, delta0: f64) -> Self {
        Self {
            theory_mode: true,
            ..Self::new(epsilon, delta0)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.delta0 > 0.0 && self.delta0 < 1.0) {
            return Err(Error::Config(format!("delta0 must lie in (0,1), got {}", self.delta0)));
        }
        if !(self.rho_floor > 0.0 && self.rho_floor <= 0.5) {
            return Err(Error::Config(format!(
                "rho_floor must lie in (0,1/2], got {}",
                self.rho_floor
            )));
        }
        if self.cap_m == 0 || self.cap_n == 0 {
            return Err(Error::Config("sample caps must be positive".into()));
        }
        Ok(())
    }

    /// Rounds allowed before the floor is passed: `ceil(log2(1/rho_floor)) + 1`.
    pub fn max_rounds(&self) -> usize {
        (1.0 / self.rho_floor).log2().ceil() as usize + 1
    }

    fn log_term(&self) -> f64 {
        (4.0 / self.delta0).ln()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectRoundTrace {
    pub t: usize,
    pub rho_hat: f64,
    pub phi_hat: f64,
    pub m_t: usize,
    pub n_t: usize,
    pub chosen: Option<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SelectOutcome {
    pub index: usize,
    pub trace: Vec<SelectRoundTrace>,
    /// Edges drawn across all rounds (both samples).
    pub edges_drawn: u64,
}

impl SelectOutcome {
    pub fn rounds(&self) -> usize {
        self.trace.len()
    }

    pub fn hypotheses_drawn(&self) -> u64 {
        2 * self.edges_drawn
    }
}

fn ceil_count(v: f64) -> usize {
    if v.is_finite() && v < usize::MAX as f64 {
        v.ceil().max(1.0) as usize
    } else {
        usize::MAX
    }
}

/// Edge count for the average-diameter estimate of round `rho_hat`.
pub fn phi_sample_size(cfg: &SelectConfig, rho_hat: f64) -> usize {
    let m = ceil_count(48.0 / (rho_hat * rho_hat * cfg.epsilon) * cfg.log_term());
    if cfg.theory_mode {
        m
    } else {
        m.min(cfg.cap_m)
    }
}

/// `(m_t, n_t)` for a round at `rho_hat` with estimate `phi_hat`.
pub fn round_sample_sizes(cfg: &SelectConfig, rho_hat: f64, phi_hat: f64) -> (usize, usize) {
    let m = phi_sample_size(cfg, rho_hat);
    let a = 32.0 / (rho_hat * rho_hat * phi_hat);
    let b = 40.0 / (phi_hat * phi_hat);
    let n = ceil_count(a.max(b) * cfg.log_term());
    (m, if cfg.theory_mode { n } else { n.min(cfg.cap_n) })
}

/// `epsilon / (8 ceil(log2(2/epsilon)))`.
pub fn rho_floor_from_epsilon(epsilon: f64) -> f64 {
    epsilon / (8.0 * (2.0 / epsilon).log2().ceil())
}

/// Upper bound on the edges drawn by a theory-mode call that halts by the
/// round `rho_hat <= rho`, when the average diameter is `phi` and every
/// estimate lands in its confidence band.
///
/// Per round: `m_t + n_t <= (96 / (eps rho_t^2) + 72 / phi^2) ln(4/delta0) + 2`,
/// summed over `T = ceil(log2(1/rho)) + 1` rounds, with
/// `sum_t 1/rho_t^2 <= 16 / rho^2`.
pub fn select_edge_bound(epsilon: f64, rho: f64, phi: f64, delta0: f64) -> f64 {
    let rounds = (1.0 / rho).log2().ceil() + 1.0;
    let l = (4.0 / delta0).ln();
    (96.0 * 16.0 / (epsilon * rho * rho) + 72.0 * rounds / (phi * phi)) * l + 2.0 * rounds
}

/// Runs the halving search over `candidates`, drawing from `sampler` and
/// measuring distances on `pool`.
pub fn select(
    sampler: &mut PriorSampler,
    candidates: &[Point],
    pool: &Pool,
    cfg: &SelectConfig,
) -> Result<SelectOutcome> {
    cfg.validate()?;
    if candidates.is_empty() {
        return Err(Error::InvalidInput("no candidate points".into()));
    }
    for x in candidates {
        sampler.check_point(x)?;
    }
    let mut trace = Vec::new();
    let mut edges_drawn = 0u64;
    for t in 1..=cfg.max_rounds() {
        let rho_hat = 0.5f64.powi(t as i32);
        let m = phi_sample_size(cfg, rho_hat);
        let phi_hat = sampler.sample_edges(m, pool)?.mean_distance();
        edges_drawn += m as u64;
        if phi_hat <= 0.0 {
            return Err(Error::DegenerateVersionSpace);
        }
        let (m_t, n_t) = round_sample_sizes(cfg, rho_hat, phi_hat);
        let edges = sampler.sample_edges(n_t, pool)?;
        edges_drawn += n_t as u64;
        let threshold = (1.0 - rho_hat) * phi_hat;
        let mut chosen = None;
        for (i, x) in candidates.iter().enumerate() {
            if edges.split_stats(x)?.worst() / n_t as f64 <= threshold {
                chosen = Some(i);
                break;
            }
        }
        trace.push(SelectRoundTrace {
            t,
            rho_hat,
            phi_hat,
            m_t,
            n_t,
            chosen,
        });
        if let Some(index) = chosen {
            return Ok(SelectOutcome {
                index,
                trace,
                edges_drawn,
            });
        }
    }
    Err(Error::SelectExhausted {
        rounds: cfg.max_rounds(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::finite::FiniteClass;
    use crate::hypothesis::{Hypothesis, Label};
    use crate::samplers::SamplerConfig;

    fn table(bits: &str) -> Hypothesis {
        Hypothesis::table(bits.chars().map(|c| Label::from_bool(c == '+')))
    }

    #[test]
    fn worked_sample_size() {
        let cfg = SelectConfig::theory(0.1, 0.01);
        assert_eq!(phi_sample_size(&cfg, 0.5), (1920.0 * 400f64.ln()).ceil() as usize);
        assert_eq!(phi_sample_size(&cfg, 0.5), 11_504);
    }

    #[test]
    fn unit_phi_sizes() {
        let cfg = SelectConfig::theory(0.2, 0.05);
        let l = 80f64.ln();
        for rho in [0.5, 0.25, 0.125] {
            let (_, n) = round_sample_sizes(&cfg, rho, 1.0);
            assert_eq!(n, ((32.0 / (rho * rho)).max(40.0) * l).ceil() as usize);
        }
    }

    #[test]
    fn halving_delta_scales_by_log_ratio() {
        let a = SelectConfig::theory(0.1, 0.02);
        let b = SelectConfig::theory(0.1, 0.01);
        let ratio = (400f64).ln() / (200f64).ln();
        let raw = |c: &SelectConfig| 48.0 / (0.25 * c.epsilon) * c.log_term();
        assert!((raw(&b) / raw(&a) - ratio).abs() < 1e-12);
        let (ma, na) = round_sample_sizes(&a, 0.5, 0.3);
        let (mb, nb) = round_sample_sizes(&b, 0.5, 0.3);
        assert!(mb > ma && nb > na);
        assert!(((mb as f64) / (ma as f64) - ratio).abs() < 1e-3);
        assert!(((nb as f64) / (na as f64) - ratio).abs() < 1e-3);
    }

    #[test]
    fn practical_mode_caps() {
        let cfg = SelectConfig::new(0.1, 0.01);
        assert_eq!(round_sample_sizes(&cfg, 0.01, 0.01), (1000, 1000));
    }

    #[test]
    fn floor_values() {
        assert_eq!(rho_floor_from_epsilon(0.5), 0.03125);
        for k in 1..8 {
            let eps = 0.5f64.powi(k);
            assert!((rho_floor_from_epsilon(eps) - eps / (8.0 * (k + 1) as f64)).abs() < 1e-15);
        }
        assert!(rho_floor_from_epsilon(0.1) < rho_floor_from_epsilon(0.2));
        assert_eq!(SelectConfig::new(0.5, 0.1).max_rounds(), 6);
    }

    #[test]
    fn config_ranges() {
        assert!(SelectConfig::new(0.1, 0.1).validate().is_ok());
        assert!(SelectConfig::new(1.5, 0.1).validate().is_err());
        assert!(SelectConfig::new(0.1, 0.0).validate().is_err());
        let mut c = SelectConfig::new(0.1, 0.1);
        c.rho_floor = 0.75;
        assert!(c.validate().is_err());
    }

    #[test]
    fn separating_candidate_wins_first_round() {
        let class = FiniteClass::uniform(vec![table("++-"), table("+--")]).unwrap();
        let pool = Pool::domain(3).unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::with_seed(3)).unwrap();
        let cands: Vec<Point> = (0..3).map(Point::Index).collect();
        let out = select(&mut s, &cands, &pool, &SelectConfig::theory(0.2, 0.05)).unwrap();
        assert_eq!(out.index, 1);
        assert_eq!(out.rounds(), 1);
        assert_eq!(out.trace[0].rho_hat, 0.5);
        assert_eq!(out.hypotheses_drawn(), s.hypotheses_drawn());
    }

    #[test]
    fn unanimous_candidates_exhaust() {
        let class = FiniteClass::uniform(vec![table("++-"), table("+--")]).unwrap();
        let pool = Pool::domain(3).unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::with_seed(3)).unwrap();
        let cands = vec![Point::Index(0), Point::Index(2)];
        let cfg = SelectConfig {
            rho_floor: 0.25,
            ..SelectConfig::theory(0.5, 0.05)
        };
        match select(&mut s, &cands, &pool, &cfg) {
            Err(Error::SelectExhausted { rounds }) => assert_eq!(rounds, cfg.max_rounds()),
            other => panic!("expected exhaustion, got {other:?}"),
        }
    }

    #[test]
    fn halting_inequality_holds_for_returned_point() {
        let class = FiniteClass::coordinate_vectors(4).unwrap();
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(1);
        let pool = crate::pool::DataDistribution::UniformSphere { dim: 4 }
            .sample_pool(&mut rng, 2000)
            .unwrap();
        let mut s = PriorSampler::finite(class, SamplerConfig::with_seed(9)).unwrap();
        let cands: Vec<Point> = pool.points()[..50].to_vec();
        let out = select(&mut s, &cands, &pool, &SelectConfig::new(0.3, 0.05)).unwrap();
        let last = out.trace.last().unwrap();
        assert_eq!(last.chosen, Some(out.index));
        assert!(out.trace[..out.rounds() - 1].iter().all(|r| r.chosen.is_none()));
    }
}

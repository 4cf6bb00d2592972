//! Experiment configuration: a TOML file, then command-line overrides.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bits::BitSet;
use crate::error::{Error, Result};
use crate::finite::FiniteClass;
use crate::pool::DataDistribution;
use crate::samplers::SamplerConfig;

/// Hypothesis class and data distribution of an experiment.
///
/// Text forms: `linear:D`, `disjunction:D:K:P`, `coordinate:N`, `finite:PATH`.
#[derive(Clone, Debug, PartialEq)]
pub enum ClassSpec {
    /// Homogeneous separators on the unit sphere in `R^dim`.
    Linear { dim: usize },
    /// `k`-sparse monotone disjunctions over `Bernoulli(p)^dim` points.
    Disjunction { dim: usize, k: usize, p: f64 },
    /// The `n` coordinate separators with a uniform prior.
    Coordinate { n: usize },
    /// Label tables over a finite domain, read from a TOML fixture.
    Finite { path: PathBuf },
}

impl ClassSpec {
    pub fn distribution(&self) -> Result<DataDistribution> {
        let d = match self {
            ClassSpec::Linear { dim } => DataDistribution::UniformSphere { dim: *dim },
            ClassSpec::Disjunction { dim, p, .. } => DataDistribution::Bernoulli { dim: *dim, p: *p },
            ClassSpec::Coordinate { n } => DataDistribution::UniformSphere { dim: *n },
            ClassSpec::Finite { path } => DataDistribution::UniformDomain {
                size: load_fixture(path)?.get(0).dim(),
            },
        };
        d.validate()?;
        Ok(d)
    }

    /// The explicit class, for the two enumerable variants.
    pub fn finite_class(&self) -> Result<Option<FiniteClass>> {
        match self {
            ClassSpec::Coordinate { n } => FiniteClass::coordinate_vectors(*n).map(Some),
            ClassSpec::Finite { path } => load_fixture(path).map(Some),
            _ => Ok(None),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            ClassSpec::Linear { dim } | ClassSpec::Coordinate { n: dim } if *dim == 0 => {
                Err(Error::Config("dimension must be positive".into()))
            }
            ClassSpec::Disjunction { dim, k, p } => {
                if *k == 0 || k > dim {
                    return Err(Error::Config(format!("need 0 < k <= d, got k={k}, d={dim}")));
                }
                if !(*p > 0.0 && *p < 1.0) {
                    return Err(Error::Config(format!("p must lie in (0,1), got {p}")));
                }
                Ok(())
            }
            ClassSpec::Finite { path } => load_fixture(path).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl FromStr for ClassSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("unrecognized class spec {s:?}"));
        let num = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
        let (head, rest) = s.split_once(':').ok_or_else(bad)?;
        let parts: Vec<&str> = rest.split(':').collect();
        let spec = match (head.trim(), parts.as_slice()) {
            ("linear", [d]) => ClassSpec::Linear { dim: num(d)? },
            ("disjunction", [d, k, p]) => ClassSpec::Disjunction {
                dim: num(d)?,
                k: num(k)?,
                p: p.trim().parse().map_err(|_| bad())?,
            },
            ("coordinate", [n]) => ClassSpec::Coordinate { n: num(n)? },
            ("finite", _) => ClassSpec::Finite {
                path: PathBuf::from(rest),
            },
            _ => return Err(bad()),
        };
        Ok(spec)
    }
}

impl fmt::Display for ClassSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClassSpec::Linear { dim } => write!(f, "linear:{dim}"),
            ClassSpec::Disjunction { dim, k, p } => write!(f, "disjunction:{dim}:{k}:{p}"),
            ClassSpec::Coordinate { n } => write!(f, "coordinate:{n}"),
            ClassSpec::Finite { path } => write!(f, "finite:{}", path.display()),
        }
    }
}

impl Serialize for ClassSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ClassSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Deserialize)]
struct Fixture {
    hypotheses: Vec<String>,
    weights: Option<Vec<f64>>,
}

/// Reads a fixture of `+`/`-` label strings with optional prior weights.
pub fn load_fixture(path: &Path) -> Result<FiniteClass> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read fixture {}: {e}", path.display())))?;
    parse_fixture(&text)
}

pub fn parse_fixture(text: &str) -> Result<FiniteClass> {
    let fx: Fixture = toml::from_str(text).map_err(|e| Error::Config(format!("fixture: {e}")))?;
    if fx.hypotheses.is_empty() {
        return Err(Error::Config("fixture lists no hypotheses".into()));
    }
    let mut tables = Vec::with_capacity(fx.hypotheses.len());
    for row in &fx.hypotheses {
        let mut bits = Vec::with_capacity(row.len());
        for c in row.trim().chars() {
            match c {
                '+' => bits.push(true),
                '-' => bits.push(false),
                other => return Err(Error::Config(format!("bad label character {other:?}"))),
            }
        }
        tables.push(BitSet::from_bools(bits));
    }
    FiniteClass::from_tables(tables, fx.weights).map_err(|e| Error::Config(e.to_string()))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Dbal,
    Passive,
    Cal,
    Qbc,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Dbal => "dbal",
            Algorithm::Passive => "passive",
            Algorithm::Cal => "cal",
            Algorithm::Qbc => "qbc",
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dbal" => Ok(Algorithm::Dbal),
            "passive" => Ok(Algorithm::Passive),
            "cal" => Ok(Algorithm::Cal),
            "qbc" => Ok(Algorithm::Qbc),
            other => Err(Error::Config(format!("unknown algorithm {other:?}"))),
        }
    }
}

/// Comma-separated algorithm list.
pub fn parse_algorithms(s: &str) -> Result<Vec<Algorithm>> {
    let algos: Vec<Algorithm> = s
        .split(',')
        .filter(|p| !p.trim().is_empty())
        .map(str::parse)
        .collect::<Result<_>>()?;
    if algos.is_empty() {
        return Err(Error::Config("no algorithm given".into()));
    }
    Ok(algos)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub class: ClassSpec,
    pub algorithms: Vec<Algorithm>,
    pub epsilon: f64,
    pub delta: f64,
    pub trials: usize,
    /// Trial `i` runs with seed `seed + i`.
    pub seed: u64,
    pub pool_size: usize,
    pub out: Option<PathBuf>,
    pub theory_mode: bool,
    /// Row budget per trial.
    pub rounds: usize,
    /// Unlabeled candidates per active round.
    pub candidates: usize,
    pub committee: usize,
    pub cap_m: usize,
    pub cap_n: usize,
    /// Edges per stopping check; derived from the round budget when unset.
    pub n_term: Option<usize>,
    /// Edges per reported average-diameter estimate.
    pub meter_edges: usize,
    /// Unlabeled points a committee baseline may consume per trial.
    pub max_unlabeled: u64,
    pub timing: bool,
    pub sampler: SamplerConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            class: ClassSpec::Linear { dim: 10 },
            algorithms: vec![Algorithm::Dbal],
            epsilon: 0.15,
            delta: 0.05,
            trials: 20,
            seed: 0,
            pool_size: 10_000,
            out: None,
            theory_mode: false,
            rounds: 200,
            candidates: 200,
            committee: crate::baselines::DEFAULT_COMMITTEE,
            cap_m: 1000,
            cap_n: 1000,
            n_term: None,
            meter_edges: 500,
            max_unlabeled: 1_000_000,
            timing: false,
            sampler: SamplerConfig::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        self.class.validate()?;
        self.sampler.validate()?;
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return Err(Error::Config(format!("epsilon must lie in (0,1), got {}", self.epsilon)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        let positive = [
            ("trials", self.trials),
            ("pool_size", self.pool_size),
            ("rounds", self.rounds),
            ("candidates", self.candidates),
            ("cap_m", self.cap_m),
            ("cap_n", self.cap_n),
            ("meter_edges", self.meter_edges),
        ];
        for (name, v) in positive {
            if v == 0 {
                return Err(Error::Config(format!("{name} must be at least 1")));
            }
        }
        if self.algorithms.is_empty() {
            return Err(Error::Config("no algorithm given".into()));
        }
        if self.committee < 2 {
            return Err(Error::Config("committee must be at least 2".into()));
        }
        if self.n_term == Some(0) {
            return Err(Error::Config("n_term must be at least 1".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn class_specs_round_trip() {
        for s in ["linear:10", "disjunction:75:4:0.25", "coordinate:4", "finite:fx/a.toml"] {
            let spec: ClassSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("linear".parse::<ClassSpec>().is_err());
        assert!("linear:x".parse::<ClassSpec>().is_err());
        assert!("disjunction:10:2".parse::<ClassSpec>().is_err());
        assert!("disjunction:3:4:0.5".parse::<ClassSpec>().unwrap().validate().is_err());
    }

    #[test]
    fn algorithm_lists() {
        assert_eq!(
            parse_algorithms("dbal, QBC,passive").unwrap(),
            vec![Algorithm::Dbal, Algorithm::Qbc, Algorithm::Passive]
        );
        assert!(parse_algorithms("dbal,foo").is_err());
        assert!(parse_algorithms("").is_err());
    }

    #[test]
    fn fixture_parsing() {
        let c = parse_fixture("hypotheses = [\"++-\", \"+--\"]\nweights = [3.0, 1.0]\n").unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.weights(), &[0.75, 0.25]);
        assert!(parse_fixture("hypotheses = [\"+x\"]").is_err());
        assert!(parse_fixture("hypotheses = []").is_err());
        assert!(parse_fixture("hypotheses = [\"++\", \"+\"]").is_err());
    }

    #[test]
    fn toml_config_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "class = \"disjunction:75:4:0.25\"\nalgorithms = [\"qbc\", \"dbal\"]\ntrials = 3\n[sampler]\nchain_steps = 5\n",
        )
        .unwrap();
        assert_eq!(cfg.trials, 3);
        assert_eq!(cfg.algorithms, vec![Algorithm::Qbc, Algorithm::Dbal]);
        assert_eq!(cfg.sampler.chain_steps, 5);
        assert_eq!(cfg.sampler.burn_in, 100);
        assert_eq!(cfg.pool_size, 10_000);
        cfg.validate().unwrap();
        assert!(ExperimentConfig::from_toml("trails = 3").is_err());
    }

    #[test]
    fn validation_rejects_bad_values() {
        let mut c = ExperimentConfig::default();
        c.trials = 0;
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.epsilon = 1.0;
        assert!(c.validate().is_err());
        let c = ExperimentConfig {
            class: ClassSpec::Finite {
                path: "/nonexistent/fixture.toml".into(),
            },
            ..ExperimentConfig::default()
        };
        assert!(c.validate().is_err());
    }
}

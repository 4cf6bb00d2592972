//! Diameter-based active learning.
//!
//! The crate provides hypothesis classes and evaluation pools, exact oracles
//! for average diameter and (average) splitting on finite classes, samplers
//! for the prior restricted to a version space, the `psi` edge estimator, the
//! adaptive [`select`](select::select) query rule, the outer learning loop
//! and passive / CAL / QBC comparators, plus a seeded experiment harness.

pub mod baselines;
pub mod bits;
pub mod error;
pub mod estimator;
pub mod finite;
pub mod harness;
pub mod hypothesis;
pub mod learner;
pub mod oracle;
pub mod pool;
pub mod samplers;
pub mod select;
pub mod stats;

pub use error::{Error, Result};
pub use estimator::{EdgeSample, SplitStats};
pub use finite::FiniteClass;
pub use hypothesis::{
    Hypothesis, Label, LabeledExample, LinearSeparator, MonotoneDisjunction, Point,
    TableHypothesis, VersionSpaceConstraints,
};
pub use pool::{empirical_distance, DataDistribution, Pool};
pub use samplers::{PriorSampler, SamplerConfig};

//! Great-circle hit-and-run on the unit sphere restricted to a polyhedral
//! cone `{w : y_i <w, x_i> >= 0}`.
//!
//! Each move draws a uniformly random tangent direction `u` at the current
//! point `w`, intersects the great circle `cos(t) w + sin(t) u` with every
//! half-space and jumps to a uniform angle on the feasible arc. Every
//! constraint cuts the circle into a half circle containing `t = 0`, so the
//! feasible set is the single interval `[max lo_i, min hi_i]`.

use std::collections::VecDeque;
use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::hypothesis::{Hypothesis, Label, LabeledExample, LinearSeparator, Point};
use crate::pool::uniform_sphere;

use super::SamplerConfig;

const RECENT_CAPACITY: usize = 32;
const PERCEPTRON_MAX_UPDATES: u64 = 1_000_000;

#[derive(Clone, Debug)]
pub(crate) struct SphereChain {
    dim: usize,
    /// `y_i * x_i` for every constraint.
    signed: Vec<Vec<f64>>,
    negatives: Vec<bool>,
    current: Option<Vec<f64>>,
    recent: VecDeque<Vec<f64>>,
}

impl SphereChain {
    pub(crate) fn new(dim: usize) -> Self {
        Self {
            dim,
            signed: Vec::new(),
            negatives: Vec::new(),
            current: None,
            recent: VecDeque::new(),
        }
    }

    pub(crate) fn dim(&self) -> usize {
        self.dim
    }

    pub(crate) fn observe(&mut self, example: &LabeledExample) {
        let Point::Real(x) = &example.point else {
            unreachable!("validated by PriorSampler")
        };
        let sign = example.label.as_i8() as f64;
        self.signed.push(x.iter().map(|v| sign * v).collect());
        self.negatives.push(example.label == Label::Neg);
        if let Some(w) = &self.current {
            if !self.feasible(w) {
                self.current = None;
            }
        }
    }

    /// Exact feasibility, including the strict side for negative labels.
    fn feasible(&self, w: &[f64]) -> bool {
        self.signed.iter().zip(&self.negatives).all(|(s, &neg)| {
            let v = dot(w, s);
            if neg {
                v > 0.0
            } else {
                v >= 0.0
            }
        })
    }

    pub(crate) fn draw<R: Rng + ?Sized>(
        &mut self,
        rng: &mut R,
        config: &SamplerConfig,
    ) -> Result<Hypothesis> {
        if self.signed.is_empty() {
            return LinearSeparator::from_unit(uniform_sphere(rng, self.dim)).map(Into::into);
        }
        if self.current.is_none() {
            let start = self.initial_point(rng)?;
            self.current = Some(start);
            for _ in 0..config.burn_in {
                self.step(rng);
            }
        }
        for _ in 0..config.chain_steps {
            self.step(rng);
        }
        // A move can land exactly on a boundary; keep walking until the
        // state is strictly consistent.
        let mut extra = 0u64;
        while !self.feasible(self.current.as_ref().unwrap()) {
            self.step(rng);
            extra += 1;
            if extra > config.max_rejections {
                return Err(Error::SamplerStarved { rejections: extra });
            }
        }
        let w = self.current.clone().unwrap();
        if self.recent.len() == RECENT_CAPACITY {
            self.recent.pop_front();
        }
        self.recent.push_back(w.clone());
        LinearSeparator::from_unit(w).map(Into::into)
    }

    fn initial_point<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Vec<f64>> {
        if let Some(w) = self.recent.iter().rev().find(|w| self.feasible(w)) {
            return Ok(w.clone());
        }
        // Perceptron on the signed examples; converges on realizable data.
        let mut w = uniform_sphere(rng, self.dim);
        let mut updates = 0u64;
        loop {
            let violated = self
                .signed
                .iter()
                .position(|s| dot(&w, s) <= 0.0);
            match violated {
                None => break,
                Some(i) => {
                    let s = &self.signed[i];
                    let norm = dot(s, s).sqrt().max(f64::MIN_POSITIVE);
                    for (wi, si) in w.iter_mut().zip(s) {
                        *wi += si / norm;
                    }
                    updates += 1;
                    if updates > PERCEPTRON_MAX_UPDATES {
                        return Err(Error::SamplerStarved { rejections: updates });
                    }
                }
            }
        }
        normalize(&mut w);
        Ok(w)
    }

    fn step<R: Rng + ?Sized>(&mut self, rng: &mut R) {
        let w = self.current.as_mut().expect("chain initialized");
        let u = loop {
            let mut g: Vec<f64> = (0..w.len()).map(|_| rng.sample(StandardNormal)).collect();
            let proj = dot(&g, w);
            for (gi, wi) in g.iter_mut().zip(w.iter()) {
                *gi -= proj * wi;
            }
            if normalize(&mut g) > 1e-9 {
                break g;
            }
            if w.len() == 1 {
                // No tangent directions on S^0.
                return;
            }
        };
        let (mut lo, mut hi) = (-PI, PI);
        for s in &self.signed {
            let a = dot(w, s).max(0.0);
            let b = dot(&u, s);
            if a == 0.0 && b == 0.0 {
                continue;
            }
            let phase = b.atan2(a);
            lo = lo.max(phase - FRAC_PI_2);
            hi = hi.min(phase + FRAC_PI_2);
        }
        if hi <= lo {
            return;
        }
        let theta = rng.random_range(lo..hi);
        let (sin, cos) = theta.sin_cos();
        for (wi, ui) in w.iter_mut().zip(&u) {
            *wi = cos * *wi + sin * ui;
        }
        normalize(w);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        for x in v.iter_mut() {
            *x /= n;
        }
    }
    n
}

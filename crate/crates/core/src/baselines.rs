//! Comparators that consume one unlabeled point per step.
//!
//! * passive: query every point,
//! * CAL: query unless a committee of `c` draws from the version space
//!   agrees on the label,
//! * QBC: CAL with a committee of two.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::hypothesis::Label;
use crate::learner::LearnerState;

pub const DEFAULT_COMMITTEE: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BaselineKind {
    Passive,
    Cal { committee: usize },
    Qbc,
}

impl BaselineKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            BaselineKind::Cal { committee } if *committee < 2 => {
                Err(invalid(format!("committee size must be at least 2, got {committee}")))
            }
            _ => Ok(()),
        }
    }

    pub fn step(&self, state: &mut LearnerState) -> Result<StepOutcome> {
        match *self {
            BaselineKind::Passive => step_passive(state),
            BaselineKind::Cal { committee } => step_cal(state, committee),
            BaselineKind::Qbc => step_qbc(state),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    pub queried: bool,
    /// Label taken from a unanimous committee instead of the target.
    pub inferred_label: Option<Label>,
}

pub fn step_passive(state: &mut LearnerState) -> Result<StepOutcome> {
    let x = state.draw_point();
    state.query(x)?;
    Ok(StepOutcome {
        queried: true,
        inferred_label: None,
    })
}

/// Inferred labels are reported but never added to the version space.
pub fn step_cal(state: &mut LearnerState, committee: usize) -> Result<StepOutcome> {
    if committee < 2 {
        return Err(invalid(format!("committee size must be at least 2, got {committee}")));
    }
    let x = state.draw_point();
    let first = state.sampler.sample_hypothesis()?.predict(&x)?;
    let mut unanimous = true;
    for _ in 1..committee {
        if state.sampler.sample_hypothesis()?.predict(&x)? != first {
            unanimous = false;
            break;
        }
    }
    if unanimous {
        return Ok(StepOutcome {
            queried: false,
            inferred_label: Some(first),
        });
    }
    state.query(x)?;
    Ok(StepOutcome {
        queried: true,
        inferred_label: None,
    })
}

pub fn step_qbc(state: &mut LearnerState) -> Result<StepOutcome> {
    step_cal(state, 2)
}

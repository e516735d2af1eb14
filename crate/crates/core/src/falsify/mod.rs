//! Falsification of the stealth-until-unsafe property: false data on a
//! piecewise-constant knot grid searched by multi-restart simulated annealing
//! on the robustness value, with replay validation of every counter-example.

mod problem;
mod search;
mod spec;
mod synth;

pub use problem::{decode_control_points, knot_start, Candidate, Channel, FalsificationProblem};
pub use search::{falsify_sa, falsify_sa_with, objective, sample_candidate, FalsifyResult, RestartHistory, SaConfig};
pub use spec::FalsifySpec;
pub use synth::{noisy_success_fraction, replay, synthesize_and_validate, SynthesisOutcome, VALIDATION_STREAM};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FalsifyError {
    #[error("range for output {} is empty", output + 1)]
    EmptyRange { output: usize },
    #[error("invalid problem: {0}")]
    Invalid(String),
    #[error("internal consistency breach: {0}")]
    Internal(String),
}

//! Attacked closed-loop simulation, residue detector, stealth-until-unsafe predicate
//! and its quantitative robustness.

mod attack;
mod engine;
mod property;
mod trace;

pub use attack::{
    apply_load_map, AttackFile, AttackVector, BreakerSchedule, FalseDataSchedule, Provenance, ScheduleFile,
};
pub use engine::{simulate, simulate_records, LoopState, NoiseMode};
pub use property::{
    check_success, check_success_with, detect, first_unsafe, robustness, robustness_with, SignalBasis, StealthWindow,
    SuccessReport,
};
pub use trace::{GenRecord, SimTrace, StepRecord, TRACE_CSV_HEADER};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SimError {
    #[error("{what}: expected length {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid attack: {0}")]
    Invalid(String),
    #[error("schema: {0}")]
    Schema(String),
}

//! Per-generator AGC plants, ZOH discretization, estimator/controller gains,
//! multi-generator grid assembly and detector threshold calibration.

mod calibrate;
mod config;
mod gains;
mod grid;
mod params;
mod plant;

pub use calibrate::calibrate_threshold;
pub use config::{
    load_grid_config, CalibrationConfig, EnvelopeConfig, GainsConfig, GeneratorConfig, GridConfig, LoadMapConfig,
    LqrConfig, NoiseConfig, CALIBRATION_STREAM, DEFAULT_MEASUREMENT_NOISE, DEFAULT_PROCESS_NOISE, DEFAULT_TS,
};
pub use gains::{design_kalman_gain, design_lqr_gain};
pub use grid::{DiscreteLoop, GainSpec, Generator, GridModel, LoadMap, SafetyEnvelope, ScheduledLoad, THRESHOLD_FLOOR};
pub use params::{AgcParams, GovernorSign};
pub use plant::{build_continuous, discretize_zoh, output_matrix, ContinuousStateSpace, Discretized, OUTPUTS, STATES};

use thiserror::Error;

use crate::numerics::NumericsError;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("invalid {field}: {reason}")]
    InvalidParam { field: &'static str, reason: String },
    #[error("D = {d} must equal 1/R with R = {r}")]
    DroopMismatch { d: f64, r: f64 },
    #[error("{field}: expected shape {expected:?}, got {got:?}")]
    Shape {
        field: &'static str,
        expected: (usize, usize),
        got: (usize, usize),
    },
    #[error("estimator A - L*C has spectral radius {radius} >= 1")]
    UnstableEstimator { radius: f64 },
    #[error("discretization produced non-finite matrices")]
    NonFiniteDiscretization,
    #[error("schema: {0}")]
    Schema(String),
    #[error("nominal run unsafe at generator {gen}, step {step}: {reason}")]
    UnsafeNominal { gen: usize, step: usize, reason: String },
    #[error("generator {index}: {source}")]
    Generator { index: usize, source: Box<ModelError> },
    #[error(transparent)]
    Numerics(#[from] NumericsError),
}

impl ModelError {
    fn in_generator(self, index: usize) -> Self {
        ModelError::Generator {
            index,
            source: Box::new(self),
        }
    }
}

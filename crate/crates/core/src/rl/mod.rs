//! Load-alteration attack environment, reward, and a DDPG learner built on
//! small hand-written actor/critic networks.

mod ddpg;
mod env;
mod net;
mod replay;
mod reward;
mod weights;

pub use ddpg::{
    ddpg_train, moving_average, replay_reward, reward_trend, rollout_policy, rollout_with_reward, ObservationScaler,
    Policy, TrainArtifacts, TrainConfig,
};
pub use env::{
    decode_action, env_reset, env_step, record_reward, AttackEnv, EpisodeConfig, Observation, ResetDistribution,
    StepOutcome, ENV_NOISE_STREAM,
};
pub use net::{Adam, ForwardCache, Mlp, OutputActivation};
pub use replay::{ReplayBuffer, Transition};
pub use reward::{reward, reward_with, RewardVariant, RewardWeights};
pub use weights::{decode_weights, encode_weights, WEIGHTS_MAGIC, WEIGHTS_VERSION};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::sim::SignalBasis;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RlError {
    #[error("{what}: expected length {expected}, got {got}")]
    Length {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("configuration: {0}")]
    Config(String),
    #[error("step called after the episode ended")]
    StepAfterDone,
    #[error("non-finite loss at episode {episode}, step {step}: {dump}")]
    NonFiniteLoss { episode: usize, step: usize, dump: String },
    #[error("weights file: {0}")]
    Weights(String),
}

/// Training document: episode shape, learner, and reward settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrainSpec {
    pub episode: EpisodeConfig,
    #[serde(default)]
    pub learner: TrainConfig,
    #[serde(default)]
    pub reward_weights: RewardWeights,
    #[serde(default)]
    pub reward_variant: RewardVariant,
    #[serde(default)]
    pub signal_basis: SignalBasis,
}

impl TrainSpec {
    pub fn parse(document: &str) -> Result<Self, RlError> {
        let spec: Self = serde_json::from_str(document).map_err(|e| RlError::Config(e.to_string()))?;
        spec.episode.validate()?;
        spec.learner.validate()?;
        spec.reward_weights.validate()?;
        Ok(spec)
    }
}

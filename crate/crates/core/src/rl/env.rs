use serde::{Deserialize, Serialize};

use super::reward::{reward_with, RewardVariant, RewardWeights};
use super::RlError;
use crate::model::{GridModel, OUTPUTS, STATES};
use crate::numerics::{rng_stream, RngStream};
use crate::sim::{LoopState, NoiseMode, SignalBasis, StepRecord};

/// Initial-state distribution sampled at each reset.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ResetDistribution {
    /// The grid's configured initial state (zero deviation by default).
    #[default]
    Nominal,
    /// Each state coordinate uniform in `±half_width` around the configured state.
    Uniform { half_width: [f64; STATES] },
}

/// Episode shape for training and rollouts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    pub steps_per_episode: usize,
    pub episodes: usize,
    #[serde(default)]
    pub reset: ResetDistribution,
    /// Simulator steps per action.
    #[serde(default = "one")]
    pub action_repeat: usize,
    #[serde(default = "noise_off")]
    pub noise: NoiseMode,
}

fn one() -> usize {
    1
}

fn noise_off() -> NoiseMode {
    NoiseMode::Off
}

impl EpisodeConfig {
    pub fn new(steps_per_episode: usize, episodes: usize) -> Self {
        Self {
            steps_per_episode,
            episodes,
            reset: ResetDistribution::Nominal,
            action_repeat: 1,
            noise: NoiseMode::Off,
        }
    }

    pub fn validate(&self) -> Result<(), RlError> {
        if self.steps_per_episode == 0 || self.episodes == 0 || self.action_repeat == 0 {
            return Err(RlError::Config(
                "steps_per_episode, episodes and action_repeat must be >= 1".into(),
            ));
        }
        if let ResetDistribution::Uniform { half_width } = &self.reset {
            if half_width.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
                return Err(RlError::Config("reset half widths must be finite and >= 0".into()));
            }
        }
        Ok(())
    }
}

/// Flattened `[f₁..fₙ, r₁..rₙ, Pe₁..Peₙ, act₁..actₘ]`.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub values: Vec<f64>,
    n: usize,
}

impl Observation {
    fn build(record: &StepRecord, basis: SignalBasis, prev_action: &[f64]) -> Self {
        let n = record.gens.len();
        let mut values = Vec::with_capacity(3 * n + prev_action.len());
        values.extend(record.gens.iter().map(|g| g.frequency(basis)));
        values.extend(record.gens.iter().map(|g| g.r_inf));
        values.extend(record.gens.iter().map(|g| g.pe));
        values.extend_from_slice(prev_action);
        Self { values, n }
    }

    pub fn frequencies(&self) -> &[f64] {
        &self.values[..self.n]
    }

    pub fn residues(&self) -> &[f64] {
        &self.values[self.n..2 * self.n]
    }

    pub fn powers(&self) -> &[f64] {
        &self.values[2 * self.n..3 * self.n]
    }

    pub fn prev_action(&self) -> &[f64] {
        &self.values[3 * self.n..]
    }
}

/// Breaker command: closed (1) iff the action value is strictly positive.
pub fn decode_action(action: &[f64]) -> Vec<u8> {
    action.iter().map(|a| u8::from(*a > 0.0)).collect()
}

/// Result of [`AttackEnv::step`].
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub obs: Observation,
    pub reward: f64,
    /// Episode over (time limit or blow-up).
    pub done: bool,
    /// Ended by non-finite state rather than the time limit.
    pub terminal: bool,
}

/// Load-alteration environment: actions toggle breakers, false data is zero.
#[derive(Clone, Debug)]
pub struct AttackEnv {
    grid: GridModel,
    config: EpisodeConfig,
    weights: RewardWeights,
    variant: RewardVariant,
    basis: SignalBasis,
    state: Option<LoopState>,
    noise_rng: RngStream,
    prev_action: Vec<f64>,
    steps: usize,
    done: bool,
    init: Vec<[f64; STATES]>,
    executed: Vec<Vec<u8>>,
}

/// Stream id for per-episode noise draws.
pub const ENV_NOISE_STREAM: u64 = 0xE4;

impl AttackEnv {
    pub fn new(grid: GridModel, config: EpisodeConfig, weights: RewardWeights) -> Result<Self, RlError> {
        config.validate()?;
        weights.validate()?;
        let m = grid.m();
        let init = grid.initial_state.clone();
        Ok(Self {
            grid,
            config,
            weights,
            variant: RewardVariant::SumProduct,
            basis: SignalBasis::Measured,
            state: None,
            noise_rng: rng_stream(0, ENV_NOISE_STREAM),
            prev_action: vec![0.0; m],
            steps: 0,
            done: true,
            init,
            executed: Vec::new(),
        })
    }

    pub fn with_variant(mut self, variant: RewardVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_signal_basis(mut self, basis: SignalBasis) -> Self {
        self.basis = basis;
        self
    }

    pub fn grid(&self) -> &GridModel {
        &self.grid
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn weights(&self) -> &RewardWeights {
        &self.weights
    }

    pub fn variant(&self) -> RewardVariant {
        self.variant
    }

    pub fn signal_basis(&self) -> SignalBasis {
        self.basis
    }

    pub fn obs_dim(&self) -> usize {
        3 * self.grid.n() + self.grid.m()
    }

    pub fn action_dim(&self) -> usize {
        self.grid.m()
    }

    /// Initial state of the current episode.
    pub fn episode_init(&self) -> &[[f64; STATES]] {
        &self.init
    }

    /// Breaker rows applied so far this episode, one per simulator step.
    pub fn executed_schedule(&self) -> &[Vec<u8>] {
        &self.executed
    }

    pub fn true_state(&self, gen: usize) -> Option<[f64; STATES]> {
        self.state.as_ref().map(|s| s.true_state(gen))
    }

    /// Samples the initial state and returns the first observation with a zero
    /// previous action.
    pub fn reset(&mut self, rng: &mut RngStream) -> Observation {
        let base = self.grid.initial_state.clone();
        self.init = match &self.config.reset {
            ResetDistribution::Nominal => base,
            ResetDistribution::Uniform { half_width } => base
                .iter()
                .map(|x| std::array::from_fn(|s| x[s] + rng.uniform_in(-half_width[s], half_width[s])))
                .collect(),
        };
        self.noise_rng = rng_stream(rng.next_u64(), ENV_NOISE_STREAM);
        let (state, first) = LoopState::start(&self.grid, &self.init, self.config.noise);
        self.state = Some(state);
        self.prev_action = vec![0.0; self.grid.m()];
        self.steps = 0;
        self.done = false;
        self.executed.clear();
        Observation::build(&first, self.basis, &self.prev_action)
    }

    /// Applies the decoded breaker command for `action_repeat` simulator steps.
    pub fn step(&mut self, action: &[f64]) -> Result<StepOutcome, RlError> {
        if self.done {
            return Err(RlError::StepAfterDone);
        }
        if action.len() != self.grid.m() {
            return Err(RlError::Length {
                what: "action",
                expected: self.grid.m(),
                got: action.len(),
            });
        }
        let action: Vec<f64> = action
            .iter()
            .map(|a| if a.is_nan() { 0.0 } else { a.clamp(-1.0, 1.0) })
            .collect();
        let breakers = decode_action(&action);
        let state = self.state.as_mut().expect("reset before step");
        let zero = |_: usize| [0.0; OUTPUTS];
        let mut total = 0.0;
        let mut last = None;
        let mut terminal = false;
        for _ in 0..self.config.action_repeat {
            match state.step(&self.grid, &breakers, &zero, &mut self.noise_rng) {
                Some(rec) => {
                    total += record_reward(&rec, &self.grid, &self.weights, self.variant, self.basis);
                    self.executed.push(breakers.clone());
                    last = Some(rec);
                }
                None => {
                    terminal = true;
                    break;
                }
            }
        }
        self.steps += 1;
        self.prev_action = action;
        let done = terminal || self.steps >= self.config.steps_per_episode;
        self.done = done;
        let obs = match &last {
            Some(rec) => Observation::build(rec, self.basis, &self.prev_action),
            None => {
                let n = self.grid.n();
                let mut values = vec![0.0; 3 * n];
                values[..n].fill(self.grid.generators[0].params.nominal_frequency_hz);
                values.extend_from_slice(&self.prev_action);
                Observation { values, n }
            }
        };
        Ok(StepOutcome {
            obs,
            reward: total,
            done,
            terminal,
        })
    }
}

/// Reward of one simulator step record.
pub fn record_reward(
    rec: &StepRecord,
    grid: &GridModel,
    weights: &RewardWeights,
    variant: RewardVariant,
    basis: SignalBasis,
) -> f64 {
    let f: Vec<f64> = rec.gens.iter().map(|g| g.frequency(basis)).collect();
    let r: Vec<f64> = rec.gens.iter().map(|g| g.r_inf).collect();
    let pe: Vec<f64> = rec.gens.iter().map(|g| g.pe).collect();
    reward_with(&f, &r, &pe, weights, &grid.envelope, &grid.thresholds, variant).expect("record lengths match grid")
}

/// Free-function form of [`AttackEnv::reset`].
pub fn env_reset(env: &mut AttackEnv, rng: &mut RngStream) -> Observation {
    env.reset(rng)
}

/// Free-function form of [`AttackEnv::step`].
pub fn env_step(env: &mut AttackEnv, action: &[f64]) -> Result<StepOutcome, RlError> {
    env.step(action)
}

use serde::{Deserialize, Serialize};

use super::env::{record_reward, AttackEnv, Observation};
use super::net::{Adam, Mlp, OutputActivation};
use super::replay::{ReplayBuffer, Transition};
use super::RlError;
use crate::model::{GridModel, STATES};
use crate::numerics::RngStream;
use crate::sim::{simulate_records, AttackVector, BreakerSchedule, NoiseMode};

/// Learner hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TrainConfig {
    pub hidden: Vec<usize>,
    pub gamma: f64,
    pub tau: f64,
    pub actor_lr: f64,
    pub critic_lr: f64,
    pub batch_size: usize,
    pub buffer_capacity: usize,
    pub exploration_sigma: f64,
    pub exploration_decay: f64,
    /// Transitions collected before the first update.
    pub warmup_steps: usize,
    pub updates_per_step: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            hidden: vec![64, 64],
            gamma: 0.99,
            tau: 0.005,
            actor_lr: 1e-4,
            critic_lr: 1e-3,
            batch_size: 64,
            buffer_capacity: 100_000,
            exploration_sigma: 0.2,
            exploration_decay: 0.995,
            warmup_steps: 64,
            updates_per_step: 1,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<(), RlError> {
        let bad = |msg: &str| Err(RlError::Config(msg.to_string()));
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer sizes must be non-empty and positive");
        }
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.tau > 0.0 && self.tau <= 1.0) {
            return bad("tau must lie in (0, 1]");
        }
        if !(self.actor_lr > 0.0 && self.critic_lr > 0.0) {
            return bad("learning rates must be > 0");
        }
        if self.batch_size == 0 || self.buffer_capacity < self.batch_size {
            return bad("need 1 <= batch_size <= buffer_capacity");
        }
        if !(self.exploration_sigma >= 0.0 && self.exploration_decay > 0.0 && self.exploration_decay <= 1.0) {
            return bad("exploration sigma must be >= 0 and decay in (0, 1]");
        }
        Ok(())
    }
}

/// Maps raw observations to network features of order one.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservationScaler {
    n: usize,
    f_center: f64,
    f_half: f64,
    thresholds: Vec<f64>,
    pe_center: f64,
    pe_half: f64,
}

const FEATURE_CLIP: f64 = 10.0;

impl ObservationScaler {
    pub fn new(grid: &GridModel) -> Self {
        let e = &grid.envelope;
        Self {
            n: grid.n(),
            f_center: 0.5 * (e.f_hi + e.f_lo),
            f_half: 0.5 * (e.f_hi - e.f_lo),
            thresholds: grid.thresholds.clone(),
            pe_center: 0.5 * (e.pe_hi + e.pe_lo),
            pe_half: 0.5 * (e.pe_hi - e.pe_lo),
        }
    }

    pub fn scale(&self, obs: &Observation) -> Vec<f64> {
        let n = self.n;
        obs.values
            .iter()
            .enumerate()
            .map(|(j, v)| {
                let z = if j < n {
                    (v - self.f_center) / self.f_half
                } else if j < 2 * n {
                    v / self.thresholds[j - n]
                } else if j < 3 * n {
                    (v - self.pe_center) / self.pe_half
                } else {
                    *v
                };
                z.clamp(-FEATURE_CLIP, FEATURE_CLIP)
            })
            .collect()
    }
}

/// Actor network paired with its observation scaling.
#[derive(Clone, Debug, PartialEq)]
pub struct Policy {
    pub actor: Mlp,
    pub scaler: ObservationScaler,
}

impl Policy {
    pub fn act(&self, obs: &Observation) -> Vec<f64> {
        self.actor.forward(&self.scaler.scale(obs))
    }
}

/// Outputs of a training run.
#[derive(Clone, Debug)]
pub struct TrainArtifacts {
    pub actor: Mlp,
    pub critic: Mlp,
    pub policy: Policy,
    /// Cumulative reward per episode.
    pub reward_curve: Vec<f64>,
    pub best_episode: usize,
    pub best_reward: f64,
    /// Breaker rows executed during the best episode.
    pub best_schedule: BreakerSchedule,
    pub best_init: Vec<[f64; STATES]>,
    /// Noise-free rollout of the final actor.
    pub greedy_schedule: BreakerSchedule,
    pub greedy_reward: f64,
    pub seed: u64,
}

impl TrainArtifacts {
    /// The better of the best explored episode and the final greedy rollout.
    pub fn best_rollout(&self) -> (&BreakerSchedule, f64) {
        if self.greedy_reward > self.best_reward {
            (&self.greedy_schedule, self.greedy_reward)
        } else {
            (&self.best_schedule, self.best_reward)
        }
    }
}

fn concat(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut v = Vec::with_capacity(a.len() + b.len());
    v.extend_from_slice(a);
    v.extend_from_slice(b);
    v
}

/// Actor-critic learner state.
struct Learner {
    actor: Mlp,
    critic: Mlp,
    actor_target: Mlp,
    critic_target: Mlp,
    actor_opt: Adam,
    critic_opt: Adam,
    obs_dim: usize,
}

impl Learner {
    fn new(obs_dim: usize, act_dim: usize, cfg: &TrainConfig, rng: &mut RngStream) -> Self {
        let mut actor_sizes = vec![obs_dim];
        actor_sizes.extend(&cfg.hidden);
        actor_sizes.push(act_dim);
        let mut critic_sizes = vec![obs_dim + act_dim];
        critic_sizes.extend(&cfg.hidden);
        critic_sizes.push(1);
        let actor = Mlp::new(&actor_sizes, OutputActivation::Tanh, rng);
        let critic = Mlp::new(&critic_sizes, OutputActivation::Identity, rng);
        Self {
            actor_target: actor.clone(),
            critic_target: critic.clone(),
            actor_opt: Adam::new(actor.num_params(), cfg.actor_lr),
            critic_opt: Adam::new(critic.num_params(), cfg.critic_lr),
            actor,
            critic,
            obs_dim,
        }
    }

    /// One critic and one actor step on a minibatch; returns the critic loss.
    fn update(&mut self, buffer: &ReplayBuffer, cfg: &TrainConfig, rng: &mut RngStream) -> f64 {
        let idx = buffer.sample_indices(cfg.batch_size, rng);
        let scale = 1.0 / idx.len() as f64;

        let mut critic_grads = vec![0.0; self.critic.num_params()];
        let mut loss = 0.0;
        for &i in &idx {
            let t = buffer.get(i);
            let next_action = self.actor_target.forward(&t.next_obs);
            let next_q = self.critic_target.forward(&concat(&t.next_obs, &next_action))[0];
            let target = t.reward + if t.done { 0.0 } else { cfg.gamma * next_q };
            let cache = self.critic.forward_cached(&concat(&t.obs, &t.action));
            let err = cache.output()[0] - target;
            loss += err * err * scale;
            self.critic
                .backward(&cache, &[2.0 * err * scale], Some(&mut critic_grads));
        }
        self.critic_opt.step(&mut self.critic, &critic_grads);

        let mut actor_grads = vec![0.0; self.actor.num_params()];
        for &i in &idx {
            let t = buffer.get(i);
            let a_cache = self.actor.forward_cached(&t.obs);
            let c_cache = self.critic.forward_cached(&concat(&t.obs, a_cache.output()));
            let dq = self.critic.backward(&c_cache, &[1.0], None);
            let grad_a: Vec<f64> = dq[self.obs_dim..].iter().map(|g| -g * scale).collect();
            self.actor.backward(&a_cache, &grad_a, Some(&mut actor_grads));
        }
        self.actor_opt.step(&mut self.actor, &actor_grads);

        self.actor_target.soft_update(&self.actor, cfg.tau);
        self.critic_target.soft_update(&self.critic, cfg.tau);
        loss
    }
}

/// Episode index, reward, executed breaker rows and initial state.
type BestEpisode = (usize, f64, Vec<Vec<u8>>, Vec<[f64; STATES]>);

/// Trains a DDPG attacker on `env`. Deterministic for a given `rng` state.
pub fn ddpg_train(env: &mut AttackEnv, cfg: &TrainConfig, rng: &mut RngStream) -> Result<TrainArtifacts, RlError> {
    cfg.validate()?;
    let seed = rng.seed();
    let obs_dim = env.obs_dim();
    let act_dim = env.action_dim();
    let scaler = ObservationScaler::new(env.grid());
    let mut learner = Learner::new(obs_dim, act_dim, cfg, rng);
    let mut buffer = ReplayBuffer::new(cfg.buffer_capacity);
    let episodes = env.config().episodes;

    let mut curve = Vec::with_capacity(episodes);
    let mut best: Option<BestEpisode> = None;
    let mut sigma = cfg.exploration_sigma;
    for episode in 0..episodes {
        let mut obs = env.reset(rng);
        let mut feats = scaler.scale(&obs);
        let mut total = 0.0;
        for step in 0..env.config().steps_per_episode {
            let greedy = learner.actor.forward(&feats);
            let action: Vec<f64> = greedy
                .iter()
                .map(|a| (a + sigma * rng.normal()).clamp(-1.0, 1.0))
                .collect();
            let out = env.step(&action)?;
            let next_feats = scaler.scale(&out.obs);
            total += out.reward;
            buffer.push(Transition {
                obs: feats,
                action,
                reward: out.reward,
                next_obs: next_feats.clone(),
                done: out.terminal,
            });
            if buffer.len() >= cfg.warmup_steps.max(cfg.batch_size) {
                for _ in 0..cfg.updates_per_step {
                    let loss = learner.update(&buffer, cfg, rng);
                    if !loss.is_finite() || !learner.actor.is_finite() || !learner.critic.is_finite() {
                        return Err(RlError::NonFiniteLoss {
                            episode,
                            step,
                            dump: format!(
                                "critic loss {loss}; observation {:?}; buffer {} transitions",
                                out.obs.values,
                                buffer.len()
                            ),
                        });
                    }
                }
            }
            feats = next_feats;
            obs = out.obs;
            if out.done {
                break;
            }
        }
        let _ = obs;
        curve.push(total);
        if best.as_ref().is_none_or(|b| total > b.1) {
            best = Some((
                episode,
                total,
                env.executed_schedule().to_vec(),
                env.episode_init().to_vec(),
            ));
        }
        sigma *= cfg.exploration_decay;
    }

    let policy = Policy {
        actor: learner.actor.clone(),
        scaler,
    };
    let (greedy_schedule, greedy_reward) = rollout_with_reward(&policy, env, env.config().steps_per_episode, rng)?;
    let (best_episode, best_reward, best_rows, best_init) = best.expect("at least one episode");
    let best_schedule = BreakerSchedule::new(best_rows).map_err(|e| RlError::Config(e.to_string()))?;
    Ok(TrainArtifacts {
        actor: learner.actor,
        critic: learner.critic,
        policy,
        reward_curve: curve,
        best_episode,
        best_reward,
        best_schedule,
        best_init,
        greedy_schedule,
        greedy_reward,
        seed,
    })
}

/// Noise-free rollout of `steps` actions; returns the executed breaker schedule.
pub fn rollout_policy(
    policy: &Policy,
    env: &AttackEnv,
    steps: usize,
    rng: &mut RngStream,
) -> Result<BreakerSchedule, RlError> {
    Ok(rollout_with_reward(policy, env, steps, rng)?.0)
}

/// [`rollout_policy`] plus the cumulative reward of the rollout.
pub fn rollout_with_reward(
    policy: &Policy,
    env: &AttackEnv,
    steps: usize,
    rng: &mut RngStream,
) -> Result<(BreakerSchedule, f64), RlError> {
    if steps == 0 {
        return Err(RlError::Config("rollout needs at least one step".into()));
    }
    let mut config = env.config().clone();
    config.steps_per_episode = steps;
    let mut local = AttackEnv::new(env.grid().clone(), config, *env.weights())?
        .with_variant(env.variant())
        .with_signal_basis(env.signal_basis());
    let mut obs = local.reset(rng);
    let mut total = 0.0;
    for _ in 0..steps {
        let out = local.step(&policy.act(&obs))?;
        total += out.reward;
        obs = out.obs;
        if out.done {
            break;
        }
    }
    let mut rows = local.executed_schedule().to_vec();
    let want = steps * local.config().action_repeat;
    while rows.len() < want {
        rows.push(env.grid().load_map.b_nom.clone());
    }
    let schedule = BreakerSchedule::new(rows).map_err(|e| RlError::Config(e.to_string()))?;
    Ok((schedule, total))
}

/// Cumulative reward of a breaker schedule replayed noise-free through the simulator.
pub fn replay_reward(env: &AttackEnv, schedule: &BreakerSchedule, init: &[[f64; STATES]]) -> f64 {
    let grid = env.grid();
    let attack = AttackVector::load_only(grid, schedule.clone());
    let mut rng = crate::numerics::rng_stream(0, 0);
    let trace = simulate_records(grid, Some(&attack), schedule.d(), init, NoiseMode::Off, &mut rng);
    trace.records[1..]
        .iter()
        .map(|rec| record_reward(rec, grid, env.weights(), env.variant(), env.signal_basis()))
        .sum()
}

/// Mean of the first and last `window` entries of a reward curve.
pub fn reward_trend(curve: &[f64], window: usize) -> Option<(f64, f64)> {
    if window == 0 || curve.len() < window {
        return None;
    }
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    Some((mean(&curve[..window]), mean(&curve[curve.len() - window..])))
}

/// Trailing moving average with the given window (shorter at the start).
pub fn moving_average(curve: &[f64], window: usize) -> Vec<f64> {
    let window = window.max(1);
    (0..curve.len())
        .map(|i| {
            let lo = (i + 1).saturating_sub(window);
            curve[lo..=i].iter().sum::<f64>() / (i + 1 - lo) as f64
        })
        .collect()
}

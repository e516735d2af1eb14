use serde::{Deserialize, Serialize};

use super::problem::{decode_control_points, Candidate, FalsificationProblem};
use super::FalsifyError;
use crate::numerics::{rng_stream, RngStream};
use crate::sim::{robustness_with, simulate_records, AttackVector, FalseDataSchedule, NoiseMode};

/// Simulated-annealing settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SaConfig {
    /// Total objective evaluations across restarts.
    pub budget: usize,
    pub restarts: usize,
    /// Initial proposal standard deviation as a fraction of box width.
    pub sigma_frac: f64,
    /// Lower bound for the proposal fraction.
    pub sigma_floor_frac: f64,
    /// Consecutive rejections before the proposal width is halved.
    pub halve_after: usize,
    /// Proposals per temperature step.
    pub acceptance_window: usize,
    pub cooling: f64,
    /// Worker threads for restarts (results do not depend on it).
    pub threads: usize,
}

impl Default for SaConfig {
    fn default() -> Self {
        Self {
            budget: 20_000,
            restarts: 4,
            sigma_frac: 0.1,
            sigma_floor_frac: 0.005,
            halve_after: 20,
            acceptance_window: 10,
            cooling: 0.98,
            threads: 1,
        }
    }
}

impl SaConfig {
    pub fn validate(&self) -> Result<(), FalsifyError> {
        let bad = |msg: &str| Err(FalsifyError::Invalid(msg.to_string()));
        if self.budget == 0 || self.restarts == 0 {
            return bad("budget and restarts must be >= 1");
        }
        if !(self.sigma_frac > 0.0 && self.sigma_floor_frac > 0.0 && self.sigma_floor_frac <= self.sigma_frac) {
            return bad("need 0 < sigma_floor_frac <= sigma_frac");
        }
        if !(self.cooling > 0.0 && self.cooling <= 1.0) {
            return bad("cooling must lie in (0, 1]");
        }
        if self.halve_after == 0 || self.acceptance_window == 0 {
            return bad("halve_after and acceptance_window must be >= 1");
        }
        Ok(())
    }
}

/// Search record of one restart.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RestartHistory {
    pub restart: usize,
    pub evaluations: usize,
    pub initial_rho: f64,
    pub best_rho: f64,
    /// `(evaluation index within the restart, best ρ so far)` at each improvement.
    pub improvements: Vec<(usize, f64)>,
}

/// Best candidate found and the search history.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalsifyResult {
    pub best: Candidate,
    pub schedule: FalseDataSchedule,
    pub rho: f64,
    pub evaluations: usize,
    pub success: bool,
    pub best_restart: usize,
    pub history: Vec<RestartHistory>,
}

/// Robustness of the noise-free trace under the candidate's false data;
/// `+∞` when the simulation blows up.
pub fn objective(problem: &FalsificationProblem, candidate: &Candidate) -> f64 {
    let schedule = decode_control_points(candidate, problem.d, &problem.mask);
    let attack = AttackVector::new(problem.laa.clone(), schedule).expect("shared d");
    let mut rng = rng_stream(0, 0);
    let trace = simulate_records(
        &problem.grid,
        Some(&attack),
        problem.horizon,
        &problem.init,
        NoiseMode::Off,
        &mut rng,
    );
    if trace.blow_up.is_some() {
        return f64::INFINITY;
    }
    robustness_with(
        &trace,
        &problem.grid.envelope,
        &problem.grid.thresholds,
        problem.signal_basis,
        problem.stealth_window,
    )
}

/// Uniform draw of every knot inside the box (snapped when quantized).
pub fn sample_candidate(problem: &FalsificationProblem, rng: &mut RngStream) -> Candidate {
    let channels = problem.channels();
    let knots = channels
        .iter()
        .map(|c| {
            let (lo, hi) = problem.range[c.output];
            (0..problem.control_points)
                .map(|_| problem.project(c.output, rng.uniform_in(lo, hi)))
                .collect()
        })
        .collect();
    Candidate { channels, knots }
}

struct RestartOutcome {
    best: Candidate,
    rho: f64,
    history: RestartHistory,
}

fn run_restart(
    problem: &FalsificationProblem,
    cfg: &SaConfig,
    restart: usize,
    budget: usize,
    rng: &mut RngStream,
) -> RestartOutcome {
    let mut current = sample_candidate(problem, rng);
    let mut current_rho = objective(problem, &current);
    let mut best = current.clone();
    let mut best_rho = current_rho;
    let mut evaluations = 1;
    let mut improvements = vec![(0, best_rho)];
    let initial_rho = current_rho;

    let mut temperature = current_rho.abs();
    if !(temperature.is_finite() && temperature > 0.0) {
        temperature = 1.0;
    }
    let mut sigma = cfg.sigma_frac;
    let mut rejections = 0;
    while evaluations < budget && best_rho >= 0.0 {
        let mut proposal = current.clone();
        for (c, knots) in proposal.channels.iter().zip(&mut proposal.knots) {
            let (lo, hi) = problem.range[c.output];
            let width = hi - lo;
            for v in knots.iter_mut() {
                *v = problem.project(c.output, *v + sigma * width * rng.normal());
            }
        }
        let rho = objective(problem, &proposal);
        evaluations += 1;
        let delta = rho - current_rho;
        let accept = delta <= 0.0 || rng.uniform() < (-delta / temperature).exp();
        if rho < best_rho {
            best_rho = rho;
            best = proposal.clone();
            improvements.push((evaluations - 1, best_rho));
        }
        if accept {
            current = proposal;
            current_rho = rho;
            rejections = 0;
        } else {
            rejections += 1;
            if rejections >= cfg.halve_after {
                sigma = (sigma * 0.5).max(cfg.sigma_floor_frac);
                rejections = 0;
            }
        }
        if evaluations % cfg.acceptance_window.max(1) == 0 {
            temperature *= cfg.cooling;
        }
    }
    RestartOutcome {
        best,
        rho: best_rho,
        history: RestartHistory {
            restart,
            evaluations,
            initial_rho,
            best_rho,
            improvements,
        },
    }
}

/// [`falsify_sa_with`] using default annealing settings.
pub fn falsify_sa(
    problem: &FalsificationProblem,
    budget: usize,
    restarts: usize,
    rng: &mut RngStream,
) -> FalsifyResult {
    let cfg = SaConfig {
        budget,
        restarts,
        ..SaConfig::default()
    };
    falsify_sa_with(problem, &cfg, rng)
}

/// Multi-restart simulated annealing on the robustness objective.
///
/// The budget is split evenly across restarts; each restart draws from its own
/// stream. Restarts are reduced in index order and the search stops after the
/// first restart that reaches `ρ < 0`, so the result is independent of `threads`.
pub fn falsify_sa_with(problem: &FalsificationProblem, cfg: &SaConfig, rng: &mut RngStream) -> FalsifyResult {
    let restarts = cfg.restarts.max(1);
    let budget = cfg.budget.max(1);
    let base = rng.next_u64();
    let share = |i: usize| budget / restarts + usize::from(i < budget % restarts);
    let active: Vec<usize> = (0..restarts).filter(|i| share(*i) > 0).collect();
    let threads = cfg.threads.max(1);

    let mut outcomes: Vec<RestartOutcome> = Vec::new();
    for wave in active.chunks(threads) {
        let mut results: Vec<(usize, RestartOutcome)> = if wave.len() == 1 {
            let i = wave[0];
            let mut r = rng_stream(base, i as u64);
            vec![(i, run_restart(problem, cfg, i, share(i), &mut r))]
        } else {
            std::thread::scope(|scope| {
                let handles: Vec<_> = wave
                    .iter()
                    .map(|&i| {
                        scope.spawn(move || {
                            let mut r = rng_stream(base, i as u64);
                            (i, run_restart(problem, cfg, i, share(i), &mut r))
                        })
                    })
                    .collect();
                handles
                    .into_iter()
                    .map(|h| h.join().expect("restart thread panicked"))
                    .collect()
            })
        };
        results.sort_by_key(|(i, _)| *i);
        let mut stop = false;
        for (_, outcome) in results {
            if stop {
                break;
            }
            stop = outcome.rho < 0.0;
            outcomes.push(outcome);
        }
        if stop {
            break;
        }
    }

    let mut best_idx = 0;
    for (i, o) in outcomes.iter().enumerate() {
        if o.rho < outcomes[best_idx].rho {
            best_idx = i;
        }
    }
    let evaluations = outcomes.iter().map(|o| o.history.evaluations).sum();
    let best = outcomes[best_idx].best.clone();
    let rho = outcomes[best_idx].rho;
    FalsifyResult {
        schedule: decode_control_points(&best, problem.d, &problem.mask),
        best,
        rho,
        evaluations,
        success: rho < 0.0,
        best_restart: outcomes[best_idx].history.restart,
        history: outcomes.into_iter().map(|o| o.history).collect(),
    }
}

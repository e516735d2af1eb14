use serde::Serialize;

use super::problem::FalsificationProblem;
use super::search::{falsify_sa_with, FalsifyResult, SaConfig};
use super::FalsifyError;
use crate::numerics::{rng_stream, RngStream};
use crate::sim::{check_success_with, robustness_with, simulate, AttackVector, NoiseMode, SimTrace, SuccessReport};

/// Stream id of the noisy validation runs.
pub const VALIDATION_STREAM: u64 = 0x5EED;

/// Relative tolerance between the search's ρ and the re-simulated ρ.
const RHO_AGREEMENT: f64 = 1e-9;

/// Outcome of a search followed by independent re-simulation.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SynthesisOutcome {
    /// `None` when the range box is empty and no search ran.
    pub search: Option<FalsifyResult>,
    /// Validated counter-example, if one was found.
    pub attack: Option<AttackVector>,
    pub report: Option<SuccessReport>,
}

impl SynthesisOutcome {
    pub fn found(&self) -> bool {
        self.attack.is_some()
    }
}

/// Noise-free trace of the combined attack over the problem horizon.
pub fn replay(problem: &FalsificationProblem, attack: &AttackVector) -> SimTrace {
    let mut rng = rng_stream(0, 0);
    simulate(
        &problem.grid,
        Some(attack),
        problem.horizon,
        &problem.init,
        NoiseMode::Off,
        &mut rng,
    )
}

/// Runs the search and re-simulates its best candidate. A counter-example whose
/// replay disagrees with the search is reported as an internal error.
pub fn synthesize_and_validate(
    problem: &FalsificationProblem,
    cfg: &SaConfig,
    rng: &mut RngStream,
) -> Result<SynthesisOutcome, FalsifyError> {
    match problem.validate() {
        Err(FalsifyError::EmptyRange { .. }) => {
            return Ok(SynthesisOutcome {
                search: None,
                attack: None,
                report: None,
            })
        }
        other => other?,
    }
    let result = falsify_sa_with(problem, cfg, rng);
    if !result.success {
        return Ok(SynthesisOutcome {
            search: Some(result),
            attack: None,
            report: None,
        });
    }
    let attack = AttackVector::new(problem.laa.clone(), result.schedule.clone())
        .map_err(|e| FalsifyError::Internal(e.to_string()))?;
    if !attack.false_data.within(&problem.range) {
        return Err(FalsifyError::Internal("counter-example leaves the range box".into()));
    }
    let trace = replay(problem, &attack);
    let grid = &problem.grid;
    let report = check_success_with(
        &trace,
        &grid.envelope,
        &grid.thresholds,
        problem.signal_basis,
        problem.stealth_window,
    );
    let rho = robustness_with(
        &trace,
        &grid.envelope,
        &grid.thresholds,
        problem.signal_basis,
        problem.stealth_window,
    );
    let agree = (rho - result.rho).abs() <= RHO_AGREEMENT * result.rho.abs().max(1.0);
    if trace.blow_up.is_some() || !report.success || !agree {
        return Err(FalsifyError::Internal(format!(
            "replay disagrees with search: search ρ = {}, replay ρ = {rho}, success = {}",
            result.rho, report.success
        )));
    }
    Ok(SynthesisOutcome {
        search: Some(result),
        attack: Some(attack),
        report: Some(report),
    })
}

/// Fraction of `runs` noisy replays (seeds `base_seed..base_seed + runs`) in which
/// the attack still succeeds.
pub fn noisy_success_fraction(
    problem: &FalsificationProblem,
    attack: &AttackVector,
    runs: usize,
    base_seed: u64,
) -> f64 {
    if runs == 0 {
        return 0.0;
    }
    let grid = &problem.grid;
    let wins = (0..runs as u64)
        .filter(|i| {
            let mut rng = rng_stream(base_seed + i, VALIDATION_STREAM);
            let trace = simulate(
                grid,
                Some(attack),
                problem.horizon,
                &problem.init,
                NoiseMode::On,
                &mut rng,
            );
            trace.blow_up.is_none()
                && check_success_with(
                    &trace,
                    &grid.envelope,
                    &grid.thresholds,
                    problem.signal_basis,
                    problem.stealth_window,
                )
                .success
        })
        .count();
    wins as f64 / runs as f64
}

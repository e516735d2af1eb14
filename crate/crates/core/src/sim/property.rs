use serde::{Deserialize, Serialize};

use super::SimTrace;
use crate::model::SafetyEnvelope;

/// Which frequency signal decides safety.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignalBasis {
    /// The measured, possibly falsified, output `ỹ`.
    #[default]
    #[serde(rename = "measured")]
    Measured,
    /// The true plant state.
    #[serde(rename = "true")]
    TrueState,
}

impl SignalBasis {
    pub fn other(self) -> Self {
        match self {
            SignalBasis::Measured => SignalBasis::TrueState,
            SignalBasis::TrueState => SignalBasis::Measured,
        }
    }
}

/// Steps over which the residue must stay below threshold.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StealthWindow {
    /// Every step strictly before the first unsafe step.
    #[default]
    UntilUnsafe,
    /// Every step of the trace.
    WholeTrace,
}

/// First step at which any generator's residue ∞-norm strictly exceeds its threshold.
pub fn detect(trace: &SimTrace, thresholds: &[f64]) -> Option<usize> {
    trace.records.iter().find_map(|rec| {
        rec.gens
            .iter()
            .zip(thresholds)
            .any(|(g, th)| g.r_inf > *th)
            .then_some(rec.k)
    })
}

/// First step at which any generator's frequency leaves the safe band.
pub fn first_unsafe(trace: &SimTrace, envelope: &SafetyEnvelope, basis: SignalBasis) -> Option<usize> {
    trace.records.iter().find_map(|rec| {
        rec.gens
            .iter()
            .any(|g| !envelope.frequency_safe(g.frequency(basis)))
            .then_some(rec.k)
    })
}

/// Outcome of the stealth-until-unsafe predicate on a trace.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuccessReport {
    pub success: bool,
    pub k_prime: Option<usize>,
    pub first_detection: Option<usize>,
    pub stealthy_until_unsafe: bool,
    pub signal_basis: SignalBasis,
}

/// Success iff some generator leaves the band at `k′` while no generator's residue
/// exceeded its threshold at any step before `k′`.
pub fn check_success(
    trace: &SimTrace,
    envelope: &SafetyEnvelope,
    thresholds: &[f64],
    signal_basis: SignalBasis,
) -> SuccessReport {
    check_success_with(trace, envelope, thresholds, signal_basis, StealthWindow::UntilUnsafe)
}

pub fn check_success_with(
    trace: &SimTrace,
    envelope: &SafetyEnvelope,
    thresholds: &[f64],
    signal_basis: SignalBasis,
    window: StealthWindow,
) -> SuccessReport {
    let k_prime = first_unsafe(trace, envelope, signal_basis);
    let first_detection = detect(trace, thresholds);
    let stealthy_until_unsafe = match (window, k_prime, first_detection) {
        (_, _, None) => true,
        (StealthWindow::UntilUnsafe, Some(kp), Some(det)) => det >= kp,
        (StealthWindow::UntilUnsafe, None, Some(_)) => false,
        (StealthWindow::WholeTrace, _, Some(_)) => false,
    };
    SuccessReport {
        success: k_prime.is_some() && stealthy_until_unsafe,
        k_prime,
        first_detection,
        stealthy_until_unsafe,
        signal_basis,
    }
}

fn min_threshold(thresholds: &[f64]) -> f64 {
    thresholds.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Stealth excess with the boundary `‖r‖∞ = Th` (stealthy) mapped below zero.
fn excess(r_inf: f64, th: f64) -> f64 {
    let e = r_inf - th;
    if e == 0.0 {
        -f64::MIN_POSITIVE
    } else {
        e
    }
}

/// Quantitative semantics of the stealth-until-unsafe property:
/// `ρ = min_{k′} max(s(k′), g(k′))`, with `s` the worst signed frequency margin at `k′`
/// and `g` the worst residue excess over steps before `k′`. `ρ < 0` exactly when
/// [`check_success`] reports success.
pub fn robustness(trace: &SimTrace, envelope: &SafetyEnvelope, thresholds: &[f64], signal_basis: SignalBasis) -> f64 {
    robustness_with(trace, envelope, thresholds, signal_basis, StealthWindow::UntilUnsafe)
}

pub fn robustness_with(
    trace: &SimTrace,
    envelope: &SafetyEnvelope,
    thresholds: &[f64],
    signal_basis: SignalBasis,
    window: StealthWindow,
) -> f64 {
    let floor = -min_threshold(thresholds);
    let step_excess = |k: usize| {
        trace.records[k]
            .gens
            .iter()
            .zip(thresholds)
            .map(|(g, th)| excess(g.r_inf, *th))
            .fold(f64::NEG_INFINITY, f64::max)
    };
    let margin = |k: usize| {
        trace.records[k]
            .gens
            .iter()
            .map(|g| envelope.frequency_margin(g.frequency(signal_basis)))
            .fold(f64::INFINITY, f64::min)
    };
    match window {
        StealthWindow::UntilUnsafe => {
            let mut g = floor;
            let mut rho = f64::INFINITY;
            for k in 0..trace.records.len() {
                rho = rho.min(margin(k).max(g));
                g = g.max(step_excess(k));
            }
            rho
        }
        StealthWindow::WholeTrace => {
            let g = (0..trace.records.len()).map(step_excess).fold(floor, f64::max);
            let s = (0..trace.records.len()).map(margin).fold(f64::INFINITY, f64::min);
            s.max(g)
        }
    }
}

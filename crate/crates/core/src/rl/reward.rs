use serde::{Deserialize, Serialize};

use super::RlError;
use crate::model::SafetyEnvelope;

/// Relative priorities of the power, frequency and stealth terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RewardWeights {
    pub w1: f64,
    pub w2: f64,
    pub w3: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        Self {
            w1: 1.0,
            w2: 1.0,
            w3: 0.25,
        }
    }
}

impl RewardWeights {
    pub fn validate(&self) -> Result<(), RlError> {
        let w = [self.w1, self.w2, self.w3];
        if w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || w.iter().all(|v| *v == 0.0) {
            return Err(RlError::Config(format!(
                "reward weights must be >= 0 with at least one > 0, got {w:?}"
            )));
        }
        Ok(())
    }

    /// Largest per-step reward for `n` generators under `variant`.
    pub fn upper_bound(&self, n: usize, variant: RewardVariant) -> f64 {
        let n = n as f64;
        match variant {
            RewardVariant::SumProduct => self.w1 * n * n + (self.w2 + self.w3) * n,
            RewardVariant::AllProduct => (self.w1 + self.w2) * n * n + self.w3 * n,
        }
    }
}

/// Placement of the sums in the frequency term.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RewardVariant {
    /// `w1·(Σ unsafePe)(Σ stealth) + w2·Σ(unsafeF·stealth) + w3·Σ stealth`.
    #[default]
    SumProduct,
    /// `w1·(Σ unsafePe)(Σ stealth) + w2·(Σ unsafeF)(Σ stealth) + w3·Σ stealth`.
    AllProduct,
}

fn check(p: bool) -> f64 {
    if p {
        1.0
    } else {
        0.0
    }
}

pub fn reward(
    f: &[f64],
    r_inf: &[f64],
    pe: &[f64],
    weights: &RewardWeights,
    envelope: &SafetyEnvelope,
    thresholds: &[f64],
) -> Result<f64, RlError> {
    reward_with(f, r_inf, pe, weights, envelope, thresholds, RewardVariant::SumProduct)
}

pub fn reward_with(
    f: &[f64],
    r_inf: &[f64],
    pe: &[f64],
    weights: &RewardWeights,
    envelope: &SafetyEnvelope,
    thresholds: &[f64],
    variant: RewardVariant,
) -> Result<f64, RlError> {
    let n = f.len();
    for (what, len) in [
        ("r_inf", r_inf.len()),
        ("pe", pe.len()),
        ("thresholds", thresholds.len()),
    ] {
        if len != n {
            return Err(RlError::Length {
                what,
                expected: n,
                got: len,
            });
        }
    }
    let stealth: Vec<f64> = r_inf.iter().zip(thresholds).map(|(r, th)| check(r <= th)).collect();
    let unsafe_f: Vec<f64> = f.iter().map(|v| check(!envelope.frequency_safe(*v))).collect();
    let unsafe_pe: f64 = pe.iter().map(|v| check(!envelope.power_safe(*v))).sum();
    let stealth_sum: f64 = stealth.iter().sum();
    let term1 = weights.w1 * unsafe_pe * stealth_sum;
    let term2 = match variant {
        RewardVariant::SumProduct => weights.w2 * unsafe_f.iter().zip(&stealth).map(|(u, s)| u * s).sum::<f64>(),
        RewardVariant::AllProduct => weights.w2 * unsafe_f.iter().sum::<f64>() * stealth_sum,
    };
    let term3 = weights.w3 * stealth_sum;
    Ok(term1 + term2 + term3)
}

use super::{GridModel, ModelError, THRESHOLD_FLOOR};
use crate::numerics::RngStream;
use crate::sim::{simulate, NoiseMode, SignalBasis};

/// Detector thresholds `Th^i = margin · max_k ‖r^i_k‖∞` from an unattacked noisy run,
/// floored at [`THRESHOLD_FLOOR`].
pub fn calibrate_threshold(
    grid: &GridModel,
    nominal_horizon: usize,
    margin: f64,
    rng: &mut RngStream,
) -> Result<Vec<f64>, ModelError> {
    if !(margin.is_finite() && margin >= 1.0) {
        return Err(ModelError::InvalidParam {
            field: "margin",
            reason: format!("must be >= 1, got {margin}"),
        });
    }
    if nominal_horizon == 0 {
        return Err(ModelError::InvalidParam {
            field: "horizon",
            reason: "must be >= 1".into(),
        });
    }
    let trace = simulate(grid, None, nominal_horizon, &grid.initial_state, NoiseMode::On, rng);
    if let Some(k) = trace.blow_up {
        return Err(ModelError::UnsafeNominal {
            gen: 0,
            step: k,
            reason: "non-finite state".into(),
        });
    }
    let mut peaks = vec![0.0f64; grid.n()];
    for rec in &trace.records {
        for (i, g) in rec.gens.iter().enumerate() {
            let f = g.frequency(SignalBasis::TrueState);
            if !grid.envelope.frequency_safe(f) {
                return Err(ModelError::UnsafeNominal {
                    gen: i,
                    step: rec.k,
                    reason: format!("frequency {f:.4} Hz outside the safety band"),
                });
            }
            peaks[i] = peaks[i].max(g.r_inf);
        }
    }
    Ok(peaks.into_iter().map(|p| (margin * p).max(THRESHOLD_FLOOR)).collect())
}

use serde::{Deserialize, Serialize};

use super::problem::FalsificationProblem;
use super::search::SaConfig;
use super::FalsifyError;
use crate::model::{GridModel, OUTPUTS};
use crate::sim::{BreakerSchedule, SignalBasis, StealthWindow};

/// Falsification document: search box, mask, knot count and annealing settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FalsifySpec {
    /// `[lo, hi]` per output.
    pub range: [[f64; 2]; OUTPUTS],
    /// Per-generator output mask; defaults to the second output of every generator.
    #[serde(default)]
    pub mask: Option<Vec<[u8; OUTPUTS]>>,
    #[serde(default = "default_control_points")]
    pub control_points: usize,
    /// Simulation length; defaults to `d`.
    #[serde(default)]
    pub horizon: Option<usize>,
    #[serde(default)]
    pub quantization: Option<usize>,
    #[serde(default)]
    pub stealth_window: StealthWindow,
    #[serde(default)]
    pub signal_basis: SignalBasis,
    #[serde(default)]
    pub search: SaConfig,
    /// Noisy replays used for the post-hoc success fraction.
    #[serde(default = "default_noise_runs")]
    pub noise_runs: usize,
}

fn default_control_points() -> usize {
    10
}

fn default_noise_runs() -> usize {
    20
}

impl FalsifySpec {
    pub fn parse(document: &str) -> Result<Self, FalsifyError> {
        let spec: Self = serde_json::from_str(document).map_err(|e| FalsifyError::Invalid(e.to_string()))?;
        spec.search.validate()?;
        Ok(spec)
    }

    /// Problem for `laa` on `grid`; the control-point count is capped at `d`.
    pub fn problem(&self, grid: &GridModel, laa: BreakerSchedule) -> Result<FalsificationProblem, FalsifyError> {
        let mask = self.mask.clone().unwrap_or_else(|| vec![[0, 1]; grid.n()]);
        let range = self.range.map(|[lo, hi]| (lo, hi));
        let d = laa.d();
        let mut problem = FalsificationProblem::new(grid.clone(), laa, range, mask, self.control_points.min(d.max(1)));
        problem.horizon = self.horizon.unwrap_or(d);
        problem.quantization = self.quantization;
        problem.stealth_window = self.stealth_window;
        problem.signal_basis = self.signal_basis;
        match problem.validate() {
            Ok(()) | Err(FalsifyError::EmptyRange { .. }) => Ok(problem),
            Err(e) => Err(e),
        }
    }
}

use serde::{Deserialize, Serialize};

use super::FalsifyError;
use crate::model::{GridModel, OUTPUTS, STATES};
use crate::sim::{BreakerSchedule, FalseDataSchedule, SignalBasis, StealthWindow};

/// One falsified measurement channel: generator index and output index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Channel {
    pub gen: usize,
    pub output: usize,
}

/// Search over false data for a fixed load-alteration schedule.
#[derive(Clone, Debug, PartialEq)]
pub struct FalsificationProblem {
    pub grid: GridModel,
    pub laa: BreakerSchedule,
    pub d: usize,
    /// Closed interval per output.
    pub range: [(f64, f64); OUTPUTS],
    /// Per-generator output mask.
    pub mask: Vec<[u8; OUTPUTS]>,
    pub init: Vec<[f64; STATES]>,
    pub control_points: usize,
    pub signal_basis: SignalBasis,
    pub stealth_window: StealthWindow,
    /// Simulation length; at least `d`.
    pub horizon: usize,
    /// Optional number of evenly spaced levels each knot is snapped to.
    pub quantization: Option<usize>,
}

impl FalsificationProblem {
    /// Problem with the grid's initial state, measured basis, stealth-until-unsafe,
    /// horizon `d` and no quantization.
    pub fn new(
        grid: GridModel,
        laa: BreakerSchedule,
        range: [(f64, f64); OUTPUTS],
        mask: Vec<[u8; OUTPUTS]>,
        control_points: usize,
    ) -> Self {
        let d = laa.d();
        let init = grid.initial_state.clone();
        Self {
            grid,
            laa,
            d,
            range,
            mask,
            init,
            control_points,
            signal_basis: SignalBasis::Measured,
            stealth_window: StealthWindow::UntilUnsafe,
            horizon: d,
            quantization: None,
        }
    }

    pub fn validate(&self) -> Result<(), FalsifyError> {
        for (q, (lo, hi)) in self.range.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(FalsifyError::Invalid(format!(
                    "range for output {} must be finite",
                    q + 1
                )));
            }
            if lo > hi {
                return Err(FalsifyError::EmptyRange { output: q });
            }
        }
        if self.d == 0 || self.laa.d() != self.d {
            return Err(FalsifyError::Invalid(format!(
                "LAA schedule length {} must equal d = {} >= 1",
                self.laa.d(),
                self.d
            )));
        }
        if self.laa.m() != self.grid.m() {
            return Err(FalsifyError::Invalid(
                "LAA schedule breaker count differs from grid".into(),
            ));
        }
        if self.control_points == 0 || self.control_points > self.d {
            return Err(FalsifyError::Invalid(format!(
                "control points must lie in 1..={}, got {}",
                self.d, self.control_points
            )));
        }
        if self.mask.len() != self.grid.n() || self.init.len() != self.grid.n() {
            return Err(FalsifyError::Invalid(
                "mask and init need one entry per generator".into(),
            ));
        }
        if self.mask.iter().flatten().any(|b| *b > 1) {
            return Err(FalsifyError::Invalid("mask entries must be 0 or 1".into()));
        }
        if self.channels().is_empty() {
            return Err(FalsifyError::Invalid("mask must select at least one output".into()));
        }
        if self.horizon < self.d {
            return Err(FalsifyError::Invalid("horizon must be >= d".into()));
        }
        if matches!(self.quantization, Some(l) if l < 2) {
            return Err(FalsifyError::Invalid("quantization needs at least 2 levels".into()));
        }
        Ok(())
    }

    /// Attacked channels in generator-major order.
    pub fn channels(&self) -> Vec<Channel> {
        channels_of(&self.mask)
    }

    pub fn dimension(&self) -> usize {
        self.channels().len() * self.control_points
    }

    /// Clamps into the box and snaps to the quantization lattice.
    pub fn project(&self, output: usize, v: f64) -> f64 {
        let (lo, hi) = self.range[output];
        let v = if v.is_nan() { lo } else { v.clamp(lo, hi) };
        match self.quantization {
            Some(levels) if hi > lo => {
                let step = (hi - lo) / (levels - 1) as f64;
                (lo + ((v - lo) / step).round() * step).clamp(lo, hi)
            }
            _ => v,
        }
    }
}

pub(crate) fn channels_of(mask: &[[u8; OUTPUTS]]) -> Vec<Channel> {
    mask.iter()
        .enumerate()
        .flat_map(|(gen, m)| {
            (0..OUTPUTS)
                .filter(move |q| m[*q] == 1)
                .map(move |output| Channel { gen, output })
        })
        .collect()
}

/// Knot values per attacked channel.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub channels: Vec<Channel>,
    /// `knots[c][j]` is knot `j` of channel `c`.
    pub knots: Vec<Vec<f64>>,
}

impl Candidate {
    pub fn control_points(&self) -> usize {
        self.knots.first().map_or(0, Vec::len)
    }

    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.knots.iter().flatten().copied()
    }
}

/// First step covered by knot `j` of `p` over `d` steps: `⌊j·d/p⌋`.
pub fn knot_start(j: usize, d: usize, p: usize) -> usize {
    j * d / p
}

/// Zero-order-hold expansion of the knots onto `d` steps for an `n`-generator mask.
pub fn decode_control_points(candidate: &Candidate, d: usize, mask: &[[u8; OUTPUTS]]) -> FalseDataSchedule {
    let p = candidate.control_points();
    assert!(p >= 1 && p <= d, "need 1 <= P <= d");
    let mut values = vec![vec![[0.0; OUTPUTS]; d]; mask.len()];
    for (channel, knots) in candidate.channels.iter().zip(&candidate.knots) {
        for (j, v) in knots.iter().enumerate() {
            for row in &mut values[channel.gen][knot_start(j, d, p)..knot_start(j + 1, d, p)] {
                row[channel.output] = *v;
            }
        }
    }
    FalseDataSchedule::new(values, mask.to_vec()).expect("decoded schedule respects mask")
}

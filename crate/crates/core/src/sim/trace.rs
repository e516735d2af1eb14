use std::fmt::Write as _;

use serde::Serialize;

use super::SignalBasis;
use crate::fmt_sig9;
use crate::model::{GridModel, OUTPUTS, STATES};

/// One generator at one step.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GenRecord {
    pub x: [f64; STATES],
    pub xhat: [f64; STATES],
    /// Input the estimator believes was applied over the preceding interval.
    pub u_believed: f64,
    /// Input actually applied to the plant over the preceding interval.
    pub u_actual: f64,
    pub y: [f64; OUTPUTS],
    pub y_meas: [f64; OUTPUTS],
    pub r: [f64; OUTPUTS],
    pub r_inf: f64,
    /// Frequency from the true speed deviation, Hz.
    pub f_hz: f64,
    /// Frequency from the measured (possibly falsified) speed deviation, Hz.
    pub f_meas_hz: f64,
    /// Electrical power deviation `ΔP_L + D·Δω`, per-unit.
    pub pe: f64,
    pub stealthy: bool,
}

impl GenRecord {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn assemble(
        grid: &GridModel,
        gen: usize,
        x: [f64; STATES],
        xhat: [f64; STATES],
        u_believed: f64,
        u_actual: f64,
        y: [f64; OUTPUTS],
        y_meas: [f64; OUTPUTS],
        r: [f64; OUTPUTS],
        pe: f64,
    ) -> Self {
        let r_inf = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        Self {
            x,
            xhat,
            u_believed,
            u_actual,
            y,
            y_meas,
            r,
            r_inf,
            f_hz: grid.frequency_hz(gen, x[0]),
            f_meas_hz: grid.frequency_hz(gen, y_meas[0]),
            pe,
            stealthy: r_inf <= grid.thresholds[gen],
        }
    }

    pub fn frequency(&self, basis: SignalBasis) -> f64 {
        match basis {
            SignalBasis::Measured => self.f_meas_hz,
            SignalBasis::TrueState => self.f_hz,
        }
    }
}

/// All generators at step `k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StepRecord {
    pub k: usize,
    pub gens: Vec<GenRecord>,
}

/// Ordered step records `0..=horizon` with reproducibility metadata.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SimTrace {
    pub records: Vec<StepRecord>,
    /// Thresholds the `stealthy` flags were evaluated against.
    pub thresholds: Vec<f64>,
    pub seed: Option<u64>,
    pub stream: Option<u64>,
    pub grid_hash: Option<String>,
    pub attack_hash: Option<String>,
    /// First step whose state was non-finite; the trace stops before it.
    pub blow_up: Option<usize>,
}

/// CSV header of [`SimTrace::to_csv`].
pub const TRACE_CSV_HEADER: &str = "k,t_s,gen,x1,x2,x3,x4,xhat1,xhat2,xhat3,xhat4,u_believed,u_actual,y1,y2,ymeas1,ymeas2,r1,r2,rinf,f_hz,pe_pu,stealthy";

impl SimTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn n(&self) -> usize {
        self.records.first().map_or(0, |r| r.gens.len())
    }

    /// One row per (step, generator); reals with 9 significant digits.
    pub fn to_csv(&self, ts: f64) -> String {
        let mut out = String::with_capacity(self.records.len() * self.n() * 300);
        out.push_str(TRACE_CSV_HEADER);
        out.push('\n');
        for rec in &self.records {
            for (i, g) in rec.gens.iter().enumerate() {
                let _ = write!(out, "{},{},{}", rec.k, fmt_sig9(rec.k as f64 * ts), i + 1);
                let reals =
                    g.x.iter()
                        .chain(&g.xhat)
                        .chain([&g.u_believed, &g.u_actual])
                        .chain(&g.y)
                        .chain(&g.y_meas)
                        .chain(&g.r)
                        .chain([&g.r_inf, &g.f_hz, &g.pe]);
                for v in reals {
                    out.push(',');
                    out.push_str(&fmt_sig9(*v));
                }
                out.push_str(if g.stealthy { ",1\n" } else { ",0\n" });
            }
        }
        out
    }
}

//! Trace summaries shared by the commands: text reports and plots.

use std::fmt::Write;

use gridstorm::model::GridModel;
use gridstorm::sim::{check_success_with, robustness_with, SignalBasis, SimTrace, StealthWindow, SuccessReport};

use crate::svg::{self, Panel, Series};

/// Predicate outcome and summary statistics of one trace.
pub struct TraceSummary {
    pub report: SuccessReport,
    pub rho: f64,
    pub min_f: Vec<f64>,
    pub max_f: Vec<f64>,
    pub final_f: Vec<f64>,
    /// Largest `‖r‖∞ / Th` per generator over the trace.
    pub max_residue_ratio: Vec<f64>,
    pub blow_up: Option<usize>,
    pub steps: usize,
}

impl TraceSummary {
    pub fn new(trace: &SimTrace, grid: &GridModel, basis: SignalBasis, window: StealthWindow) -> Self {
        let n = grid.n();
        let report = check_success_with(trace, &grid.envelope, &grid.thresholds, basis, window);
        let rho = robustness_with(trace, &grid.envelope, &grid.thresholds, basis, window);
        let mut min_f = vec![f64::INFINITY; n];
        let mut max_f = vec![f64::NEG_INFINITY; n];
        let mut ratio = vec![0.0f64; n];
        for rec in &trace.records {
            for (i, g) in rec.gens.iter().enumerate() {
                let f = g.frequency(basis);
                min_f[i] = min_f[i].min(f);
                max_f[i] = max_f[i].max(f);
                ratio[i] = ratio[i].max(g.r_inf / grid.thresholds[i]);
            }
        }
        let last = trace.records.last().expect("trace has the initial record");
        Self {
            report,
            rho,
            min_f,
            max_f,
            final_f: last.gens.iter().map(|g| g.frequency(basis)).collect(),
            max_residue_ratio: ratio,
            blow_up: trace.blow_up,
            steps: trace.records.len() - 1,
        }
    }

    /// Every generator's frequency is inside the band at the last step.
    pub fn recovered(&self, grid: &GridModel) -> bool {
        self.blow_up.is_none() && self.final_f.iter().all(|f| grid.envelope.frequency_safe(*f))
    }

    pub fn write_text(&self, out: &mut String, grid: &GridModel) {
        let ts = grid.ts;
        let step = |k: Option<usize>| match k {
            Some(k) => format!("{k} (t = {:.2} s)", k as f64 * ts),
            None => "none".to_string(),
        };
        let yes = |b: bool| if b { "yes" } else { "no" };
        let _ = writeln!(out, "steps simulated: {}", self.steps);
        if let Some(k) = self.blow_up {
            let _ = writeln!(out, "blow-up at step: {k}");
        }
        let _ = writeln!(out, "signal basis: {}", basis_name(self.report.signal_basis));
        let _ = writeln!(out, "first unsafe step: {}", step(self.report.k_prime));
        let _ = writeln!(out, "first detection: {}", step(self.report.first_detection));
        let _ = writeln!(out, "stealthy until unsafe: {}", yes(self.report.stealthy_until_unsafe));
        let _ = writeln!(out, "success: {}", yes(self.report.success));
        let _ = writeln!(out, "robustness: {:.6e}", self.rho);
        let _ = writeln!(out, "in-band at end: {}", yes(self.recovered(grid)));
        for (i, g) in grid.generators.iter().enumerate() {
            let _ = writeln!(
                out,
                "{}: f range [{:.4}, {:.4}] Hz, final {:.4} Hz, max residue/threshold {:.3}",
                g.name, self.min_f[i], self.max_f[i], self.final_f[i], self.max_residue_ratio[i]
            );
        }
    }
}

pub fn basis_name(basis: SignalBasis) -> &'static str {
    match basis {
        SignalBasis::Measured => "measured",
        SignalBasis::TrueState => "true",
    }
}

/// Frequency, residue and electrical-power panels of a trace.
pub fn trace_plot(trace: &SimTrace, grid: &GridModel, basis: SignalBasis, title: &str) -> String {
    let ts = grid.ts;
    let per_gen = |f: &dyn Fn(&gridstorm::sim::GenRecord) -> f64| -> Vec<Series> {
        grid.generators
            .iter()
            .enumerate()
            .map(|(i, g)| Series {
                name: g.name.clone(),
                points: trace.records.iter().map(|r| (r.k as f64 * ts, f(&r.gens[i]))).collect(),
            })
            .collect()
    };
    let env = &grid.envelope;
    let mut thresholds = grid.thresholds.clone();
    thresholds.dedup();
    svg::render(&[
        Panel {
            title: format!("{title}: frequency"),
            x_label: "time (s)".into(),
            y_label: "Hz".into(),
            series: per_gen(&|g| g.frequency(basis)),
            hlines: vec![env.f_lo, env.f_hi],
        },
        Panel {
            title: format!("{title}: residue"),
            x_label: "time (s)".into(),
            y_label: "‖r‖∞ (pu)".into(),
            series: per_gen(&|g| g.r_inf),
            hlines: thresholds,
        },
        Panel {
            title: format!("{title}: electrical power deviation"),
            x_label: "time (s)".into(),
            y_label: "pu".into(),
            series: per_gen(&|g| g.pe),
            hlines: vec![env.pe_lo, env.pe_hi],
        },
    ])
}

/// Per-episode reward and its moving average.
pub fn reward_plot(curve: &[f64], moving: &[f64]) -> String {
    let pts = |v: &[f64]| v.iter().enumerate().map(|(i, r)| (i as f64, *r)).collect();
    svg::render(&[Panel {
        title: "training reward".into(),
        x_label: "episode".into(),
        y_label: "cumulative reward".into(),
        series: vec![
            Series {
                name: "episode".into(),
                points: pts(curve),
            },
            Series {
                name: "moving avg".into(),
                points: pts(moving),
            },
        ],
        hlines: vec![],
    }])
}

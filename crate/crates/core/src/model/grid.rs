use serde::Serialize;

use super::plant::{build_continuous, discretize_zoh, OUTPUTS, STATES};
use super::{design_kalman_gain, design_lqr_gain, AgcParams, ModelError};
use crate::numerics::{spectral_radius, Matrix};

/// Lower bound applied to calibrated or configured detector thresholds.
pub const THRESHOLD_FLOOR: f64 = 1e-9;

/// Discrete closed loop of one generator: plant, estimator and controller.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteLoop {
    pub a: Matrix,
    pub b: Matrix,
    pub c: Matrix,
    pub d_ff: Matrix,
    /// Feedback gain; the believed input is `scheduled + K·x̂`.
    pub k: Matrix,
    /// Kalman predictor gain.
    pub l: Matrix,
    pub ts: f64,
    pub q_n: Matrix,
    pub r_n: Matrix,
}

/// How the controller and estimator gains of a loop are obtained.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct GainSpec {
    /// Explicit feedback gain (1×4) applied as `+K·x̂`.
    pub k: Option<Matrix>,
    /// Explicit Kalman gain (4×2).
    pub l: Option<Matrix>,
    /// LQR weights `(Q_c, R_c)`; the designed gain enters as `−K_lqr·x̂`.
    pub lqr: Option<(Matrix, Matrix)>,
}

impl DiscreteLoop {
    pub fn design(params: &AgcParams, ts: f64, q_n: Matrix, r_n: Matrix, gains: &GainSpec) -> Result<Self, ModelError> {
        let css = build_continuous(params)?;
        let dz = discretize_zoh(&css, ts)?;
        check_shape("Q_n", &q_n, (STATES, STATES))?;
        check_shape("R_n", &r_n, (OUTPUTS, OUTPUTS))?;
        check_covariance("Q_n", &q_n, false)?;
        check_covariance("R_n", &r_n, true)?;
        let l = match &gains.l {
            Some(l) => {
                check_shape("L", l, (STATES, OUTPUTS))?;
                let radius = spectral_radius(&dz.a.sub(&l.mul(&dz.c)))?;
                if radius >= 1.0 {
                    return Err(ModelError::UnstableEstimator { radius });
                }
                l.clone()
            }
            None => design_kalman_gain(&dz.a, &dz.c, &q_n, &r_n)?,
        };
        let k = match (&gains.k, &gains.lqr) {
            (Some(_), Some(_)) => {
                return Err(ModelError::Schema("gains: give either K or lqr, not both".into()));
            }
            (Some(k), None) => {
                check_shape("K", k, (1, STATES))?;
                k.clone()
            }
            (None, Some((q_c, r_c))) => {
                check_shape("Q_c", q_c, (STATES, STATES))?;
                check_shape("R_c", r_c, (1, 1))?;
                design_lqr_gain(&dz.a, &dz.b, q_c, r_c)?.scale(-1.0)
            }
            (None, None) => Matrix::zeros(1, STATES),
        };
        Ok(Self {
            a: dz.a,
            b: dz.b,
            c: dz.c,
            d_ff: dz.d_ff,
            k,
            l,
            ts,
            q_n,
            r_n,
        })
    }

    pub fn estimator_radius(&self) -> f64 {
        spectral_radius(&self.a.sub(&self.l.mul(&self.c))).unwrap_or(f64::INFINITY)
    }

    pub fn has_feedback(&self) -> bool {
        self.k.as_slice().iter().any(|v| *v != 0.0)
    }
}

fn check_shape(field: &'static str, m: &Matrix, shape: (usize, usize)) -> Result<(), ModelError> {
    if m.shape() != shape {
        return Err(ModelError::Shape {
            field,
            expected: shape,
            got: m.shape(),
        });
    }
    Ok(())
}

fn check_covariance(field: &'static str, m: &Matrix, definite: bool) -> Result<(), ModelError> {
    if m.max_abs_diff(&m.transpose()) > 1e-12 * m.max_abs().max(1.0) {
        return Err(ModelError::InvalidParam {
            field,
            reason: "must be symmetric".into(),
        });
    }
    let factor = m.psd_factor().map_err(|_| ModelError::InvalidParam {
        field,
        reason: "must be positive semidefinite".into(),
    })?;
    if definite && (0..m.rows()).any(|i| factor[(i, i)] <= 0.0) {
        return Err(ModelError::InvalidParam {
            field,
            reason: "must be positive definite".into(),
        });
    }
    Ok(())
}

/// Breaker-to-load topology `ΔP_L = M·(b − b_nom)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LoadMap {
    /// n×m per-unit load magnitudes.
    pub matrix: Matrix,
    /// Nominal breaker states (1 = closed).
    pub b_nom: Vec<u8>,
}

impl LoadMap {
    pub fn new(matrix: Matrix, b_nom: Vec<u8>) -> Result<Self, ModelError> {
        let (n, m) = matrix.shape();
        if m == 0 || n == 0 {
            return Err(ModelError::Schema("load_map.matrix must be non-empty".into()));
        }
        if b_nom.len() != m {
            return Err(ModelError::Schema(format!(
                "load_map.b_nom has {} entries, matrix has {m} columns",
                b_nom.len()
            )));
        }
        if b_nom.iter().any(|b| *b > 1) {
            return Err(ModelError::Schema("load_map.b_nom entries must be 0 or 1".into()));
        }
        if matrix.as_slice().iter().any(|v| *v < 0.0) {
            return Err(ModelError::Schema("load_map.matrix entries must be >= 0".into()));
        }
        for j in 0..m {
            if (0..n).all(|i| matrix[(i, j)] == 0.0) {
                return Err(ModelError::Schema(format!("load_map.matrix column {j} is all zero")));
            }
        }
        Ok(Self { matrix, b_nom })
    }

    pub fn generators(&self) -> usize {
        self.matrix.rows()
    }

    pub fn breakers(&self) -> usize {
        self.matrix.cols()
    }
}

/// Safe operating band for frequency (Hz) and electrical power deviation (pu).
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SafetyEnvelope {
    pub f_lo: f64,
    pub f_hi: f64,
    pub pe_lo: f64,
    pub pe_hi: f64,
}

impl SafetyEnvelope {
    pub fn new(f_lo: f64, f_hi: f64, pe_lo: f64, pe_hi: f64) -> Result<Self, ModelError> {
        if !(f_lo.is_finite() && f_hi.is_finite() && f_lo < f_hi) {
            return Err(ModelError::Schema(format!(
                "envelope: need f_lo < f_hi, got {f_lo}, {f_hi}"
            )));
        }
        if !(pe_lo.is_finite() && pe_hi.is_finite() && pe_lo < pe_hi) {
            return Err(ModelError::Schema(format!(
                "envelope: need pe_lo < pe_hi, got {pe_lo}, {pe_hi}"
            )));
        }
        Ok(Self {
            f_lo,
            f_hi,
            pe_lo,
            pe_hi,
        })
    }

    /// `[59.5, 60.5]` Hz and ±0.1 pu.
    pub fn default_60hz() -> Self {
        Self {
            f_lo: 59.5,
            f_hi: 60.5,
            pe_lo: -0.1,
            pe_hi: 0.1,
        }
    }

    /// Signed frequency margin: positive inside the band, negative outside.
    pub fn frequency_margin(&self, f: f64) -> f64 {
        (self.f_hi - f).min(f - self.f_lo)
    }

    pub fn frequency_safe(&self, f: f64) -> bool {
        f >= self.f_lo && f <= self.f_hi
    }

    /// `pe_dev` is the electrical power deviation relative to the schedule.
    pub fn power_safe(&self, pe_dev: f64) -> bool {
        pe_dev >= self.pe_lo && pe_dev <= self.pe_hi
    }
}

/// Per-generator scheduled load; the last value is held beyond the list.
#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct ScheduledLoad {
    pub per_generator: Vec<Vec<f64>>,
}

impl ScheduledLoad {
    pub fn zero(n: usize) -> Self {
        Self {
            per_generator: vec![Vec::new(); n],
        }
    }

    pub fn at(&self, gen: usize, k: usize) -> f64 {
        match self.per_generator.get(gen) {
            Some(series) if !series.is_empty() => series[k.min(series.len() - 1)],
            _ => 0.0,
        }
    }
}

/// One generator: its parameters and designed discrete loop.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Generator {
    pub name: String,
    pub params: AgcParams,
    pub plant: DiscreteLoop,
}

/// n generator loops coupled through a breaker-to-load map.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GridModel {
    pub generators: Vec<Generator>,
    pub load_map: LoadMap,
    pub envelope: SafetyEnvelope,
    pub thresholds: Vec<f64>,
    pub scheduled_load: ScheduledLoad,
    pub ts: f64,
    /// Default initial plant state per generator.
    pub initial_state: Vec<[f64; STATES]>,
}

impl GridModel {
    /// Assembles and validates a grid. Thresholds below [`THRESHOLD_FLOOR`] are raised to it.
    pub fn new(
        generators: Vec<Generator>,
        load_map: LoadMap,
        envelope: SafetyEnvelope,
        thresholds: Vec<f64>,
        scheduled_load: ScheduledLoad,
    ) -> Result<Self, ModelError> {
        let n = generators.len();
        if n == 0 {
            return Err(ModelError::Schema("generators must be non-empty".into()));
        }
        if load_map.generators() != n {
            return Err(ModelError::Schema(format!(
                "load_map.matrix has {} rows for {n} generators",
                load_map.generators()
            )));
        }
        if thresholds.len() != n {
            return Err(ModelError::Schema(format!(
                "thresholds has {} entries for {n} generators",
                thresholds.len()
            )));
        }
        if thresholds.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
            return Err(ModelError::Schema("thresholds must be finite and >= 0".into()));
        }
        if scheduled_load.per_generator.len() != n {
            return Err(ModelError::Schema(format!(
                "scheduled_load has {} series for {n} generators",
                scheduled_load.per_generator.len()
            )));
        }
        if scheduled_load.per_generator.iter().flatten().any(|v| !v.is_finite()) {
            return Err(ModelError::Schema("scheduled_load must be finite".into()));
        }
        let ts = generators[0].plant.ts;
        if generators.iter().any(|g| g.plant.ts != ts) {
            return Err(ModelError::Schema(
                "all generators must share the sampling period".into(),
            ));
        }
        Ok(Self {
            generators,
            load_map,
            envelope,
            thresholds: thresholds.into_iter().map(|t| t.max(THRESHOLD_FLOOR)).collect(),
            scheduled_load,
            ts,
            initial_state: vec![[0.0; STATES]; n],
        })
    }

    pub fn n(&self) -> usize {
        self.generators.len()
    }

    pub fn m(&self) -> usize {
        self.load_map.breakers()
    }

    pub fn with_thresholds(mut self, thresholds: Vec<f64>) -> Self {
        assert_eq!(thresholds.len(), self.n());
        self.thresholds = thresholds.into_iter().map(|t| t.max(THRESHOLD_FLOOR)).collect();
        self
    }

    /// Frequency in Hz for a per-unit speed deviation of generator `gen`.
    pub fn frequency_hz(&self, gen: usize, dw_pu: f64) -> f64 {
        let p = &self.generators[gen].params;
        p.nominal_frequency_hz + p.hz_per_pu() * dw_pu
    }

    /// SHA-256 of the canonical JSON serialization.
    pub fn content_hash(&self) -> String {
        crate::sha256_hex(&serde_json::to_vec(self).expect("grid serializes"))
    }
}

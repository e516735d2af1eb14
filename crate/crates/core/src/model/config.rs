use serde::{Deserialize, Serialize};

use super::plant::STATES;
use super::{
    calibrate_threshold, AgcParams, DiscreteLoop, GainSpec, Generator, GridModel, LoadMap, ModelError, SafetyEnvelope,
    ScheduledLoad,
};
use crate::numerics::{rng_stream, Matrix};

/// Default process-noise variance per state.
pub const DEFAULT_PROCESS_NOISE: f64 = 1e-8;
/// Default measurement-noise variance per output.
pub const DEFAULT_MEASUREMENT_NOISE: f64 = 1e-6;
/// Default sampling period, seconds.
pub const DEFAULT_TS: f64 = 0.01;

/// JSON grid document.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default = "default_ts")]
    pub sampling_period_s: f64,
    pub generators: Vec<GeneratorConfig>,
    pub load_map: LoadMapConfig,
    #[serde(default)]
    pub envelope: EnvelopeConfig,
    #[serde(default)]
    pub thresholds: Option<Vec<f64>>,
    #[serde(default)]
    pub scheduled_load: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    pub calibration: CalibrationConfig,
    #[serde(default)]
    pub initial_state: Option<Vec<[f64; STATES]>>,
}

fn default_ts() -> f64 {
    DEFAULT_TS
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeneratorConfig {
    #[serde(default)]
    pub name: Option<String>,
    pub params: AgcParams,
    #[serde(default)]
    pub gains: Option<GainsConfig>,
    #[serde(default)]
    pub noise: Option<NoiseConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GainsConfig {
    #[serde(default, rename = "K")]
    pub k: Option<Matrix>,
    #[serde(default, rename = "L")]
    pub l: Option<Matrix>,
    #[serde(default)]
    pub lqr: Option<LqrConfig>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LqrConfig {
    #[serde(rename = "Q_c")]
    pub q_c: Matrix,
    #[serde(rename = "R_c")]
    pub r_c: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NoiseConfig {
    #[serde(rename = "Q_n")]
    pub q_n: Matrix,
    #[serde(rename = "R_n")]
    pub r_n: Matrix,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LoadMapConfig {
    pub matrix: Vec<Vec<f64>>,
    pub b_nom: Vec<u8>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EnvelopeConfig {
    pub f_lo_hz: f64,
    pub f_hi_hz: f64,
    pub pe_lo_pu: f64,
    pub pe_hi_pu: f64,
}

impl Default for EnvelopeConfig {
    fn default() -> Self {
        let e = SafetyEnvelope::default_60hz();
        Self {
            f_lo_hz: e.f_lo,
            f_hi_hz: e.f_hi,
            pe_lo_pu: e.pe_lo,
            pe_hi_pu: e.pe_hi,
        }
    }
}

/// Settings for threshold calibration when `thresholds` is absent.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CalibrationConfig {
    #[serde(default = "default_calibration_horizon")]
    pub horizon: usize,
    #[serde(default = "default_margin")]
    pub margin: f64,
    #[serde(default)]
    pub seed: u64,
}

fn default_calibration_horizon() -> usize {
    10_000
}

fn default_margin() -> f64 {
    1.1
}

impl Default for CalibrationConfig {
    fn default() -> Self {
        Self {
            horizon: default_calibration_horizon(),
            margin: default_margin(),
            seed: 0,
        }
    }
}

/// Stream id used for threshold calibration noise.
pub const CALIBRATION_STREAM: u64 = 0xCA1;

impl GridConfig {
    pub fn parse(document: &str) -> Result<Self, ModelError> {
        serde_json::from_str(document).map_err(|e| ModelError::Schema(e.to_string()))
    }

    /// Validates the document, designs missing gains and calibrates missing thresholds.
    pub fn build(&self) -> Result<GridModel, ModelError> {
        if self.generators.is_empty() {
            return Err(ModelError::Schema("generators must be non-empty".into()));
        }
        let mut generators = Vec::with_capacity(self.generators.len());
        for (i, g) in self.generators.iter().enumerate() {
            let name = g.name.clone().unwrap_or_else(|| format!("G{}", i + 1));
            let (q_n, r_n) = match &g.noise {
                Some(n) => (n.q_n.clone(), n.r_n.clone()),
                None => (
                    Matrix::identity(STATES).scale(DEFAULT_PROCESS_NOISE),
                    Matrix::identity(2).scale(DEFAULT_MEASUREMENT_NOISE),
                ),
            };
            let spec = match &g.gains {
                Some(gc) => GainSpec {
                    k: gc.k.clone(),
                    l: gc.l.clone(),
                    lqr: gc.lqr.as_ref().map(|l| (l.q_c.clone(), l.r_c.clone())),
                },
                None => GainSpec::default(),
            };
            let plant = DiscreteLoop::design(&g.params, self.sampling_period_s, q_n, r_n, &spec)
                .map_err(|e| e.in_generator(i))?;
            generators.push(Generator {
                name,
                params: g.params.clone(),
                plant,
            });
        }
        let n = generators.len();
        let matrix = Matrix::try_from_rows(&self.load_map.matrix)
            .map_err(|e| ModelError::Schema(format!("load_map.matrix: {e}")))?;
        let load_map = LoadMap::new(matrix, self.load_map.b_nom.clone())?;
        let e = &self.envelope;
        let envelope = SafetyEnvelope::new(e.f_lo_hz, e.f_hi_hz, e.pe_lo_pu, e.pe_hi_pu)?;
        let scheduled_load = match &self.scheduled_load {
            Some(s) => ScheduledLoad {
                per_generator: s.clone(),
            },
            None => ScheduledLoad::zero(n),
        };
        let provisional = self.thresholds.clone().unwrap_or_else(|| vec![1.0; n]);
        let mut grid = GridModel::new(generators, load_map, envelope, provisional, scheduled_load)?;
        if let Some(init) = &self.initial_state {
            if init.len() != n {
                return Err(ModelError::Schema(format!(
                    "initial_state has {} entries for {n} generators",
                    init.len()
                )));
            }
            if init.iter().flatten().any(|v| !v.is_finite()) {
                return Err(ModelError::Schema("initial_state must be finite".into()));
            }
            grid.initial_state = init.clone();
        }
        if self.thresholds.is_none() {
            let c = &self.calibration;
            let mut rng = rng_stream(c.seed, CALIBRATION_STREAM);
            let th = calibrate_threshold(&grid, c.horizon, c.margin, &mut rng)?;
            grid = grid.with_thresholds(th);
        }
        Ok(grid)
    }
}

/// Parses and builds a grid from a JSON document.
pub fn load_grid_config(document: &str) -> Result<GridModel, ModelError> {
    GridConfig::parse(document)?.build()
}

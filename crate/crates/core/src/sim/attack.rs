use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::SimError;
use crate::model::{GridModel, LoadMap, OUTPUTS};

/// Per-generator load deviation `ΔP_L = M·(b − b_nom)`.
pub fn apply_load_map(load_map: &LoadMap, breaker_state: &[u8]) -> Result<Vec<f64>, SimError> {
    if breaker_state.len() != load_map.breakers() {
        return Err(SimError::Length {
            what: "breaker_state",
            expected: load_map.breakers(),
            got: breaker_state.len(),
        });
    }
    if breaker_state.iter().any(|b| *b > 1) {
        return Err(SimError::Invalid("breaker states must be 0 or 1".into()));
    }
    let m = &load_map.matrix;
    Ok((0..m.rows())
        .map(|i| {
            breaker_state
                .iter()
                .zip(&load_map.b_nom)
                .enumerate()
                .map(|(j, (b, nom))| m[(i, j)] * (f64::from(*b) - f64::from(*nom)))
                .sum()
        })
        .collect())
}

/// d×m binary breaker commands; row `j` drives the load during step `j → j+1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BreakerSchedule {
    signals: Vec<Vec<u8>>,
}

impl BreakerSchedule {
    pub fn new(signals: Vec<Vec<u8>>) -> Result<Self, SimError> {
        if signals.is_empty() {
            return Err(SimError::Invalid("breaker schedule needs d >= 1".into()));
        }
        let m = signals[0].len();
        if m == 0 {
            return Err(SimError::Invalid("breaker schedule rows must be non-empty".into()));
        }
        for row in &signals {
            if row.len() != m {
                return Err(SimError::Length {
                    what: "breaker schedule row",
                    expected: m,
                    got: row.len(),
                });
            }
            if row.iter().any(|b| *b > 1) {
                return Err(SimError::Invalid("breaker schedule entries must be 0 or 1".into()));
            }
        }
        Ok(Self { signals })
    }

    /// `d` repetitions of one breaker state.
    pub fn constant(d: usize, state: &[u8]) -> Result<Self, SimError> {
        Self::new(vec![state.to_vec(); d])
    }

    pub fn d(&self) -> usize {
        self.signals.len()
    }

    pub fn m(&self) -> usize {
        self.signals[0].len()
    }

    pub fn row(&self, k: usize) -> &[u8] {
        &self.signals[k]
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.signals
    }
}

/// Per-generator false data added to the measured outputs.
///
/// Row `j` of generator `i` corrupts the measurement taken at step `j+1`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FalseDataSchedule {
    values: Vec<Vec<[f64; OUTPUTS]>>,
    mask: Vec<[u8; OUTPUTS]>,
}

impl FalseDataSchedule {
    pub fn new(values: Vec<Vec<[f64; OUTPUTS]>>, mask: Vec<[u8; OUTPUTS]>) -> Result<Self, SimError> {
        if values.len() != mask.len() {
            return Err(SimError::Length {
                what: "false data generators",
                expected: mask.len(),
                got: values.len(),
            });
        }
        let d = values.first().map_or(0, Vec::len);
        if d == 0 {
            return Err(SimError::Invalid("false data needs d >= 1".into()));
        }
        for (series, m) in values.iter().zip(&mask) {
            if series.len() != d {
                return Err(SimError::Length {
                    what: "false data rows",
                    expected: d,
                    got: series.len(),
                });
            }
            if m.iter().any(|b| *b > 1) {
                return Err(SimError::Invalid("mask entries must be 0 or 1".into()));
            }
            for row in series {
                for q in 0..OUTPUTS {
                    if !row[q].is_finite() {
                        return Err(SimError::Invalid("false data must be finite".into()));
                    }
                    if m[q] == 0 && row[q] != 0.0 {
                        return Err(SimError::Invalid(format!("false data on masked-off output {}", q + 1)));
                    }
                }
            }
        }
        Ok(Self { values, mask })
    }

    pub fn zero(n: usize, d: usize) -> Self {
        Self {
            values: vec![vec![[0.0; OUTPUTS]; d]; n],
            mask: vec![[0; OUTPUTS]; n],
        }
    }

    pub fn d(&self) -> usize {
        self.values[0].len()
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn mask(&self) -> &[[u8; OUTPUTS]] {
        &self.mask
    }

    pub fn series(&self, gen: usize) -> &[[f64; OUTPUTS]] {
        &self.values[gen]
    }

    pub fn at(&self, gen: usize, k: usize) -> [f64; OUTPUTS] {
        self.values[gen][k]
    }

    /// True when every masked-on value lies inside `range[q]`.
    pub fn within(&self, range: &[(f64, f64); OUTPUTS]) -> bool {
        self.values.iter().zip(&self.mask).all(|(series, m)| {
            series
                .iter()
                .all(|row| (0..OUTPUTS).all(|q| m[q] == 0 || (row[q] >= range[q].0 && row[q] <= range[q].1)))
        })
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().flatten().all(|row| row.iter().all(|v| *v == 0.0))
    }
}

/// Paired breaker schedule and false data sharing the horizon `d`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AttackVector {
    pub breaker_schedule: BreakerSchedule,
    pub false_data: FalseDataSchedule,
}

impl AttackVector {
    pub fn new(breaker_schedule: BreakerSchedule, false_data: FalseDataSchedule) -> Result<Self, SimError> {
        if breaker_schedule.d() != false_data.d() {
            return Err(SimError::Invalid(format!(
                "breaker schedule d = {} but false data d = {}",
                breaker_schedule.d(),
                false_data.d()
            )));
        }
        Ok(Self {
            breaker_schedule,
            false_data,
        })
    }

    /// Breakers held at nominal, no false data.
    pub fn nominal(grid: &GridModel, d: usize) -> Self {
        Self {
            breaker_schedule: BreakerSchedule::constant(d, &grid.load_map.b_nom).expect("b_nom is valid"),
            false_data: FalseDataSchedule::zero(grid.n(), d),
        }
    }

    /// LAA only: the given breaker schedule with zero false data.
    pub fn load_only(grid: &GridModel, breaker_schedule: BreakerSchedule) -> Self {
        let d = breaker_schedule.d();
        Self {
            breaker_schedule,
            false_data: FalseDataSchedule::zero(grid.n(), d),
        }
    }

    /// FDIA only: nominal breakers with the given false data.
    pub fn data_only(grid: &GridModel, false_data: FalseDataSchedule) -> Self {
        let d = false_data.d();
        Self {
            breaker_schedule: BreakerSchedule::constant(d, &grid.load_map.b_nom).expect("b_nom is valid"),
            false_data,
        }
    }

    pub fn d(&self) -> usize {
        self.breaker_schedule.d()
    }

    pub fn check_against(&self, grid: &GridModel) -> Result<(), SimError> {
        if self.breaker_schedule.m() != grid.m() {
            return Err(SimError::Length {
                what: "breaker schedule columns",
                expected: grid.m(),
                got: self.breaker_schedule.m(),
            });
        }
        if self.false_data.n() != grid.n() {
            return Err(SimError::Length {
                what: "false data generators",
                expected: grid.n(),
                got: self.false_data.n(),
            });
        }
        Ok(())
    }

    pub fn content_hash(&self) -> String {
        crate::sha256_hex(&serde_json::to_vec(self).expect("attack serializes"))
    }
}

/// Where an attack or schedule file came from.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Provenance {
    #[serde(default)]
    pub source: String,
    #[serde(default)]
    pub seeds: BTreeMap<String, u64>,
    #[serde(default)]
    pub budgets: BTreeMap<String, u64>,
    #[serde(default)]
    pub rho: Option<f64>,
    #[serde(default)]
    pub k_prime: Option<usize>,
    #[serde(default)]
    pub first_detection: Option<usize>,
}

/// JSON interchange for attack vectors.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackFile {
    pub d: usize,
    pub breaker_schedule: Vec<Vec<u8>>,
    /// Per generator, d rows of (Δω, ΔP_ref) false data.
    pub false_data: Vec<Vec<[f64; OUTPUTS]>>,
    pub range: [[f64; 2]; OUTPUTS],
    pub mask: Vec<[u8; OUTPUTS]>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl AttackFile {
    pub fn from_attack(attack: &AttackVector, range: [(f64, f64); OUTPUTS], provenance: Provenance) -> Self {
        Self {
            d: attack.d(),
            breaker_schedule: attack.breaker_schedule.rows().to_vec(),
            false_data: (0..attack.false_data.n())
                .map(|i| attack.false_data.series(i).to_vec())
                .collect(),
            range: range.map(|(lo, hi)| [lo, hi]),
            mask: attack.false_data.mask().to_vec(),
            provenance,
        }
    }

    pub fn parse(document: &str) -> Result<Self, SimError> {
        serde_json::from_str(document).map_err(|e| SimError::Schema(e.to_string()))
    }

    /// Validated attack vector; checks `d`, mask, range and grid dimensions.
    pub fn to_attack(&self, grid: &GridModel) -> Result<AttackVector, SimError> {
        if self.breaker_schedule.len() != self.d {
            return Err(SimError::Length {
                what: "breaker_schedule rows",
                expected: self.d,
                got: self.breaker_schedule.len(),
            });
        }
        let breakers = BreakerSchedule::new(self.breaker_schedule.clone())?;
        let data = FalseDataSchedule::new(self.false_data.clone(), self.mask.clone())?;
        let range = self.range_pairs();
        if range.iter().any(|(lo, hi)| !(lo.is_finite() && hi.is_finite())) {
            return Err(SimError::Schema("range bounds must be finite".into()));
        }
        if !data.within(&range) {
            return Err(SimError::Invalid("false data outside the declared range".into()));
        }
        let attack = AttackVector::new(breakers, data)?;
        attack.check_against(grid)?;
        Ok(attack)
    }

    pub fn range_pairs(&self) -> [(f64, f64); OUTPUTS] {
        self.range.map(|[lo, hi]| (lo, hi))
    }
}

/// JSON file holding a breaker schedule alone.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    pub d: usize,
    pub breaker_schedule: Vec<Vec<u8>>,
    #[serde(default)]
    pub provenance: Provenance,
}

impl ScheduleFile {
    pub fn from_schedule(schedule: &BreakerSchedule, provenance: Provenance) -> Self {
        Self {
            d: schedule.d(),
            breaker_schedule: schedule.rows().to_vec(),
            provenance,
        }
    }

    pub fn parse(document: &str) -> Result<Self, SimError> {
        serde_json::from_str(document).map_err(|e| SimError::Schema(e.to_string()))
    }

    pub fn to_schedule(&self, grid: &GridModel) -> Result<BreakerSchedule, SimError> {
        if self.breaker_schedule.len() != self.d {
            return Err(SimError::Length {
                what: "breaker_schedule rows",
                expected: self.d,
                got: self.breaker_schedule.len(),
            });
        }
        let schedule = BreakerSchedule::new(self.breaker_schedule.clone())?;
        if schedule.m() != grid.m() {
            return Err(SimError::Length {
                what: "breaker schedule columns",
                expected: grid.m(),
                got: schedule.m(),
            });
        }
        Ok(schedule)
    }
}

use serde::{Deserialize, Serialize};

use super::ModelError;

/// Sign of the speed-deviation coupling into the governor valve row.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GovernorSign {
    /// `−1/(R·T_G)`: droop opposes the speed deviation.
    #[default]
    Physics,
    /// `+1/(R·T_G)`: the coupling exactly as printed in the source matrix.
    AsPrinted,
}

impl GovernorSign {
    pub fn factor(self) -> f64 {
        match self {
            GovernorSign::Physics => -1.0,
            GovernorSign::AsPrinted => 1.0,
        }
    }
}

/// Physical parameters of one AGC-controlled synchronous generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgcParams {
    /// Droop feedback gain, per-unit (`1/R`).
    #[serde(rename = "D")]
    pub d: f64,
    /// Regulation constant, per-unit.
    #[serde(rename = "R")]
    pub r: f64,
    /// Inertia constant, seconds.
    #[serde(rename = "H")]
    pub h: f64,
    /// Turbine/transmission time constant, seconds.
    #[serde(rename = "T_TR")]
    pub t_tr: f64,
    /// Governor time constant, seconds.
    #[serde(rename = "T_G")]
    pub t_g: f64,
    /// Integrator feedback gain of the reference-power loop, per-unit.
    #[serde(rename = "K_ref")]
    pub k_ref: f64,
    #[serde(default = "default_frequency")]
    pub nominal_frequency_hz: f64,
    #[serde(default = "default_rating")]
    pub rated_power_mw: f64,
    #[serde(default)]
    pub governor_sign: GovernorSign,
}

fn default_frequency() -> f64 {
    60.0
}

fn default_rating() -> f64 {
    100.0
}

impl AgcParams {
    /// Parameters with `D` derived from `R`, 60 Hz, 100 MW and the physics sign.
    pub fn new(r: f64, h: f64, t_tr: f64, t_g: f64, k_ref: f64) -> Self {
        Self {
            d: 1.0 / r,
            r,
            h,
            t_tr,
            t_g,
            k_ref,
            nominal_frequency_hz: default_frequency(),
            rated_power_mw: default_rating(),
            governor_sign: GovernorSign::Physics,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let positive = [
            ("H", self.h),
            ("T_TR", self.t_tr),
            ("T_G", self.t_g),
            ("R", self.r),
            ("nominal_frequency_hz", self.nominal_frequency_hz),
            ("rated_power_mw", self.rated_power_mw),
        ];
        for (field, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return Err(ModelError::InvalidParam {
                    field,
                    reason: format!("must be finite and > 0, got {value}"),
                });
            }
        }
        if !self.k_ref.is_finite() {
            return Err(ModelError::InvalidParam {
                field: "K_ref",
                reason: "must be finite".into(),
            });
        }
        if !self.d.is_finite() || (self.d - 1.0 / self.r).abs() > 1e-12 * self.d.abs().max(1.0) {
            return Err(ModelError::DroopMismatch { d: self.d, r: self.r });
        }
        Ok(())
    }

    /// Hz per unit of per-unit speed deviation.
    pub fn hz_per_pu(&self) -> f64 {
        self.nominal_frequency_hz
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn droop_mismatch_names_both_fields() {
        let mut p = AgcParams::new(1.0, 5.0, 0.5, 0.2, 7.0);
        p.d = 2.0;
        let msg = p.validate().unwrap_err().to_string();
        assert!(msg.contains('D') && msg.contains('R'), "{msg}");
    }

    #[test]
    fn non_positive_inertia_rejected() {
        let mut p = AgcParams::new(1.0, 5.0, 0.5, 0.2, 7.0);
        p.h = 0.0;
        assert!(matches!(p.validate(), Err(ModelError::InvalidParam { field: "H", .. })));
    }

    #[test]
    fn deserializes_symbol_names() {
        let p: AgcParams = serde_json::from_str(r#"{"D":20,"R":0.05,"H":5,"T_TR":0.5,"T_G":0.2,"K_ref":7}"#).unwrap();
        assert_eq!(p.governor_sign, GovernorSign::Physics);
        assert_eq!(p.nominal_frequency_hz, 60.0);
        p.validate().unwrap();
    }
}

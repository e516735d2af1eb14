//! Grid fixtures shared by the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;
use std::sync::OnceLock;

use gridstorm::model::{load_grid_config, GridModel};

pub fn config_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../configs")
        .join(name)
}

pub fn load(name: &str) -> GridModel {
    load_grid_config(&std::fs::read_to_string(config_path(name)).unwrap()).unwrap()
}

/// The default three-generator grid with calibrated thresholds.
pub fn grid3() -> &'static GridModel {
    static GRID: OnceLock<GridModel> = OnceLock::new();
    GRID.get_or_init(|| load("grid3.json"))
}

/// The one-generator, two-breaker toy grid with calibrated thresholds.
pub fn toy1() -> &'static GridModel {
    static GRID: OnceLock<GridModel> = OnceLock::new();
    GRID.get_or_init(|| load("toy1.json"))
}

/// One generator with a single breaker of weight `w` and fixed thresholds.
pub fn single_breaker(w: f64, threshold: f64) -> GridModel {
    let doc = format!(
        r#"{{
  "generators": [{{ "params": {{ "D": 20.0, "R": 0.05, "H": 5.0, "T_TR": 0.5, "T_G": 0.2, "K_ref": 7.0 }} }}],
  "load_map": {{ "matrix": [[{w}]], "b_nom": [1] }},
  "thresholds": [{threshold}]
}}"#
    );
    load_grid_config(&doc).unwrap()
}

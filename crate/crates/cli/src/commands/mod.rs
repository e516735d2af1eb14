//! Command implementations and shared input loading.

pub mod compare;
pub mod falsify;
pub mod simulate;
pub mod train;
pub mod validate;

use std::path::Path;

use anyhow::{anyhow, Context};
use gridstorm::model::{load_grid_config, GridModel};
use gridstorm::sim::{AttackFile, AttackVector, BreakerSchedule, ScheduleFile};

/// Non-error command results, numbered by exit code.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Success = 0,
    PredicateFalse = 1,
    NoCounterExample = 3,
}

/// Command failures, numbered by exit code.
#[derive(Debug)]
pub enum Failure {
    Input(anyhow::Error),
    Internal(anyhow::Error),
}

impl Failure {
    pub fn input(e: impl Into<anyhow::Error>) -> Self {
        Failure::Input(e.into())
    }

    pub fn internal(e: impl Into<anyhow::Error>) -> Self {
        Failure::Internal(e.into())
    }

    pub fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Internal(_) => 4,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Input(e) | Failure::Internal(e) => e,
        }
    }
}

pub type CmdResult = Result<Outcome, Failure>;

pub fn read_bytes(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path)
        .with_context(|| format!("reading {}", path.display()))
        .map_err(Failure::Input)
}

fn utf8(bytes: &[u8], path: &Path) -> Result<String, Failure> {
    String::from_utf8(bytes.to_vec()).map_err(|_| Failure::input(anyhow!("{} is not UTF-8", path.display())))
}

/// Parses and builds the grid; returns it with the raw file bytes.
pub fn load_grid(path: &Path) -> Result<(GridModel, Vec<u8>), Failure> {
    let bytes = read_bytes(path)?;
    let grid = load_grid_config(&utf8(&bytes, path)?)
        .with_context(|| format!("grid config {}", path.display()))
        .map_err(Failure::Input)?;
    Ok((grid, bytes))
}

pub fn load_attack(path: &Path, grid: &GridModel) -> Result<(AttackFile, AttackVector, Vec<u8>), Failure> {
    let bytes = read_bytes(path)?;
    let ctx = || format!("attack file {}", path.display());
    let file = AttackFile::parse(&utf8(&bytes, path)?)
        .with_context(ctx)
        .map_err(Failure::Input)?;
    let attack = file.to_attack(grid).with_context(ctx).map_err(Failure::Input)?;
    Ok((file, attack, bytes))
}

/// Breaker schedule from a schedule file, or the breaker part of an attack file.
pub fn load_schedule(path: &Path, grid: &GridModel) -> Result<(BreakerSchedule, Vec<u8>), Failure> {
    let bytes = read_bytes(path)?;
    let doc = utf8(&bytes, path)?;
    let ctx = || format!("LAA file {}", path.display());
    let schedule = match ScheduleFile::parse(&doc) {
        Ok(file) => file.to_schedule(grid),
        Err(schedule_err) => match AttackFile::parse(&doc) {
            Ok(file) => file.to_attack(grid).map(|a| a.breaker_schedule),
            Err(_) => Err(schedule_err),
        },
    }
    .with_context(ctx)
    .map_err(Failure::Input)?;
    Ok((schedule, bytes))
}

pub fn write_out(out: &mut crate::output::OutputDir, name: &str, bytes: &[u8]) -> Result<(), Failure> {
    out.write(name, bytes).map_err(Failure::Input)
}

use std::fmt::Write;

use gridstorm::numerics::rng_stream;
use gridstorm::sim::{simulate, NoiseMode, SignalBasis, StealthWindow};

use super::{load_attack, load_grid, write_out, CmdResult, Failure, Outcome};
use crate::output::OutputDir;
use crate::report::{trace_plot, TraceSummary};
use crate::SimulateArgs;

/// Stream id of simulation noise.
pub const SIMULATE_STREAM: u64 = 0x51;

pub fn run(args: SimulateArgs) -> CmdResult {
    let c = &args.common;
    if args.horizon == 0 {
        return Err(Failure::input(anyhow::anyhow!("--horizon must be >= 1")));
    }
    let (grid, grid_bytes) = load_grid(&c.config)?;
    let mut out = OutputDir::new(c.out.as_deref(), "simulate", Some(c.seed)).map_err(Failure::Input)?;
    out.input("config", &grid_bytes);
    out.manifest.grid_hash = Some(grid.content_hash());
    let attack = match &args.attack {
        Some(path) => {
            let (_, attack, bytes) = load_attack(path, &grid)?;
            out.input("attack", &bytes);
            Some(attack)
        }
        None => None,
    };
    let basis: SignalBasis = c.signal_basis.map(Into::into).unwrap_or_default();
    let noise: NoiseMode = args.noise.into();
    out.option("horizon", args.horizon);
    out.option("noise", format!("{noise:?}").to_lowercase());
    out.option("signal_basis", crate::report::basis_name(basis));

    let mut rng = rng_stream(c.seed, SIMULATE_STREAM);
    let trace = simulate(
        &grid,
        attack.as_ref(),
        args.horizon,
        &grid.initial_state,
        noise,
        &mut rng,
    );
    let summary = TraceSummary::new(&trace, &grid, basis, StealthWindow::UntilUnsafe);

    let mut text = String::new();
    let _ = writeln!(text, "command: simulate");
    let _ = writeln!(text, "grid hash: {}", grid.content_hash());
    let _ = writeln!(text, "attack hash: {}", trace.attack_hash.as_deref().unwrap_or("none"));
    let _ = writeln!(
        text,
        "noise: {}, seed {}",
        if noise == NoiseMode::On { "on" } else { "off" },
        c.seed
    );
    let _ = writeln!(text, "thresholds: {:?}", grid.thresholds);
    summary.write_text(&mut text, &grid);
    print!("{text}");

    write_out(&mut out, "trace.csv", trace.to_csv(grid.ts).as_bytes())?;
    write_out(
        &mut out,
        "plot.svg",
        trace_plot(&trace, &grid, basis, "simulation").as_bytes(),
    )?;
    write_out(&mut out, "report.txt", text.as_bytes())?;
    out.finish().map_err(Failure::Input)?;
    Ok(Outcome::Success)
}

use std::fmt::Write;

use gridstorm::falsify::{noisy_success_fraction, FalsificationProblem};
use gridstorm::numerics::rng_stream;
use gridstorm::sim::{simulate, NoiseMode, SignalBasis, StealthWindow};

use super::{load_attack, load_grid, write_out, CmdResult, Failure, Outcome};
use crate::output::OutputDir;
use crate::report::{basis_name, trace_plot, TraceSummary};
use crate::ValidateArgs;

pub fn run(args: ValidateArgs) -> CmdResult {
    let c = &args.common;
    let (grid, grid_bytes) = load_grid(&c.config)?;
    let (file, attack, attack_bytes) = load_attack(&args.attack, &grid)?;
    let horizon = args
        .horizon
        .or_else(|| file.provenance.budgets.get("horizon").map(|h| *h as usize))
        .unwrap_or(file.d);
    if horizon == 0 {
        return Err(Failure::input(anyhow::anyhow!("horizon must be >= 1")));
    }
    let window = if file.provenance.budgets.get("whole_trace_stealth") == Some(&1) {
        StealthWindow::WholeTrace
    } else {
        StealthWindow::UntilUnsafe
    };
    let basis: SignalBasis = c.signal_basis.map(Into::into).unwrap_or_default();

    let mut out = OutputDir::new(c.out.as_deref(), "validate", Some(c.seed)).map_err(Failure::Input)?;
    out.input("config", &grid_bytes);
    out.input("attack", &attack_bytes);
    out.manifest.grid_hash = Some(grid.content_hash());
    out.option("horizon", horizon);
    out.option("signal_basis", basis_name(basis));
    out.option("noise_runs", args.noise_runs);

    let mut rng = rng_stream(0, 0);
    let trace = simulate(
        &grid,
        Some(&attack),
        horizon,
        &grid.initial_state,
        NoiseMode::Off,
        &mut rng,
    );
    let summary = TraceSummary::new(&trace, &grid, basis, window);

    let mut text = String::new();
    let _ = writeln!(text, "command: validate");
    let _ = writeln!(text, "grid hash: {}", grid.content_hash());
    let _ = writeln!(text, "attack hash: {}", attack.content_hash());
    let _ = writeln!(text, "noise: off");
    summary.write_text(&mut text, &grid);
    if let Some(rho) = file.provenance.rho {
        let agree = (rho - summary.rho).abs() <= 1e-9 * rho.abs().max(1.0);
        let _ = writeln!(
            text,
            "recorded robustness: {rho:.6e} ({})",
            if agree { "reproduced" } else { "differs" }
        );
    }
    if args.noise_runs > 0 {
        let mut problem = FalsificationProblem::new(
            grid.clone(),
            attack.breaker_schedule.clone(),
            file.range_pairs(),
            file.mask.clone(),
            1,
        );
        problem.horizon = horizon;
        problem.signal_basis = basis;
        problem.stealth_window = window;
        let frac = noisy_success_fraction(&problem, &attack, args.noise_runs, c.seed);
        let _ = writeln!(text, "noisy success fraction: {frac:.3} over {} seeds", args.noise_runs);
    }
    print!("{text}");

    write_out(&mut out, "trace.csv", trace.to_csv(grid.ts).as_bytes())?;
    write_out(
        &mut out,
        "plot.svg",
        trace_plot(&trace, &grid, basis, "validation").as_bytes(),
    )?;
    write_out(&mut out, "report.txt", text.as_bytes())?;
    out.finish().map_err(Failure::Input)?;
    Ok(if summary.report.success {
        Outcome::Success
    } else {
        Outcome::PredicateFalse
    })
}

use std::fmt::Write;

use gridstorm::falsify::{noisy_success_fraction, replay, synthesize_and_validate, FalsifyError, FalsifySpec};
use gridstorm::numerics::rng_stream;
use gridstorm::sim::{AttackFile, Provenance, StealthWindow};

use super::{load_grid, load_schedule, read_bytes, write_out, CmdResult, Failure, Outcome};
use crate::output::{to_json, OutputDir};
use crate::report::{basis_name, trace_plot, TraceSummary};
use crate::FalsifyArgs;

/// Stream id of the annealing search.
pub const FALSIFY_STREAM: u64 = 0xFA;

/// Worker threads: `GRIDSTORM_THREADS` if set, else the available parallelism.
fn thread_cap() -> usize {
    std::env::var("GRIDSTORM_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n >= 1)
        .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

pub fn run(args: FalsifyArgs) -> CmdResult {
    let c = &args.common;
    let (grid, grid_bytes) = load_grid(&c.config)?;
    let (laa, laa_bytes) = load_schedule(&args.laa, &grid)?;
    let spec_bytes = read_bytes(&args.falsify_config)?;
    let doc = String::from_utf8(spec_bytes.clone()).map_err(Failure::input)?;
    let mut spec = FalsifySpec::parse(&doc).map_err(|e| Failure::input(anyhow::anyhow!("falsify config: {e}")))?;
    if let Some(b) = c.signal_basis {
        spec.signal_basis = b.into();
    }
    let problem = spec
        .problem(&grid, laa)
        .map_err(|e| Failure::input(anyhow::anyhow!("falsify config: {e}")))?;
    let mut search = spec.search.clone();
    search.threads = thread_cap().min(search.restarts);

    let mut out = OutputDir::new(c.out.as_deref(), "falsify", Some(c.seed)).map_err(Failure::Input)?;
    out.input("config", &grid_bytes);
    out.input("laa", &laa_bytes);
    out.input("falsify_config", &spec_bytes);
    out.manifest.grid_hash = Some(grid.content_hash());
    out.option("signal_basis", basis_name(problem.signal_basis));

    let mut rng = rng_stream(c.seed, FALSIFY_STREAM);
    let outcome = synthesize_and_validate(&problem, &search, &mut rng).map_err(|e| match e {
        FalsifyError::Internal(_) => Failure::internal(anyhow::anyhow!("{e}")),
        _ => Failure::input(anyhow::anyhow!("{e}")),
    })?;

    let mut text = String::new();
    let _ = writeln!(text, "command: falsify");
    let _ = writeln!(text, "grid hash: {}", grid.content_hash());
    let _ = writeln!(text, "seed: {}", c.seed);
    let _ = writeln!(
        text,
        "d: {}, horizon: {}, control points: {}, budget: {}, restarts: {}",
        problem.d, problem.horizon, problem.control_points, search.budget, search.restarts
    );
    let _ = writeln!(text, "range: {:?}", problem.range);
    let _ = writeln!(text, "mask: {:?}", problem.mask);
    let Some(result) = &outcome.search else {
        let _ = writeln!(text, "range box is empty; no search run");
        let _ = writeln!(text, "result: no counter-example");
        print!("{text}");
        write_out(&mut out, "report.txt", text.as_bytes())?;
        out.finish().map_err(Failure::Input)?;
        return Ok(Outcome::NoCounterExample);
    };
    let _ = writeln!(text, "evaluations: {}", result.evaluations);
    let _ = writeln!(
        text,
        "best robustness: {:.6e} (restart {})",
        result.rho, result.best_restart
    );
    for h in &result.history {
        let _ = writeln!(
            text,
            "restart {}: {} evaluations, initial {:.6e}, best {:.6e}",
            h.restart, h.evaluations, h.initial_rho, h.best_rho
        );
    }

    let attack = match &outcome.attack {
        Some(a) => a,
        None => {
            let _ = writeln!(text, "result: no counter-example");
            print!("{text}");
            write_out(&mut out, "report.txt", text.as_bytes())?;
            out.finish().map_err(Failure::Input)?;
            return Ok(Outcome::NoCounterExample);
        }
    };
    let trace = replay(&problem, attack);
    let summary = TraceSummary::new(&trace, &grid, problem.signal_basis, problem.stealth_window);
    let _ = writeln!(text, "result: counter-example found and validated by replay");
    summary.write_text(&mut text, &grid);
    let noisy = (spec.noise_runs > 0).then(|| noisy_success_fraction(&problem, attack, spec.noise_runs, c.seed));
    if let Some(frac) = noisy {
        let _ = writeln!(text, "noisy success fraction: {frac:.3} over {} seeds", spec.noise_runs);
    }
    print!("{text}");

    let report = outcome.report.as_ref().expect("validated attack has a report");
    let mut provenance = Provenance {
        source: "falsify".into(),
        rho: Some(result.rho),
        k_prime: report.k_prime,
        first_detection: report.first_detection,
        ..Provenance::default()
    };
    provenance.seeds.insert("falsify".into(), c.seed);
    for (k, v) in [
        ("budget", search.budget),
        ("restarts", search.restarts),
        ("evaluations", result.evaluations),
        ("control_points", problem.control_points),
        ("horizon", problem.horizon),
    ] {
        provenance.budgets.insert(k.into(), v as u64);
    }
    if problem.stealth_window == StealthWindow::WholeTrace {
        provenance.budgets.insert("whole_trace_stealth".into(), 1);
    }
    let file = AttackFile::from_attack(attack, problem.range, provenance);
    write_out(&mut out, "attack.json", &to_json(&file))?;
    write_out(&mut out, "trace.csv", trace.to_csv(grid.ts).as_bytes())?;
    write_out(
        &mut out,
        "plot.svg",
        trace_plot(&trace, &grid, problem.signal_basis, "LAA + FDIA").as_bytes(),
    )?;
    write_out(&mut out, "report.txt", text.as_bytes())?;
    out.finish().map_err(Failure::Input)?;
    Ok(Outcome::Success)
}

use std::fmt::Write;

use gridstorm::model::GridModel;
use gridstorm::numerics::rng_stream;
use gridstorm::sim::{simulate, AttackVector, NoiseMode, SignalBasis, StealthWindow};

use super::{load_attack, load_grid, write_out, CmdResult, Failure, Outcome};
use crate::output::OutputDir;
use crate::report::{basis_name, trace_plot, TraceSummary};
use crate::CompareArgs;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Scenario {
    LaaOnly,
    FdiaOnly,
    Combined,
}

impl Scenario {
    fn slug(self) -> &'static str {
        match self {
            Scenario::LaaOnly => "laa",
            Scenario::FdiaOnly => "fdia",
            Scenario::Combined => "combined",
        }
    }

    fn title(self) -> &'static str {
        match self {
            Scenario::LaaOnly => "LAA only",
            Scenario::FdiaOnly => "FDIA only",
            Scenario::Combined => "LAA + FDIA",
        }
    }

    fn attack(self, grid: &GridModel, attack: &AttackVector) -> AttackVector {
        match self {
            Scenario::LaaOnly => AttackVector::load_only(grid, attack.breaker_schedule.clone()),
            Scenario::FdiaOnly => AttackVector::data_only(grid, attack.false_data.clone()),
            Scenario::Combined => attack.clone(),
        }
    }

    /// The expected qualitative behaviour of the scenario and whether it holds.
    fn check(self, s: &TraceSummary, grid: &GridModel, max_k_prime: usize) -> (String, bool) {
        let r = &s.report;
        match self {
            Scenario::LaaOnly => (
                "stealthy until unsafe and back in band at the end".into(),
                s.blow_up.is_none() && r.stealthy_until_unsafe && s.recovered(grid),
            ),
            Scenario::FdiaOnly => (
                "detected before any unsafe step".into(),
                match r.first_detection {
                    Some(det) => r.k_prime.is_none_or(|kp| kp > det),
                    None => false,
                },
            ),
            Scenario::Combined => (
                format!("out of band before first detection with k' <= {max_k_prime}"),
                r.success && r.k_prime.is_some_and(|kp| kp <= max_k_prime),
            ),
        }
    }
}

pub fn run(args: CompareArgs) -> CmdResult {
    let c = &args.common;
    if args.horizon == 0 {
        return Err(Failure::input(anyhow::anyhow!("--horizon must be >= 1")));
    }
    let (grid, grid_bytes) = load_grid(&c.config)?;
    let (_, attack, attack_bytes) = load_attack(&args.attack, &grid)?;
    let basis: SignalBasis = c.signal_basis.map(Into::into).unwrap_or_default();
    let selected: Vec<Scenario> = match (args.laa_only, args.fdia_only, args.combined) {
        (false, false, false) => vec![Scenario::LaaOnly, Scenario::FdiaOnly, Scenario::Combined],
        (l, f, k) => [(l, Scenario::LaaOnly), (f, Scenario::FdiaOnly), (k, Scenario::Combined)]
            .into_iter()
            .filter_map(|(on, s)| on.then_some(s))
            .collect(),
    };

    let mut out = OutputDir::new(c.out.as_deref(), "compare", Some(c.seed)).map_err(Failure::Input)?;
    out.input("config", &grid_bytes);
    out.input("attack", &attack_bytes);
    out.manifest.grid_hash = Some(grid.content_hash());
    out.option("horizon", args.horizon);
    out.option("signal_basis", basis_name(basis));
    out.option("max_k_prime", args.max_k_prime);
    out.option(
        "scenarios",
        selected.iter().map(|s| s.slug()).collect::<Vec<_>>().join(","),
    );

    let mut text = String::new();
    let _ = writeln!(text, "command: compare");
    let _ = writeln!(text, "grid hash: {}", grid.content_hash());
    let _ = writeln!(text, "attack hash: {}", attack.content_hash());
    let _ = writeln!(text, "horizon: {} steps, noise off", args.horizon);
    let mut all_hold = true;
    for scenario in selected {
        let variant = scenario.attack(&grid, &attack);
        let mut rng = rng_stream(0, 0);
        let trace = simulate(
            &grid,
            Some(&variant),
            args.horizon,
            &grid.initial_state,
            NoiseMode::Off,
            &mut rng,
        );
        let summary = TraceSummary::new(&trace, &grid, basis, StealthWindow::UntilUnsafe);
        let (expectation, holds) = scenario.check(&summary, &grid, args.max_k_prime);
        all_hold &= holds;
        let _ = writeln!(text, "\n[{}]", scenario.title());
        summary.write_text(&mut text, &grid);
        let _ = writeln!(
            text,
            "expected: {expectation}: {}",
            if holds { "holds" } else { "does not hold" }
        );
        let slug = scenario.slug();
        write_out(&mut out, &format!("trace_{slug}.csv"), trace.to_csv(grid.ts).as_bytes())?;
        write_out(
            &mut out,
            &format!("plot_{slug}.svg"),
            trace_plot(&trace, &grid, basis, scenario.title()).as_bytes(),
        )?;
    }
    let _ = writeln!(
        text,
        "\nordering: {}",
        if all_hold { "reproduced" } else { "not reproduced" }
    );
    print!("{text}");
    write_out(&mut out, "report.txt", text.as_bytes())?;
    out.finish().map_err(Failure::Input)?;
    Ok(if all_hold {
        Outcome::Success
    } else {
        Outcome::PredicateFalse
    })
}

use std::fmt::Write;

use gridstorm::numerics::rng_stream;
use gridstorm::rl::{ddpg_train, encode_weights, moving_average, reward_trend, AttackEnv, RlError, TrainSpec};
use gridstorm::sim::{Provenance, ScheduleFile, SignalBasis};

use super::{load_grid, read_bytes, write_out, CmdResult, Failure, Outcome};
use crate::output::{to_json, OutputDir};
use crate::report::{basis_name, reward_plot};
use crate::TrainArgs;

/// Stream id of the training run.
pub const TRAIN_STREAM: u64 = 0x7A;

pub fn run(args: TrainArgs) -> CmdResult {
    let c = &args.common;
    let (grid, grid_bytes) = load_grid(&c.config)?;
    let spec_bytes = read_bytes(&args.train_config)?;
    let doc = String::from_utf8(spec_bytes.clone()).map_err(Failure::input)?;
    let spec = TrainSpec::parse(&doc).map_err(|e| Failure::input(anyhow::anyhow!("train config: {e}")))?;
    let basis: SignalBasis = c.signal_basis.map(Into::into).unwrap_or(spec.signal_basis);

    let mut out = OutputDir::new(c.out.as_deref(), "train-laa", Some(c.seed)).map_err(Failure::Input)?;
    out.input("config", &grid_bytes);
    out.input("train_config", &spec_bytes);
    out.manifest.grid_hash = Some(grid.content_hash());
    out.option("signal_basis", basis_name(basis));

    let mut env = AttackEnv::new(grid.clone(), spec.episode.clone(), spec.reward_weights)
        .map_err(|e| Failure::input(anyhow::anyhow!("{e}")))?
        .with_variant(spec.reward_variant)
        .with_signal_basis(basis);
    let mut rng = rng_stream(c.seed, TRAIN_STREAM);
    let art = ddpg_train(&mut env, &spec.learner, &mut rng).map_err(|e| match e {
        RlError::Config(_) | RlError::Length { .. } => Failure::input(anyhow::anyhow!("{e}")),
        _ => Failure::internal(anyhow::anyhow!("{e}")),
    })?;

    let window = args.window.clamp(1, art.reward_curve.len().max(1));
    let moving = moving_average(&art.reward_curve, window);
    let trend = reward_trend(&art.reward_curve, window);
    let improving = trend.is_some_and(|(start, end)| end >= start);
    let (schedule, schedule_reward) = art.best_rollout();

    let mut provenance = Provenance {
        source: "train-laa".into(),
        ..Provenance::default()
    };
    provenance.seeds.insert("train".into(), c.seed);
    provenance
        .budgets
        .insert("episodes".into(), spec.episode.episodes as u64);
    provenance
        .budgets
        .insert("steps_per_episode".into(), spec.episode.steps_per_episode as u64);
    let schedule_file = ScheduleFile::from_schedule(schedule, provenance);

    let mut curve_csv = String::from("episode,reward\n");
    for (i, r) in art.reward_curve.iter().enumerate() {
        let _ = writeln!(curve_csv, "{i},{}", gridstorm::fmt_sig9(*r));
    }

    let mut text = String::new();
    let _ = writeln!(text, "command: train-laa");
    let _ = writeln!(text, "grid hash: {}", grid.content_hash());
    let _ = writeln!(text, "seed: {}", c.seed);
    let _ = writeln!(
        text,
        "episodes: {} x {} steps (action repeat {})",
        spec.episode.episodes, spec.episode.steps_per_episode, spec.episode.action_repeat
    );
    let _ = writeln!(
        text,
        "best episode: {} (reward {:.4})",
        art.best_episode, art.best_reward
    );
    let _ = writeln!(text, "greedy rollout reward: {:.4}", art.greedy_reward);
    let _ = writeln!(text, "exported schedule reward: {schedule_reward:.4}");
    match trend {
        Some((start, end)) => {
            let _ = writeln!(text, "moving average (window {window}): start {start:.4}, end {end:.4}");
        }
        None => {
            let _ = writeln!(text, "moving average: not enough episodes");
        }
    }
    let _ = writeln!(text, "improving: {}", if improving { "yes" } else { "no" });
    print!("{text}");

    write_out(&mut out, "actor.gsrl", &encode_weights(&art.actor))?;
    write_out(&mut out, "critic.gsrl", &encode_weights(&art.critic))?;
    write_out(&mut out, "reward.csv", curve_csv.as_bytes())?;
    write_out(
        &mut out,
        "reward.svg",
        reward_plot(&art.reward_curve, &moving).as_bytes(),
    )?;
    write_out(&mut out, "best_schedule.json", &to_json(&schedule_file))?;
    write_out(&mut out, "report.txt", text.as_bytes())?;
    out.finish().map_err(Failure::Input)?;
    if args.assert_improving && !improving {
        return Ok(Outcome::PredicateFalse);
    }
    Ok(Outcome::Success)
}

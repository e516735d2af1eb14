//! Acceptance criteria: one PASS/FAIL line per criterion.
//!
//! Runs without the test harness so the lines are always printed; exits non-zero
//! when any criterion fails.

use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use gridstorm::falsify::{falsify_sa, objective, Candidate, FalsificationProblem};
use gridstorm::model::{build_continuous, discretize_zoh, load_grid_config, AgcParams, GridModel};
use gridstorm::numerics::{dare_residual, mat_exp, rng_stream, solve_dare, spectral_radius, Matrix};
use gridstorm::rl::{ddpg_train, reward_trend, AttackEnv, Mlp, OutputActivation, Policy, TrainSpec};
use gridstorm::sim::{
    check_success, robustness, simulate, AttackFile, AttackVector, BreakerSchedule, FalseDataSchedule, NoiseMode,
    SignalBasis, SimTrace,
};
use statrs::distribution::{ContinuousCDF, Normal};

fn configs() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn grid(name: &str) -> GridModel {
    load_grid_config(&std::fs::read_to_string(configs().join(name)).unwrap()).unwrap()
}

fn single_breaker(w: f64, threshold: f64) -> GridModel {
    let doc = format!(
        r#"{{
  "generators": [{{ "params": {{ "D": 20.0, "R": 0.05, "H": 5.0, "T_TR": 0.5, "T_G": 0.2, "K_ref": 7.0 }} }}],
  "load_map": {{ "matrix": [[{w}]], "b_nom": [1] }},
  "thresholds": [{threshold}]
}}"#
    );
    load_grid_config(&doc).unwrap()
}

/// Outcome of one criterion: pass flag plus a one-line detail.
struct Verdict {
    pass: bool,
    detail: String,
}

fn run(id: usize, name: &str, limit: Duration, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let pass = v.pass && elapsed <= limit;
    println!(
        "{} criterion {id} ({name}): {}; {:.1} s (limit {} s)",
        if pass { "PASS" } else { "FAIL" },
        v.detail,
        elapsed.as_secs_f64(),
        limit.as_secs()
    );
    pass
}

// ---------------------------------------------------------------------------
// 1. Numerics

fn random_matrix(n: usize, m: usize, scale: f64, seed: u64) -> Matrix {
    let mut rng = rng_stream(seed, 0xAC1);
    Matrix::new(n, m, (0..n * m).map(|_| scale * rng.normal()).collect()).unwrap()
}

fn numerics() -> Verdict {
    let mut exp_err = 0.0f64;
    for seed in 0..50 {
        let n = 2 + seed as usize % 5;
        let a = random_matrix(n, n, 1.5, seed);
        let prod = mat_exp(&a).unwrap().mul(&mat_exp(&a.scale(-1.0)).unwrap());
        exp_err = exp_err.max(prod.max_abs_diff(&Matrix::identity(n)));
    }
    let mut dare_err = 0.0f64;
    let mut solved = 0;
    for seed in 0..20u64 {
        let n = 2 + seed as usize % 3;
        let m = 1 + seed as usize % 2;
        let a = random_matrix(n, n, 0.5, 100 + seed);
        let g = random_matrix(n, m, 1.0, 200 + seed);
        let (q, r) = (Matrix::identity(n), Matrix::identity(m));
        if let Ok(p) = solve_dare(&a, &g, &q, &r) {
            solved += 1;
            dare_err = dare_err.max(dare_residual(&a, &g, &q, &r, &p).unwrap());
        }
    }
    Verdict {
        pass: exp_err <= 1e-8 && dare_err <= 1e-8 && solved == 20,
        detail: format!("max ‖e^A e^-A - I‖ = {exp_err:.1e}, max DARE residual = {dare_err:.1e} over {solved}/20"),
    }
}

// ---------------------------------------------------------------------------
// 2. Model

fn euler_column(a: &Matrix, b: &Matrix, x0: &[f64], u: f64, ts: f64, steps: usize) -> Vec<f64> {
    let dt = ts / steps as f64;
    let mut x = x0.to_vec();
    for _ in 0..steps {
        let ax = a.mul_vec(&x);
        for i in 0..x.len() {
            x[i] += dt * (ax[i] + b[(i, 0)] * u);
        }
    }
    x
}

fn model() -> Verdict {
    let params = AgcParams::new(0.05, 5.0, 0.5, 0.2, 7.0);
    let css = build_continuous(&params).unwrap();
    let d = discretize_zoh(&css, 0.01).unwrap();
    let mut zoh_err = 0.0f64;
    for j in 0..=4 {
        let (x0, u) = if j < 4 {
            let mut e = vec![0.0; 4];
            e[j] = 1.0;
            (e, 0.0)
        } else {
            (vec![0.0; 4], 1.0)
        };
        let x = euler_column(&css.a_c, &css.b_c, &x0, u, 0.01, 200_000);
        for i in 0..4 {
            let want = if j < 4 { d.a[(i, j)] } else { d.b[(i, 0)] };
            zoh_err = zoh_err.max((x[i] - want).abs());
        }
    }
    let mut worst_radius = 0.0f64;
    let mut residue_zero = true;
    for g in [grid("grid3.json"), grid("toy1.json")] {
        for gen in &g.generators {
            let p = &gen.plant;
            worst_radius = worst_radius.max(spectral_radius(&p.a.sub(&p.l.mul(&p.c))).unwrap());
        }
        let mut rng = rng_stream(0, 0);
        let trace = simulate(&g, None, 1000, &g.initial_state, NoiseMode::Off, &mut rng);
        residue_zero &= trace.records.iter().flat_map(|r| &r.gens).all(|x| x.r == [0.0, 0.0]);
    }
    Verdict {
        pass: zoh_err <= 1e-6 && worst_radius < 1.0 && residue_zero,
        detail: format!(
            "ZOH vs Euler {zoh_err:.1e}, max ρ(A-LC) = {worst_radius:.4}, nominal residue identically zero: {residue_zero}"
        ),
    }
}

// ---------------------------------------------------------------------------
// 3. Predicate and robustness

fn linear_detect(trace: &SimTrace, th: &[f64]) -> Option<usize> {
    for rec in &trace.records {
        for (i, g) in rec.gens.iter().enumerate() {
            if g.r_inf > th[i] {
                return Some(rec.k);
            }
        }
    }
    None
}

fn linear_first_unsafe(trace: &SimTrace, g: &GridModel) -> Option<usize> {
    let (lo, hi) = (g.envelope.f_lo, g.envelope.f_hi);
    trace
        .records
        .iter()
        .find(|r| r.gens.iter().any(|x| x.f_meas_hz < lo || x.f_meas_hz > hi))
        .map(|r| r.k)
}

fn random_attack(g: &GridModel, d: usize, amp: f64, p_open: f64, seed: u64) -> AttackVector {
    let mut rng = rng_stream(seed, 0x3A);
    let rows = (0..d)
        .map(|_| (0..g.m()).map(|_| u8::from(rng.uniform() >= p_open)).collect())
        .collect();
    let values = (0..g.n())
        .map(|_| {
            (0..d)
                .map(|_| [amp * rng.uniform_in(-1.0, 1.0), amp * rng.uniform_in(-1.0, 1.0)])
                .collect()
        })
        .collect();
    let data = FalseDataSchedule::new(values, vec![[1, 1]; g.n()]).unwrap();
    AttackVector::new(BreakerSchedule::new(rows).unwrap(), data).unwrap()
}

fn predicate() -> Verdict {
    let g = grid("grid3.json");
    let mut disagreements = 0;
    let mut detect_mismatch = 0;
    let mut successes = 0;
    let traces = 1000;
    for seed in 0..traces {
        let amp = [0.0, 0.002, 0.005, 0.01, 0.03][seed as usize % 5];
        let p_open = [0.2, 0.5, 0.9, 1.0][(seed as usize / 5) % 4];
        let attack = random_attack(&g, 80, amp, p_open, seed);
        let mut rng = rng_stream(0, 0);
        let trace = simulate(&g, Some(&attack), 120, &g.initial_state, NoiseMode::Off, &mut rng);
        let rep = check_success(&trace, &g.envelope, &g.thresholds, SignalBasis::Measured);
        let rho = robustness(&trace, &g.envelope, &g.thresholds, SignalBasis::Measured);
        let det = linear_detect(&trace, &g.thresholds);
        let want = linear_first_unsafe(&trace, &g).is_some_and(|kp| det.is_none_or(|d| d >= kp));
        disagreements += usize::from((rho < 0.0) != rep.success || rep.success != want);
        detect_mismatch += usize::from(rep.first_detection != det);
        successes += usize::from(rep.success);
    }
    Verdict {
        pass: disagreements == 0 && detect_mismatch == 0 && successes > 0 && successes < traces as usize,
        detail: format!(
            "{traces} simulated traces ({successes} successful): {disagreements} sign disagreements, {detect_mismatch} detect mismatches"
        ),
    }
}

// ---------------------------------------------------------------------------
// 4. Reinforcement learning

/// Worst relative error of backprop against central differences.
fn gradient_error() -> f64 {
    let mut worst = 0.0f64;
    for seed in 0..4 {
        for act in [OutputActivation::Tanh, OutputActivation::Identity] {
            let mut rng = rng_stream(seed, 0x6C);
            let mut net = Mlp::new(&[6, 16, 16, 3], act, &mut rng);
            let x: Vec<f64> = (0..6).map(|_| rng.normal()).collect();
            let w: Vec<f64> = (0..3).map(|_| rng.normal()).collect();
            let obj = |n: &Mlp| n.forward(&x).iter().zip(&w).map(|(y, w)| y * w).sum::<f64>();
            let cache = net.forward_cached(&x);
            let mut grads = vec![0.0; net.num_params()];
            net.backward(&cache, &w, Some(&mut grads));
            let h = 1e-6;
            for i in 0..net.num_params() {
                let orig = net.params()[i];
                net.params_mut()[i] = orig + h;
                let up = obj(&net);
                net.params_mut()[i] = orig - h;
                let down = obj(&net);
                net.params_mut()[i] = orig;
                let fd = (up - down) / (2.0 * h);
                worst = worst.max((grads[i] - fd).abs() / grads[i].abs().max(fd.abs()).max(1e-6));
            }
        }
    }
    worst
}

/// Cumulative rewards of noisy evaluation episodes under `act`.
fn evaluate(
    env: &mut AttackEnv,
    episodes: usize,
    seed: u64,
    mut act: impl FnMut(&gridstorm::rl::Observation, &mut gridstorm::numerics::RngStream) -> Vec<f64>,
) -> Vec<f64> {
    let mut rng = rng_stream(seed, 0xE7);
    (0..episodes)
        .map(|_| {
            let mut obs = env.reset(&mut rng);
            let mut total = 0.0;
            loop {
                let a = act(&obs, &mut rng);
                let out = env.step(&a).unwrap();
                total += out.reward;
                obs = out.obs;
                if out.done {
                    break total;
                }
            }
        })
        .collect()
}

/// One-sided Mann–Whitney p-value for `a` stochastically larger than `b`
/// (normal approximation with tie correction and continuity correction).
fn mann_whitney_greater(a: &[f64], b: &[f64]) -> f64 {
    let mut all: Vec<(f64, usize)> = a.iter().map(|v| (*v, 0)).chain(b.iter().map(|v| (*v, 1))).collect();
    all.sort_by(|x, y| x.0.total_cmp(&y.0));
    let n = all.len();
    let mut ranks = vec![0.0; n];
    let mut tie_term = 0.0;
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && all[j + 1].0 == all[i].0 {
            j += 1;
        }
        let t = (j - i + 1) as f64;
        tie_term += t * t * t - t;
        for r in &mut ranks[i..=j] {
            *r = (i + j) as f64 / 2.0 + 1.0;
        }
        i = j + 1;
    }
    let (n1, n2) = (a.len() as f64, b.len() as f64);
    let r1: f64 = all.iter().zip(&ranks).filter(|(x, _)| x.1 == 0).map(|(_, r)| r).sum();
    let u = r1 - n1 * (n1 + 1.0) / 2.0;
    let nn = n1 + n2;
    let var = n1 * n2 / 12.0 * ((nn + 1.0) - tie_term / (nn * (nn - 1.0)));
    if var <= 0.0 {
        return 1.0;
    }
    let z = (u - n1 * n2 / 2.0 - 0.5) / var.sqrt();
    1.0 - Normal::standard().cdf(z)
}

fn rl() -> Verdict {
    let g = grid("toy1.json");
    let spec = TrainSpec::parse(&std::fs::read_to_string(configs().join("train-toy1.json")).unwrap()).unwrap();
    let grad = gradient_error();
    let mut improving = 0;
    let mut trained = Vec::new();
    let mut random = Vec::new();
    let mut trends = Vec::new();
    for seed in 0..3u64 {
        let mut env = AttackEnv::new(g.clone(), spec.episode.clone(), spec.reward_weights).unwrap();
        let mut rng = rng_stream(seed, 0x7A);
        let art = ddpg_train(&mut env, &spec.learner, &mut rng).unwrap();
        let (start, end) = reward_trend(&art.reward_curve, 10).unwrap();
        improving += usize::from(end >= start);
        trends.push(format!("{start:.0}->{end:.0}"));

        let mut eval_cfg = spec.episode.clone();
        eval_cfg.noise = NoiseMode::On;
        let mut eval_env = AttackEnv::new(g.clone(), eval_cfg, spec.reward_weights).unwrap();
        let policy: Policy = art.policy.clone();
        trained.extend(evaluate(&mut eval_env, 20, seed, |obs, _| policy.act(obs)));
        let m = g.m();
        random.extend(evaluate(&mut eval_env, 20, seed + 100, |_, rng| {
            (0..m).map(|_| rng.uniform_in(-1.0, 1.0)).collect()
        }));
    }
    let p = mann_whitney_greater(&trained, &random);
    let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
    Verdict {
        pass: improving >= 2 && p < 0.05 && grad <= 1e-4,
        detail: format!(
            "trend improving in {improving}/3 seeds [{}], trained mean {:.1} vs random {:.1} (one-sided rank p = {p:.2e}), gradient error {grad:.1e}",
            trends.join(", "),
            mean(&trained),
            mean(&random)
        ),
    }
}

// ---------------------------------------------------------------------------
// 5. Falsification

fn constructed() -> FalsificationProblem {
    let g = single_breaker(0.15, 0.003);
    let laa = BreakerSchedule::constant(100, &[0]).unwrap();
    FalsificationProblem::new(g, laa, [(-0.006, 0.006), (0.0, 0.0)], vec![[1, 0]], 2)
}

fn falsification() -> Verdict {
    let p = constructed();
    let (lo, hi) = p.range[0];
    let n = 41;
    let mut hits = 0;
    for i in 0..n {
        for j in 0..n {
            let a = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            let b = lo + (hi - lo) * j as f64 / (n - 1) as f64;
            let c = Candidate {
                channels: p.channels(),
                knots: vec![vec![a, b]],
            };
            hits += usize::from(objective(&p, &c) < 0.0);
        }
    }
    let region = hits as f64 / (n * n) as f64;
    let wins = (0..10)
        .filter(|&s| falsify_sa(&p, 2000, 4, &mut rng_stream(s, 0xFA)).success)
        .count();

    let mut oracle = constructed();
    oracle.range[0] = (-0.003, 0.003);
    oracle.control_points = 1;
    oracle.quantization = Some(101);
    let (lo, hi) = oracle.range[0];
    let grid_min = (0..101)
        .map(|i| {
            let v = oracle.project(0, lo + (hi - lo) * i as f64 / 100.0);
            objective(
                &oracle,
                &Candidate {
                    channels: oracle.channels(),
                    knots: vec![vec![v]],
                },
            )
        })
        .fold(f64::INFINITY, f64::min);
    let sa = falsify_sa(&oracle, 2000, 4, &mut rng_stream(0, 0xFA));
    let oracle_ok = grid_min > 0.0 && sa.rho <= grid_min + 1e-9;
    Verdict {
        pass: region >= 0.05 && wins >= 9 && oracle_ok,
        detail: format!(
            "violating region {:.1}% of box, success in {wins}/10 seeds at 2000 evaluations, 1-D SA min {:.6e} vs grid min {grid_min:.6e}",
            100.0 * region,
            sa.rho
        ),
    }
}

// ---------------------------------------------------------------------------
// 6 and 7. Command line

fn gridstorm(args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_gridstorm"))
        .args(args)
        .output()
        .unwrap();
    (
        out.status.code().unwrap_or(-1),
        String::from_utf8_lossy(&out.stdout).into_owned(),
    )
}

fn cfg(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

fn s(p: &Path) -> String {
    p.to_string_lossy().into_owned()
}

struct Pipeline {
    train: PathBuf,
    falsify: PathBuf,
    compare: PathBuf,
    codes: [i32; 3],
    compare_report: String,
}

fn pipeline(root: &Path, seed: &str) -> Pipeline {
    let (train, falsify, compare) = (root.join("train"), root.join("falsify"), root.join("compare"));
    let grid = cfg("grid3.json");
    let (c1, _) = gridstorm(&[
        "train-laa",
        "--config",
        &grid,
        "--train-config",
        &cfg("train-grid3.json"),
        "--seed",
        seed,
        "--out",
        &s(&train),
    ]);
    let (c2, _) = gridstorm(&[
        "falsify",
        "--config",
        &grid,
        "--laa",
        &s(&train.join("best_schedule.json")),
        "--falsify-config",
        &cfg("falsify-grid3.json"),
        "--seed",
        seed,
        "--out",
        &s(&falsify),
    ]);
    let (c3, report) = gridstorm(&[
        "compare",
        "--config",
        &grid,
        "--attack",
        &s(&falsify.join("attack.json")),
        "--out",
        &s(&compare),
    ]);
    Pipeline {
        train,
        falsify,
        compare,
        codes: [c1, c2, c3],
        compare_report: report,
    }
}

fn end_to_end(root: &Path) -> Verdict {
    let p = pipeline(root, "0");
    let k_prime = std::fs::read_to_string(p.falsify.join("attack.json"))
        .ok()
        .and_then(|doc| AttackFile::parse(&doc).ok())
        .and_then(|f| f.provenance.k_prime);
    let ordering = p.compare_report.contains("ordering: reproduced");
    Verdict {
        pass: p.codes == [0, 0, 0] && ordering && k_prime.is_some_and(|k| k <= 50),
        detail: format!(
            "exit codes {:?}, ordering reproduced: {ordering}, combined k' = {}",
            p.codes,
            k_prime.map_or("none".into(), |k| k.to_string())
        ),
    }
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<_> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                std::fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    out.sort();
    out
}

fn reproducibility(root: &Path) -> Verdict {
    let grid = cfg("grid3.json");
    let mut dirs = Vec::new();
    for run in ["a", "b"] {
        let base = root.join(run);
        let p = pipeline(&base, "7");
        let attack = s(&p.falsify.join("attack.json"));
        let sim = base.join("simulate");
        let val = base.join("validate");
        gridstorm(&[
            "simulate",
            "--config",
            &grid,
            "--attack",
            &attack,
            "--noise",
            "on",
            "--seed",
            "7",
            "--out",
            &s(&sim),
        ]);
        gridstorm(&[
            "validate",
            "--config",
            &grid,
            "--attack",
            &attack,
            "--noise-runs",
            "3",
            "--seed",
            "7",
            "--out",
            &s(&val),
        ]);
        dirs.push([p.train, p.falsify, p.compare, sim, val]);
    }
    let mut differing = Vec::new();
    let mut compared = 0;
    for (a, b) in dirs[0].iter().zip(&dirs[1]) {
        let (fa, fb) = (files(a), files(b));
        compared += fa.len();
        if fa != fb || fa.is_empty() {
            differing.push(a.file_name().unwrap().to_string_lossy().into_owned());
        }
    }
    Verdict {
        pass: differing.is_empty(),
        detail: format!(
            "{compared} output files across 5 commands; differing: {}",
            if differing.is_empty() {
                "none".into()
            } else {
                differing.join(", ")
            }
        ),
    }
}

fn main() {
    let tmp = tempfile::tempdir().unwrap();
    let results = [
        run(1, "numerics", Duration::from_secs(5), numerics),
        run(2, "model", Duration::from_secs(60), model),
        run(3, "predicate and robustness", Duration::from_secs(60), predicate),
        run(4, "reinforcement learning", Duration::from_secs(600), rl),
        run(5, "falsification", Duration::from_secs(300), falsification),
        run(6, "end-to-end ordering", Duration::from_secs(900), || {
            end_to_end(&tmp.path().join("e2e"))
        }),
        run(7, "reproducibility", Duration::from_secs(900), || {
            reproducibility(&tmp.path().join("repro"))
        }),
    ];
    let passed = results.iter().filter(|p| **p).count();
    println!("acceptance: {passed}/{} criteria pass", results.len());
    if passed != results.len() {
        std::process::exit(1);
    }
}

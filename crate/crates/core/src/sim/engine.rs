use serde::{Deserialize, Serialize};

use super::trace::{GenRecord, SimTrace, StepRecord};
use super::{apply_load_map, AttackVector};
use crate::model::{GridModel, OUTPUTS, STATES};
use crate::numerics::{Matrix, RngStream};

type Vec4 = [f64; STATES];
type Vec2 = [f64; OUTPUTS];

/// Whether process and measurement noise are injected.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseMode {
    Off,
    On,
}

/// Fixed-size copy of one generator's loop matrices.
#[derive(Clone, Debug)]
struct CompiledLoop {
    a: [Vec4; STATES],
    b: Vec4,
    c: [Vec4; OUTPUTS],
    k: Vec4,
    l: [Vec2; STATES],
    droop: f64,
    q_factor: [Vec4; STATES],
    r_factor: [Vec2; OUTPUTS],
}

fn to_array<const R: usize, const C: usize>(m: &Matrix) -> [[f64; C]; R] {
    assert_eq!(m.shape(), (R, C));
    let mut out = [[0.0; C]; R];
    for (i, row) in out.iter_mut().enumerate() {
        row.copy_from_slice(m.row(i));
    }
    out
}

impl CompiledLoop {
    fn new(grid: &GridModel, gen: usize) -> Self {
        let g = &grid.generators[gen];
        let p = &g.plant;
        let b: [[f64; 1]; STATES] = to_array(&p.b);
        let k: [Vec4; 1] = to_array(&p.k);
        Self {
            a: to_array(&p.a),
            b: b.map(|r| r[0]),
            c: to_array(&p.c),
            k: k[0],
            l: to_array(&p.l),
            droop: g.params.d,
            q_factor: to_array(&p.q_n.psd_factor().expect("validated covariance")),
            r_factor: to_array(&p.r_n.psd_factor().expect("validated covariance")),
        }
    }

    fn output(&self, x: &Vec4) -> Vec2 {
        let mut y = [0.0; OUTPUTS];
        for (yi, ci) in y.iter_mut().zip(&self.c) {
            *yi = dot(ci, x);
        }
        y
    }
}

fn dot<const N: usize>(a: &[f64; N], b: &[f64; N]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Mutable closed-loop state of all generators between steps.
#[derive(Clone, Debug)]
pub struct LoopState {
    loops: Vec<CompiledLoop>,
    x: Vec<Vec4>,
    xhat: Vec<Vec4>,
    r: Vec<Vec2>,
    k: usize,
    noise: NoiseMode,
    blown_up: bool,
}

impl LoopState {
    /// Initializes plant and estimator at `init` and returns the step-0 record.
    pub fn start(grid: &GridModel, init: &[Vec4], noise: NoiseMode) -> (Self, StepRecord) {
        assert_eq!(init.len(), grid.n(), "init length must equal generator count");
        let loops: Vec<CompiledLoop> = (0..grid.n()).map(|i| CompiledLoop::new(grid, i)).collect();
        let mut gens = Vec::with_capacity(grid.n());
        let mut rs = Vec::with_capacity(grid.n());
        for (i, cl) in loops.iter().enumerate() {
            let x = init[i];
            let y = cl.output(&x);
            let u = grid.scheduled_load.at(i, 0) + dot(&cl.k, &x);
            let r = [0.0; OUTPUTS];
            rs.push(r);
            gens.push(GenRecord::assemble(grid, i, x, x, u, u, y, y, r, cl.droop * x[0]));
        }
        let state = Self {
            loops,
            x: init.to_vec(),
            xhat: init.to_vec(),
            r: rs,
            k: 0,
            noise,
            blown_up: false,
        };
        (state, StepRecord { k: 0, gens })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn blown_up(&self) -> bool {
        self.blown_up
    }

    pub fn true_state(&self, gen: usize) -> Vec4 {
        self.x[gen]
    }

    pub fn estimate(&self, gen: usize) -> Vec4 {
        self.xhat[gen]
    }

    /// Advances one sampling period with the given breaker state and per-generator
    /// false data. Returns `None` (and latches the blow-up flag) on non-finite state.
    pub fn step(
        &mut self,
        grid: &GridModel,
        breakers: &[u8],
        false_data: &dyn Fn(usize) -> Vec2,
        rng: &mut RngStream,
    ) -> Option<StepRecord> {
        if self.blown_up {
            return None;
        }
        let dpl = apply_load_map(&grid.load_map, breakers).expect("breaker row matches grid");
        let prev = self.k;
        let k = prev + 1;
        let mut gens = Vec::with_capacity(grid.n());
        for (i, cl) in self.loops.iter().enumerate() {
            let x = self.x[i];
            let xhat = self.xhat[i];
            let r_prev = self.r[i];
            let u_bel = grid.scheduled_load.at(i, prev) + dot(&cl.k, &xhat);
            let u_act = u_bel + dpl[i];

            let (w, v) = match self.noise {
                NoiseMode::Off => ([0.0; STATES], [0.0; OUTPUTS]),
                NoiseMode::On => {
                    let zw: Vec4 = std::array::from_fn(|_| rng.normal());
                    let zv: Vec2 = std::array::from_fn(|_| rng.normal());
                    (
                        std::array::from_fn(|s| dot(&cl.q_factor[s], &zw)),
                        std::array::from_fn(|q| dot(&cl.r_factor[q], &zv)),
                    )
                }
            };

            let x_next: Vec4 = std::array::from_fn(|s| dot(&cl.a[s], &x) + cl.b[s] * u_act + w[s]);
            let xhat_next: Vec4 =
                std::array::from_fn(|s| dot(&cl.a[s], &xhat) + cl.b[s] * u_bel + dot(&cl.l[s], &r_prev));
            let y = cl.output(&x_next);
            let a_y = false_data(i);
            let y_meas: Vec2 = std::array::from_fn(|q| y[q] + a_y[q] + v[q]);
            let yhat = cl.output(&xhat_next);
            let r: Vec2 = std::array::from_fn(|q| y_meas[q] - yhat[q]);

            if !(x_next.iter().chain(&xhat_next).chain(&r).all(|v| v.is_finite())) {
                self.blown_up = true;
                return None;
            }
            self.x[i] = x_next;
            self.xhat[i] = xhat_next;
            self.r[i] = r;
            let pe = dpl[i] + cl.droop * x_next[0];
            gens.push(GenRecord::assemble(
                grid, i, x_next, xhat_next, u_bel, u_act, y, y_meas, r, pe,
            ));
        }
        self.k = k;
        Some(StepRecord { k, gens })
    }
}

/// Simulates `horizon` steps; the attack (if any) applies to steps `1..=d` and
/// reverts to nominal afterwards. Trace metadata (hashes, seed) is filled in.
pub fn simulate(
    grid: &GridModel,
    attack: Option<&AttackVector>,
    horizon: usize,
    init: &[Vec4],
    noise: NoiseMode,
    rng: &mut RngStream,
) -> SimTrace {
    let mut trace = simulate_records(grid, attack, horizon, init, noise, rng);
    trace.grid_hash = Some(grid.content_hash());
    trace.attack_hash = attack.map(AttackVector::content_hash);
    trace.seed = Some(rng.seed());
    trace.stream = Some(rng.stream_id());
    trace
}

/// [`simulate`] without the metadata hashes; used in inner search loops.
pub fn simulate_records(
    grid: &GridModel,
    attack: Option<&AttackVector>,
    horizon: usize,
    init: &[Vec4],
    noise: NoiseMode,
    rng: &mut RngStream,
) -> SimTrace {
    if let Some(a) = attack {
        a.check_against(grid).expect("attack dimensions match grid");
    }
    let (mut state, first) = LoopState::start(grid, init, noise);
    let mut records = Vec::with_capacity(horizon + 1);
    records.push(first);
    let nominal = grid.load_map.b_nom.clone();
    let mut blow_up = None;
    for step in 0..horizon {
        let active = attack.filter(|a| step < a.d());
        let breakers: &[u8] = match active {
            Some(a) => a.breaker_schedule.row(step),
            None => &nominal,
        };
        let fd = |gen: usize| match active {
            Some(a) => a.false_data.at(gen, step),
            None => [0.0; OUTPUTS],
        };
        match state.step(grid, breakers, &fd, rng) {
            Some(rec) => records.push(rec),
            None => {
                blow_up = Some(step + 1);
                break;
            }
        }
    }
    SimTrace {
        records,
        thresholds: grid.thresholds.clone(),
        seed: None,
        stream: None,
        grid_hash: None,
        attack_hash: None,
        blow_up,
    }
}

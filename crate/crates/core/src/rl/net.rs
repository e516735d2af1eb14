use serde::{Deserialize, Serialize};

use crate::numerics::RngStream;

/// Activation applied to the final layer; hidden layers always use ReLU.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputActivation {
    Tanh,
    Identity,
}

/// Fully connected network with ReLU hidden layers and flat parameter storage.
///
/// Layer `l` stores its `out×in` weights row-major followed by its `out` biases.
#[derive(Clone, Debug, PartialEq)]
pub struct Mlp {
    sizes: Vec<usize>,
    params: Vec<f64>,
    output: OutputActivation,
}

/// Per-layer activations recorded by [`Mlp::forward_cached`].
#[derive(Clone, Debug)]
pub struct ForwardCache {
    /// `acts[0]` is the input; `acts[l+1]` is the output of layer `l`.
    acts: Vec<Vec<f64>>,
}

impl ForwardCache {
    pub fn output(&self) -> &[f64] {
        self.acts.last().expect("non-empty cache")
    }
}

impl Mlp {
    /// Zero-initialized network.
    pub fn zeros(sizes: &[usize], output: OutputActivation) -> Self {
        assert!(sizes.len() >= 2 && sizes.iter().all(|s| *s > 0), "invalid layer sizes");
        let count = sizes.windows(2).map(|w| w[0] * w[1] + w[1]).sum();
        Self {
            sizes: sizes.to_vec(),
            params: vec![0.0; count],
            output,
        }
    }

    /// Hidden layers uniform in `±1/√fan_in`, final layer uniform in `±3e-3`.
    pub fn new(sizes: &[usize], output: OutputActivation, rng: &mut RngStream) -> Self {
        let mut net = Self::zeros(sizes, output);
        let layers = net.layers();
        let mut offset = 0;
        for l in 0..layers {
            let (fan_in, fan_out) = (sizes[l], sizes[l + 1]);
            let bound = if l + 1 == layers {
                3e-3
            } else {
                1.0 / (fan_in as f64).sqrt()
            };
            for p in &mut net.params[offset..offset + fan_in * fan_out + fan_out] {
                *p = rng.uniform_in(-bound, bound);
            }
            offset += fan_in * fan_out + fan_out;
        }
        net
    }

    pub fn from_params(sizes: &[usize], output: OutputActivation, params: Vec<f64>) -> Option<Self> {
        let mut net = Self::zeros(sizes, output);
        if params.len() != net.params.len() || params.iter().any(|p| !p.is_finite()) {
            return None;
        }
        net.params = params;
        Some(net)
    }

    pub fn sizes(&self) -> &[usize] {
        &self.sizes
    }

    pub fn layers(&self) -> usize {
        self.sizes.len() - 1
    }

    pub fn input_dim(&self) -> usize {
        self.sizes[0]
    }

    pub fn output_dim(&self) -> usize {
        *self.sizes.last().expect("sizes non-empty")
    }

    pub fn output_activation(&self) -> OutputActivation {
        self.output
    }

    pub fn params(&self) -> &[f64] {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.params
    }

    pub fn num_params(&self) -> usize {
        self.params.len()
    }

    pub fn forward(&self, input: &[f64]) -> Vec<f64> {
        self.forward_cached(input).acts.pop().expect("non-empty cache")
    }

    pub fn forward_cached(&self, input: &[f64]) -> ForwardCache {
        assert_eq!(input.len(), self.input_dim(), "input dimension");
        let layers = self.layers();
        let mut acts = Vec::with_capacity(layers + 1);
        acts.push(input.to_vec());
        let mut offset = 0;
        for l in 0..layers {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let w = &self.params[offset..offset + n_in * n_out];
            let b = &self.params[offset + n_in * n_out..offset + n_in * n_out + n_out];
            let x = &acts[l];
            let last = l + 1 == layers;
            let out: Vec<f64> = (0..n_out)
                .map(|o| {
                    let z = b[o]
                        + w[o * n_in..(o + 1) * n_in]
                            .iter()
                            .zip(x)
                            .map(|(a, c)| a * c)
                            .sum::<f64>();
                    match (last, self.output) {
                        (false, _) => z.max(0.0),
                        (true, OutputActivation::Tanh) => z.tanh(),
                        (true, OutputActivation::Identity) => z,
                    }
                })
                .collect();
            acts.push(out);
            offset += n_in * n_out + n_out;
        }
        ForwardCache { acts }
    }

    /// Accumulates `∂(grad_out·output)/∂params` into `grads` (when given) and
    /// returns the gradient with respect to the input.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &[f64], mut grads: Option<&mut [f64]>) -> Vec<f64> {
        if let Some(g) = &grads {
            assert_eq!(g.len(), self.params.len(), "gradient buffer size");
        }
        assert_eq!(grad_out.len(), self.output_dim(), "output gradient size");
        let layers = self.layers();
        let mut offsets = Vec::with_capacity(layers);
        let mut offset = 0;
        for l in 0..layers {
            offsets.push(offset);
            offset += self.sizes[l] * self.sizes[l + 1] + self.sizes[l + 1];
        }
        let mut delta: Vec<f64> = grad_out.to_vec();
        for l in (0..layers).rev() {
            let (n_in, n_out) = (self.sizes[l], self.sizes[l + 1]);
            let out = &cache.acts[l + 1];
            let last = l + 1 == layers;
            for (d, y) in delta.iter_mut().zip(out) {
                *d *= match (last, self.output) {
                    (false, _) => {
                        if *y > 0.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    (true, OutputActivation::Tanh) => 1.0 - y * y,
                    (true, OutputActivation::Identity) => 1.0,
                };
            }
            let x = &cache.acts[l];
            let base = offsets[l];
            let w = &self.params[base..base + n_in * n_out];
            let mut next = vec![0.0; n_in];
            for o in 0..n_out {
                let d = delta[o];
                if d == 0.0 {
                    continue;
                }
                if let Some(grads) = grads.as_deref_mut() {
                    let gw = &mut grads[base + o * n_in..base + (o + 1) * n_in];
                    for (g, xi) in gw.iter_mut().zip(x) {
                        *g += d * xi;
                    }
                    grads[base + n_in * n_out + o] += d;
                }
                for (nx, wi) in next.iter_mut().zip(&w[o * n_in..(o + 1) * n_in]) {
                    *nx += d * wi;
                }
            }
            delta = next;
        }
        delta
    }

    /// `θ ← τ·θ_src + (1−τ)·θ`; `τ = 1` copies bit-exactly.
    pub fn soft_update(&mut self, source: &Mlp, tau: f64) {
        assert_eq!(self.sizes, source.sizes, "soft_update shape mismatch");
        if tau == 1.0 {
            self.params.copy_from_slice(&source.params);
            return;
        }
        for (t, s) in self.params.iter_mut().zip(&source.params) {
            *t = tau * s + (1.0 - tau) * *t;
        }
    }

    pub fn is_finite(&self) -> bool {
        self.params.iter().all(|p| p.is_finite())
    }
}

/// Adam optimizer state for one network.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    m: Vec<f64>,
    v: Vec<f64>,
    t: i32,
}

impl Adam {
    pub fn new(num_params: usize, lr: f64) -> Self {
        Self {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            m: vec![0.0; num_params],
            v: vec![0.0; num_params],
            t: 0,
        }
    }

    /// Descends along `grads` (a loss gradient).
    pub fn step(&mut self, net: &mut Mlp, grads: &[f64]) {
        self.t += 1;
        let c1 = 1.0 - self.beta1.powi(self.t);
        let c2 = 1.0 - self.beta2.powi(self.t);
        for (((p, g), m), v) in net.params.iter_mut().zip(grads).zip(&mut self.m).zip(&mut self.v) {
            *m = self.beta1 * *m + (1.0 - self.beta1) * g;
            *v = self.beta2 * *v + (1.0 - self.beta2) * g * g;
            *p -= self.lr * (*m / c1) / ((*v / c2).sqrt() + self.eps);
        }
    }
}

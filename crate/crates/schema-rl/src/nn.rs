//! Minimal dense-network substrate: forward evaluation, exact reverse-mode
//! gradients, Adam, and global-norm gradient clipping. Everything is f64
//! and allocation-simple; the networks here are four hidden layers of 64
//! units, which keeps a whole training run deterministic and cheap.

pub mod checkpoint;

use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const HIDDEN_WIDTH: usize = 64;
pub const HIDDEN_DEPTH: usize = 4;
pub const LOG_SPREAD_MIN: f64 = -5.0;
pub const LOG_SPREAD_MAX: f64 = 1.0;

/// One affine layer, `y = W x + b`, `W` stored row-major `[rows x cols]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub rows: usize,
    pub cols: usize,
    pub w: Vec<f64>,
    pub b: Vec<f64>,
}

impl Layer {
    pub fn zeros(rows: usize, cols: usize) -> Layer {
        Layer {
            rows,
            cols,
            w: vec![0.0; rows * cols],
            b: vec![0.0; rows],
        }
    }
}

/// Network weights plus the state-independent per-argument log-spread
/// vector used by Gaussian action sampling.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkParams {
    /// Hidden layers use rectifier activations; the last layer is linear.
    pub layers: Vec<Layer>,
    pub log_spread: Vec<f64>,
}

impl NetworkParams {
    pub fn input_dim(&self) -> usize {
        self.layers.first().map_or(0, |l| l.cols)
    }

    pub fn output_dim(&self) -> usize {
        self.layers.last().map_or(0, |l| l.rows)
    }

    pub fn clamp_log_spread(&mut self) {
        for v in &mut self.log_spread {
            *v = v.clamp(LOG_SPREAD_MIN, LOG_SPREAD_MAX);
        }
    }
}

/// Fan-in-scaled uniform init: hidden layers get gain sqrt(2) for the
/// rectifiers, the output layer a small gain so initial heads are near zero
/// and the starting action distribution is near uniform.
pub fn init_mlp(
    input_dim: usize,
    output_dim: usize,
    spread_dims: usize,
    init_log_spread: f64,
    rng: &mut ChaCha8Rng,
) -> NetworkParams {
    let mut dims = vec![input_dim];
    dims.extend([HIDDEN_WIDTH; HIDDEN_DEPTH]);
    dims.push(output_dim);
    let mut layers = Vec::with_capacity(dims.len() - 1);
    for i in 0..dims.len() - 1 {
        let (cols, rows) = (dims[i], dims[i + 1]);
        let gain = if i + 2 == dims.len() { 0.01 } else { 2f64.sqrt() };
        let limit = gain * (3.0 / cols as f64).sqrt();
        let mut layer = Layer::zeros(rows, cols);
        for w in &mut layer.w {
            *w = rng.gen_range(-limit..limit);
        }
        layers.push(layer);
    }
    NetworkParams {
        layers,
        log_spread: vec![init_log_spread; spread_dims],
    }
}

/// Intermediates kept by `forward` for the backward pass.
#[derive(Debug, Clone)]
pub struct Cache {
    /// Input plus each layer's post-activation output (last entry is the
    /// linear head output).
    activations: Vec<Vec<f64>>,
}

impl Cache {
    pub fn output(&self) -> &[f64] {
        self.activations.last().expect("non-empty cache")
    }
}

/// Evaluate the network on one input vector.
pub fn forward(params: &NetworkParams, input: &[f64]) -> Cache {
    assert_eq!(
        input.len(),
        params.input_dim(),
        "input length does not match the first layer"
    );
    let n = params.layers.len();
    let mut activations = Vec::with_capacity(n + 1);
    activations.push(input.to_vec());
    for (i, layer) in params.layers.iter().enumerate() {
        let x = activations.last().unwrap();
        let mut y = vec![0.0; layer.rows];
        for r in 0..layer.rows {
            let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
            let mut acc = layer.b[r];
            for (wv, xv) in row.iter().zip(x.iter()) {
                acc += wv * xv;
            }
            y[r] = if i + 1 < n { acc.max(0.0) } else { acc };
        }
        activations.push(y);
    }
    Cache { activations }
}

/// Gradient accumulator with the same shape as `NetworkParams`.
#[derive(Debug, Clone, PartialEq)]
pub struct GradBuf {
    pub layers: Vec<Layer>,
    pub log_spread: Vec<f64>,
}

impl GradBuf {
    pub fn zeros_like(params: &NetworkParams) -> GradBuf {
        GradBuf {
            layers: params
                .layers
                .iter()
                .map(|l| Layer::zeros(l.rows, l.cols))
                .collect(),
            log_spread: vec![0.0; params.log_spread.len()],
        }
    }

    pub fn scale(&mut self, k: f64) {
        for l in &mut self.layers {
            for w in &mut l.w {
                *w *= k;
            }
            for b in &mut l.b {
                *b *= k;
            }
        }
        for v in &mut self.log_spread {
            *v *= k;
        }
    }

    pub fn add(&mut self, other: &GradBuf) {
        for (a, b) in self.layers.iter_mut().zip(other.layers.iter()) {
            for (x, y) in a.w.iter_mut().zip(b.w.iter()) {
                *x += y;
            }
            for (x, y) in a.b.iter_mut().zip(b.b.iter()) {
                *x += y;
            }
        }
        for (x, y) in self.log_spread.iter_mut().zip(other.log_spread.iter()) {
            *x += y;
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let mut acc = 0.0;
        for l in &self.layers {
            for w in &l.w {
                acc += w * w;
            }
            for b in &l.b {
                acc += b * b;
            }
        }
        for v in &self.log_spread {
            acc += v * v;
        }
        acc.sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.layers
            .iter()
            .all(|l| l.w.iter().all(|v| v.is_finite()) && l.b.iter().all(|v| v.is_finite()))
            && self.log_spread.iter().all(|v| v.is_finite())
    }
}

/// Exact reverse-mode gradients of a scalar loss whose partials with respect
/// to the network output are `output_grad`. Accumulates into `grads`
/// (log-spread gradients are the caller's responsibility; the network does
/// not touch them).
pub fn backward(params: &NetworkParams, cache: &Cache, output_grad: &[f64], grads: &mut GradBuf) {
    let n = params.layers.len();
    assert_eq!(
        cache.activations.len(),
        n + 1,
        "cache does not match this network"
    );
    assert_eq!(output_grad.len(), params.output_dim());
    let mut upstream = output_grad.to_vec();
    for i in (0..n).rev() {
        let layer = &params.layers[i];
        let x = &cache.activations[i];
        let gl = &mut grads.layers[i];
        let mut downstream = vec![0.0; layer.cols];
        for r in 0..layer.rows {
            let g = upstream[r];
            if g == 0.0 {
                continue;
            }
            gl.b[r] += g;
            let row = &layer.w[r * layer.cols..(r + 1) * layer.cols];
            let grow = &mut gl.w[r * layer.cols..(r + 1) * layer.cols];
            for c in 0..layer.cols {
                grow[c] += g * x[c];
                downstream[c] += g * row[c];
            }
        }
        if i > 0 {
            // Through the rectifier: zero wherever the unit was clamped.
            let act = &cache.activations[i];
            for (d, a) in downstream.iter_mut().zip(act.iter()) {
                if *a <= 0.0 {
                    *d = 0.0;
                }
            }
        }
        upstream = downstream;
    }
}

/// Rescale all gradients when their joint L2 norm exceeds `threshold`.
pub fn clip_global_norm(grads: &mut GradBuf, threshold: f64) -> f64 {
    let norm = grads.l2_norm();
    if norm > threshold && norm > 0.0 {
        grads.scale(threshold / norm);
    }
    norm
}

/// Adam accumulators; shapes mirror the parameters.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub m: GradBuf,
    pub v: GradBuf,
    pub step: u64,
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
}

impl AdamState {
    pub fn new(params: &NetworkParams, lr: f64) -> AdamState {
        AdamState {
            m: GradBuf::zeros_like(params),
            v: GradBuf::zeros_like(params),
            step: 0,
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
        }
    }
}

/// One Adam step with bias correction. Gradient descent on the supplied
/// gradients (callers minimize losses). Log-spread values are clamped to
/// their legal range afterwards.
pub fn adam_step(params: &mut NetworkParams, grads: &GradBuf, state: &mut AdamState) {
    state.step += 1;
    let t = state.step as f64;
    let bias1 = 1.0 - state.beta1.powf(t);
    let bias2 = 1.0 - state.beta2.powf(t);
    // Fold the bias correction into an effective step size.
    let lr_t = state.lr * bias2.sqrt() / bias1;
    let (beta1, beta2, eps) = (state.beta1, state.beta2, state.eps);
    for (i, layer) in params.layers.iter_mut().enumerate() {
        let gl = &grads.layers[i];
        let ml = &mut state.m.layers[i];
        let vl = &mut state.v.layers[i];
        adam_slice(&mut layer.w, &gl.w, &mut ml.w, &mut vl.w, beta1, beta2, eps, lr_t);
        adam_slice(&mut layer.b, &gl.b, &mut ml.b, &mut vl.b, beta1, beta2, eps, lr_t);
    }
    adam_slice(
        &mut params.log_spread,
        &grads.log_spread,
        &mut state.m.log_spread,
        &mut state.v.log_spread,
        beta1,
        beta2,
        eps,
        lr_t,
    );
    params.clamp_log_spread();
}

#[allow(clippy::too_many_arguments)]
fn adam_slice(
    p: &mut [f64],
    g: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    beta1: f64,
    beta2: f64,
    eps: f64,
    lr_t: f64,
) {
    for i in 0..p.len() {
        m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
        v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
        // lr_t carries the bias corrections.
        p[i] -= lr_t * m[i] / (v[i].sqrt() + eps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::stream_rng;

    fn random_net(seed: u64, input: usize, output: usize) -> NetworkParams {
        let mut rng = stream_rng(seed, &[99]);
        init_mlp(input, output, 4, -0.5, &mut rng)
    }

    /// Independent evaluation with explicit loops over a transposed view.
    fn naive_forward(params: &NetworkParams, input: &[f64]) -> Vec<f64> {
        let mut x = input.to_vec();
        let n = params.layers.len();
        for (i, layer) in params.layers.iter().enumerate() {
            let mut y = Vec::with_capacity(layer.rows);
            for r in 0..layer.rows {
                let mut acc = 0.0;
                for c in 0..layer.cols {
                    acc += layer.w[r * layer.cols + c] * x[c];
                }
                acc += layer.b[r];
                y.push(if i + 1 < n && acc < 0.0 { 0.0 } else { acc });
            }
            x = y;
        }
        x
    }

    #[test]
    fn forward_matches_naive_oracle() {
        use rand::Rng;
        for seed in 0..5 {
            let params = random_net(seed, 7, 5);
            let mut rng = stream_rng(seed, &[7]);
            let input: Vec<f64> = (0..7).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let got = forward(&params, &input);
            let want = naive_forward(&params, &input);
            for (g, w) in got.output().iter().zip(want.iter()) {
                assert!((g - w).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_network_gives_zero_heads() {
        let mut params = random_net(0, 6, 3);
        for l in &mut params.layers {
            l.w.iter_mut().for_each(|v| *v = 0.0);
            l.b.iter_mut().for_each(|v| *v = 0.0);
        }
        let out = forward(&params, &[0.3, -0.4, 0.9, 0.0, 1.0, -1.0]);
        assert!(out.output().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_layers_rectify() {
        let eye = |n: usize| {
            let mut l = Layer::zeros(n, n);
            for i in 0..n {
                l.w[i * n + i] = 1.0;
            }
            l
        };
        let params = NetworkParams {
            layers: vec![eye(3), eye(3)],
            log_spread: vec![],
        };
        let out = forward(&params, &[0.5, -0.7, 0.0]);
        assert_eq!(out.output(), &[0.5, 0.0, 0.0]);
    }

    fn loss_of(params: &NetworkParams, input: &[f64], coeffs: &[f64]) -> f64 {
        forward(params, input)
            .output()
            .iter()
            .zip(coeffs)
            .map(|(o, c)| o * c)
            .sum()
    }

    #[test]
    fn backward_matches_finite_differences() {
        use rand::Rng;
        for seed in 0..10 {
            let mut params = random_net(seed, 5, 4);
            // Trim to 3 layers to keep the finite-difference sweep cheap.
            params.layers.truncate(2);
            let last = Layer {
                rows: 4,
                cols: HIDDEN_WIDTH,
                w: params.layers[1].w[..4 * HIDDEN_WIDTH].to_vec(),
                b: vec![0.0; 4],
            };
            params.layers[1] = Layer::zeros(HIDDEN_WIDTH, HIDDEN_WIDTH);
            let mut rng = stream_rng(seed, &[5]);
            for wv in &mut params.layers[1].w {
                *wv = rng.gen_range(-0.3..0.3);
            }
            params.layers.push(last);

            let input: Vec<f64> = (0..5).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let coeffs: Vec<f64> = (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect();

            let cache = forward(&params, &input);
            let mut grads = GradBuf::zeros_like(&params);
            backward(&params, &cache, &coeffs, &mut grads);

            let h = 1e-5;
            let mut checked = 0usize;
            for li in 0..params.layers.len() {
                // Spot-check a deterministic subset of weights per layer.
                let count = params.layers[li].w.len();
                let stride = (count / 17).max(1);
                for wi in (0..count).step_by(stride) {
                    let orig = params.layers[li].w[wi];
                    params.layers[li].w[wi] = orig + h;
                    let up = loss_of(&params, &input, &coeffs);
                    params.layers[li].w[wi] = orig - h;
                    let down = loss_of(&params, &input, &coeffs);
                    params.layers[li].w[wi] = orig;
                    let fd = (up - down) / (2.0 * h);
                    let an = grads.layers[li].w[wi];
                    let denom = an.abs().max(fd.abs()).max(1.0);
                    assert!(
                        (an - fd).abs() / denom <= 1e-4,
                        "seed {seed} layer {li} w[{wi}]: analytic {an} vs fd {fd}"
                    );
                    checked += 1;
                }
            }
            assert!(checked > 50);
        }
    }

    #[test]
    fn zero_output_grad_means_zero_param_grad() {
        let params = random_net(3, 5, 4);
        let cache = forward(&params, &[0.1, 0.2, -0.3, 0.5, 0.9]);
        let mut grads = GradBuf::zeros_like(&params);
        backward(&params, &cache, &[0.0; 4], &mut grads);
        assert_eq!(grads.l2_norm(), 0.0);
    }

    #[test]
    fn batch_gradients_accumulate_additively() {
        let params = random_net(4, 5, 4);
        let input = [0.4, -0.2, 0.8, 0.0, -0.9];
        let coeffs = [1.0, -0.5, 0.25, 2.0];
        let cache = forward(&params, &input);
        let mut single = GradBuf::zeros_like(&params);
        backward(&params, &cache, &coeffs, &mut single);
        let mut double = GradBuf::zeros_like(&params);
        backward(&params, &cache, &coeffs, &mut double);
        backward(&params, &cache, &coeffs, &mut double);
        let mut twice = single.clone();
        twice.scale(2.0);
        for (a, b) in twice.layers.iter().zip(double.layers.iter()) {
            for (x, y) in a.w.iter().zip(b.w.iter()) {
                assert!((x - y).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn clip_rescales_only_above_threshold() {
        let params = random_net(5, 4, 3);
        let mut grads = GradBuf::zeros_like(&params);
        grads.layers[0].w[0] = 0.25;
        clip_global_norm(&mut grads, 0.5);
        assert_eq!(grads.layers[0].w[0], 0.25);
        grads.layers[0].w[0] = 3.0;
        grads.layers[0].w[1] = 4.0;
        clip_global_norm(&mut grads, 0.5);
        let norm = grads.l2_norm();
        assert!((norm - 0.5).abs() < 1e-12);
        assert!((grads.layers[0].w[0] - 0.3).abs() < 1e-12);
        let mut zeros = GradBuf::zeros_like(&params);
        clip_global_norm(&mut zeros, 0.5);
        assert_eq!(zeros.l2_norm(), 0.0);
    }

    #[test]
    fn adam_first_step_magnitude_is_learning_rate() {
        let mut params = random_net(6, 4, 2);
        let before = params.clone();
        let mut grads = GradBuf::zeros_like(&params);
        for l in &mut grads.layers {
            l.w.iter_mut().for_each(|v| *v = 0.7);
            l.b.iter_mut().for_each(|v| *v = -0.7);
        }
        let mut state = AdamState::new(&params, 0.001);
        adam_step(&mut params, &grads, &mut state);
        for (lb, la) in before.layers.iter().zip(params.layers.iter()) {
            for (wb, wa) in lb.w.iter().zip(la.w.iter()) {
                let delta = wb - wa;
                // First-step update is lr * sign(g) up to epsilon effects.
                assert!((delta - 0.001).abs() < 1e-6, "delta {delta}");
            }
            for (bb, ba) in lb.b.iter().zip(la.b.iter()) {
                assert!((bb - ba + 0.001).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn adam_zero_gradient_is_identity() {
        let mut params = random_net(7, 4, 2);
        let before = params.clone();
        let grads = GradBuf::zeros_like(&params);
        let mut state = AdamState::new(&params, 0.001);
        for _ in 0..5 {
            adam_step(&mut params, &grads, &mut state);
        }
        assert_eq!(params, before);
    }

    #[test]
    fn adam_is_deterministic() {
        let run = || {
            let mut params = random_net(8, 4, 2);
            let mut grads = GradBuf::zeros_like(&params);
            grads.layers[0].w[3] = 0.2;
            grads.layers[1].b[1] = -0.4;
            let mut state = AdamState::new(&params, 0.01);
            for _ in 0..7 {
                adam_step(&mut params, &grads, &mut state);
            }
            params
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn log_spread_stays_clamped() {
        let mut params = random_net(9, 4, 2);
        params.log_spread = vec![0.9, -4.9];
        let mut grads = GradBuf::zeros_like(&params);
        grads.log_spread = vec![-100.0, 100.0];
        let mut state = AdamState::new(&params, 1.0);
        for _ in 0..20 {
            adam_step(&mut params, &grads, &mut state);
        }
        assert!(params.log_spread[0] <= LOG_SPREAD_MAX + 1e-12);
        assert!(params.log_spread[1] >= LOG_SPREAD_MIN - 1e-12);
    }
}

//! Stacked bidirectional LSTM encoder with exact backpropagation through time.
//!
//! Gate rows are laid out `[input, forget, output, cell]`, each `hidden_dim`
//! tall. Initial hidden and cell states are zero in both directions.

use rand::Rng;

use crate::error::{Error, Result};
use crate::numerics::{axpy, gemv_acc, gemv_t_acc, outer_acc, Matrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EncoderConfig {
    pub num_layers: usize,
    pub hidden_dim: usize,
    pub input_dim: usize,
}

impl EncoderConfig {
    pub fn new(num_layers: usize, hidden_dim: usize, input_dim: usize) -> Result<Self> {
        if num_layers == 0 || hidden_dim == 0 || input_dim == 0 {
            return Err(Error::Config(format!(
                "encoder needs at least one layer, hidden unit and input feature \
                 (got layers={num_layers}, hidden={hidden_dim}, input={input_dim})"
            )));
        }
        Ok(EncoderConfig {
            num_layers,
            hidden_dim,
            input_dim,
        })
    }

    /// Six layers of 360 cells per direction.
    pub fn full_scale(input_dim: usize) -> Self {
        EncoderConfig {
            num_layers: 6,
            hidden_dim: 360,
            input_dim,
        }
    }

    /// Two layers of 32 cells per direction, sized for desk experiments.
    pub fn toy(input_dim: usize) -> Self {
        EncoderConfig {
            num_layers: 2,
            hidden_dim: 32,
            input_dim,
        }
    }

    /// Width of the embedding, `2 · hidden_dim`.
    pub fn output_dim(&self) -> usize {
        2 * self.hidden_dim
    }

    pub fn layer_input_dim(&self, layer: usize) -> usize {
        if layer == 0 {
            self.input_dim
        } else {
            self.output_dim()
        }
    }
}

/// One LSTM direction: `W` (4h × d), `U` (4h × h), `b` (4h).
#[derive(Debug, Clone, PartialEq)]
pub struct LstmParams {
    pub w: Matrix,
    pub u: Matrix,
    pub b: Vec<f64>,
}

impl LstmParams {
    pub fn zeros(input_dim: usize, hidden_dim: usize) -> Self {
        LstmParams {
            w: Matrix::zeros(4 * hidden_dim, input_dim),
            u: Matrix::zeros(4 * hidden_dim, hidden_dim),
            b: vec![0.0; 4 * hidden_dim],
        }
    }

    /// Uniform weights in `[−0.05, 0.05]`, zero biases.
    pub fn init<R: Rng>(input_dim: usize, hidden_dim: usize, rng: &mut R) -> Self {
        let mut p = Self::zeros(input_dim, hidden_dim);
        for v in p.w.as_mut_slice().iter_mut().chain(p.u.as_mut_slice()) {
            *v = rng.gen_range(-0.05..=0.05);
        }
        p
    }

    pub fn hidden_dim(&self) -> usize {
        self.u.cols()
    }

    pub fn input_dim(&self) -> usize {
        self.w.cols()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BiLstmLayer {
    pub forward: LstmParams,
    pub backward: LstmParams,
}

/// Encoder parameters. The same type holds parameter gradients.
#[derive(Debug, Clone, PartialEq)]
pub struct EncoderParams {
    config: EncoderConfig,
    pub layers: Vec<BiLstmLayer>,
}

/// Borrowed view of one named tensor.
#[derive(Debug, Clone, Copy)]
pub struct TensorRef<'a> {
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

impl EncoderParams {
    pub fn zeros(config: EncoderConfig) -> Self {
        let layers = (0..config.num_layers)
            .map(|l| {
                let d = config.layer_input_dim(l);
                BiLstmLayer {
                    forward: LstmParams::zeros(d, config.hidden_dim),
                    backward: LstmParams::zeros(d, config.hidden_dim),
                }
            })
            .collect();
        EncoderParams { config, layers }
    }

    pub fn init<R: Rng>(config: EncoderConfig, rng: &mut R) -> Self {
        let layers = (0..config.num_layers)
            .map(|l| {
                let d = config.layer_input_dim(l);
                let forward = LstmParams::init(d, config.hidden_dim, rng);
                let backward = LstmParams::init(d, config.hidden_dim, rng);
                BiLstmLayer { forward, backward }
            })
            .collect();
        EncoderParams { config, layers }
    }

    pub fn config(&self) -> EncoderConfig {
        self.config
    }

    /// Tensor names in canonical (serialization and flattening) order.
    pub fn tensor_names(&self) -> Vec<String> {
        let mut names = Vec::new();
        for l in 0..self.layers.len() {
            for dir in ["fwd", "bwd"] {
                for t in ["w", "u", "b"] {
                    names.push(format!("encoder.layer{l}.{dir}.{t}"));
                }
            }
        }
        names
    }

    pub fn tensors(&self) -> Vec<TensorRef<'_>> {
        let mut out = Vec::with_capacity(6 * self.layers.len());
        for layer in &self.layers {
            for p in [&layer.forward, &layer.backward] {
                out.push(TensorRef {
                    rows: p.w.rows(),
                    cols: p.w.cols(),
                    data: p.w.as_slice(),
                });
                out.push(TensorRef {
                    rows: p.u.rows(),
                    cols: p.u.cols(),
                    data: p.u.as_slice(),
                });
                out.push(TensorRef {
                    rows: p.b.len(),
                    cols: 1,
                    data: &p.b,
                });
            }
        }
        out
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [f64]> {
        let mut out = Vec::with_capacity(6 * self.layers.len());
        for layer in &mut self.layers {
            for p in [&mut layer.forward, &mut layer.backward] {
                out.push(p.w.as_mut_slice());
                out.push(p.u.as_mut_slice());
                out.push(p.b.as_mut_slice());
            }
        }
        out
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }

    /// `self += alpha * other`.
    pub fn add_scaled(&mut self, other: &EncoderParams, alpha: f64) -> Result<()> {
        if self.config != other.config {
            return Err(Error::Config("encoder shapes differ".into()));
        }
        for (dst, src) in self.tensors_mut().into_iter().zip(other.tensors()) {
            axpy(dst, alpha, src.data);
        }
        Ok(())
    }

    pub fn scale(&mut self, alpha: f64) {
        for t in self.tensors_mut() {
            t.iter_mut().for_each(|v| *v *= alpha);
        }
    }

    pub fn sum_squares(&self) -> f64 {
        self.tensors()
            .iter()
            .flat_map(|t| t.data.iter())
            .map(|v| v * v)
            .sum()
    }

    fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for t in self.tensors() {
            for v in t.data {
                h = (h ^ v.to_bits()).wrapping_mul(0x0100_0000_01b3).rotate_left(17);
            }
        }
        h
    }
}

#[inline]
fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Result of one LSTM time step. `gates` holds the post-activation values
/// `[i, f, o, g]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CellStep {
    pub h: Vec<f64>,
    pub c: Vec<f64>,
    pub gates: Vec<f64>,
}

pub fn lstm_cell_step(params: &LstmParams, x: &[f64], h_prev: &[f64], c_prev: &[f64]) -> Result<CellStep> {
    let hd = params.hidden_dim();
    if x.len() != params.input_dim() {
        return Err(Error::ShapeMismatch {
            op: "lstm_cell_step input",
            left: (x.len(), 1),
            right: params.w.shape(),
        });
    }
    if h_prev.len() != hd || c_prev.len() != hd {
        return Err(Error::ShapeMismatch {
            op: "lstm_cell_step state",
            left: (h_prev.len(), c_prev.len()),
            right: (hd, hd),
        });
    }
    let mut gates = vec![0.0; 4 * hd];
    let mut h = vec![0.0; hd];
    let mut c = vec![0.0; hd];
    cell_step_into(params, x, h_prev, c_prev, &mut gates, &mut h, &mut c);
    Ok(CellStep { h, c, gates })
}

fn cell_step_into(
    params: &LstmParams,
    x: &[f64],
    h_prev: &[f64],
    c_prev: &[f64],
    gates: &mut [f64],
    h: &mut [f64],
    c: &mut [f64],
) {
    let hd = params.hidden_dim();
    gates.copy_from_slice(&params.b);
    gemv_acc(&params.w, x, gates);
    gemv_acc(&params.u, h_prev, gates);
    let (ifo, g) = gates.split_at_mut(3 * hd);
    ifo.iter_mut().for_each(|v| *v = sigmoid(*v));
    g.iter_mut().for_each(|v| *v = v.tanh());
    for j in 0..hd {
        let (i, f, o, g) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
        c[j] = f * c_prev[j] + i * g;
        h[j] = o * c[j].tanh();
    }
}

/// Activations of one direction, stored in processing order.
#[derive(Debug, Clone)]
struct DirectionCache {
    gates: Matrix,
    c: Matrix,
    h: Matrix,
}

#[derive(Debug, Clone)]
struct LayerCache {
    input: Matrix,
    forward: DirectionCache,
    backward: DirectionCache,
}

/// Everything `encoder_backward` needs from a forward pass.
#[derive(Debug, Clone)]
pub struct EncoderCache {
    config: EncoderConfig,
    fingerprint: u64,
    layers: Vec<LayerCache>,
}

#[derive(Debug, Clone)]
pub struct EncoderOutput {
    /// Shared embedding, `n × 2·hidden_dim`.
    pub e: Matrix,
    pub cache: EncoderCache,
}

#[inline]
fn time_index(step: usize, frames: usize, reverse: bool) -> usize {
    if reverse {
        frames - 1 - step
    } else {
        step
    }
}

fn direction_forward(params: &LstmParams, input: &Matrix, reverse: bool) -> DirectionCache {
    let n = input.rows();
    let hd = params.hidden_dim();
    let mut cache = DirectionCache {
        gates: Matrix::zeros(n, 4 * hd),
        c: Matrix::zeros(n, hd),
        h: Matrix::zeros(n, hd),
    };
    let zeros = vec![0.0; hd];
    let mut h_prev = zeros.clone();
    let mut c_prev = zeros;
    for step in 0..n {
        let x = input.row(time_index(step, n, reverse));
        let mut h = vec![0.0; hd];
        let mut c = vec![0.0; hd];
        cell_step_into(params, x, &h_prev, &c_prev, cache.gates.row_mut(step), &mut h, &mut c);
        cache.h.row_mut(step).copy_from_slice(&h);
        cache.c.row_mut(step).copy_from_slice(&c);
        h_prev = h;
        c_prev = c;
    }
    cache
}

fn layer_forward(layer: &BiLstmLayer, input: &Matrix) -> Result<(Matrix, LayerCache)> {
    let n = input.rows();
    if n == 0 {
        return Err(Error::EmptySequence);
    }
    if input.cols() != layer.forward.input_dim() {
        return Err(Error::ShapeMismatch {
            op: "bilstm_layer_forward",
            left: input.shape(),
            right: layer.forward.w.shape(),
        });
    }
    if !input.is_finite() {
        return Err(Error::Config("non-finite encoder input".into()));
    }
    let forward = direction_forward(&layer.forward, input, false);
    let backward = direction_forward(&layer.backward, input, true);
    let hd = layer.forward.hidden_dim();
    let mut out = Matrix::zeros(n, 2 * hd);
    for t in 0..n {
        let row = out.row_mut(t);
        row[..hd].copy_from_slice(forward.h.row(t));
        row[hd..].copy_from_slice(backward.h.row(n - 1 - t));
    }
    let cache = LayerCache {
        input: input.clone(),
        forward,
        backward,
    };
    Ok((out, cache))
}

/// One bidirectional layer: row `t` is `[forward h_t, backward h_t]`.
pub fn bilstm_layer_forward(layer: &BiLstmLayer, input: &Matrix) -> Result<Matrix> {
    layer_forward(layer, input).map(|(out, _)| out)
}

pub fn encoder_forward(params: &EncoderParams, x: &Matrix) -> Result<EncoderOutput> {
    let config = params.config;
    if x.cols() != config.input_dim {
        return Err(Error::ShapeMismatch {
            op: "encoder_forward",
            left: x.shape(),
            right: (x.rows(), config.input_dim),
        });
    }
    let mut caches = Vec::with_capacity(params.layers.len());
    let mut current = x.clone();
    for layer in &params.layers {
        let (out, cache) = layer_forward(layer, &current)?;
        caches.push(cache);
        current = out;
    }
    Ok(EncoderOutput {
        e: current,
        cache: EncoderCache {
            config,
            fingerprint: params.fingerprint(),
            layers: caches,
        },
    })
}

/// Backpropagates one direction. `grad_h` is indexed by time. Accumulates
/// parameter gradients into `grads` and input gradients into `grad_input`.
#[allow(clippy::too_many_arguments)]
fn direction_backward(
    params: &LstmParams,
    cache: &DirectionCache,
    input: &Matrix,
    grad_h: &Matrix,
    grad_col: usize,
    reverse: bool,
    grads: &mut LstmParams,
    grad_input: &mut Matrix,
) {
    let n = input.rows();
    let hd = params.hidden_dim();
    let zeros = vec![0.0; hd];
    let mut dh_next = vec![0.0; hd];
    let mut dc_next = vec![0.0; hd];
    let mut da = vec![0.0; 4 * hd];
    for step in (0..n).rev() {
        let t = time_index(step, n, reverse);
        let gates = cache.gates.row(step);
        let c = cache.c.row(step);
        let (h_prev, c_prev) = if step == 0 {
            (&zeros[..], &zeros[..])
        } else {
            (cache.h.row(step - 1), cache.c.row(step - 1))
        };
        let dh_out = &grad_h.row(t)[grad_col..grad_col + hd];
        for j in 0..hd {
            let (i, f, o, g) = (gates[j], gates[hd + j], gates[2 * hd + j], gates[3 * hd + j]);
            let dh = dh_out[j] + dh_next[j];
            let tc = c[j].tanh();
            let dc = dc_next[j] + dh * o * (1.0 - tc * tc);
            da[j] = dc * g * i * (1.0 - i);
            da[hd + j] = dc * c_prev[j] * f * (1.0 - f);
            da[2 * hd + j] = dh * tc * o * (1.0 - o);
            da[3 * hd + j] = dc * i * (1.0 - g * g);
            dc_next[j] = dc * f;
        }
        outer_acc(&mut grads.w, &da, input.row(t));
        outer_acc(&mut grads.u, &da, h_prev);
        axpy(&mut grads.b, 1.0, &da);
        gemv_t_acc(&params.w, &da, grad_input.row_mut(t));
        dh_next.iter_mut().for_each(|v| *v = 0.0);
        gemv_t_acc(&params.u, &da, &mut dh_next);
    }
}

/// Backpropagation through time over both directions of every layer.
/// Returns parameter gradients and the gradient with respect to `X`.
pub fn encoder_backward(
    params: &EncoderParams,
    cache: &EncoderCache,
    grad_e: &Matrix,
) -> Result<(EncoderParams, Matrix)> {
    if cache.config != params.config || cache.layers.len() != params.layers.len() {
        return Err(Error::StaleCache("cache was built for a different encoder shape".into()));
    }
    if cache.fingerprint != params.fingerprint() {
        return Err(Error::StaleCache("parameters changed since the forward pass".into()));
    }
    let n = cache.layers[0].input.rows();
    let expected = (n, params.config.output_dim());
    if grad_e.shape() != expected {
        return Err(Error::ShapeMismatch {
            op: "encoder_backward",
            left: grad_e.shape(),
            right: expected,
        });
    }

    let mut grads = EncoderParams::zeros(params.config);
    let mut grad_out = grad_e.clone();
    let hd = params.config.hidden_dim;
    for (l, (layer, lc)) in params.layers.iter().zip(&cache.layers).enumerate().rev() {
        let mut grad_in = Matrix::zeros(n, lc.input.cols());
        let g = &mut grads.layers[l];
        direction_backward(&layer.forward, &lc.forward, &lc.input, &grad_out, 0, false, &mut g.forward, &mut grad_in);
        direction_backward(&layer.backward, &lc.backward, &lc.input, &grad_out, hd, true, &mut g.backward, &mut grad_in);
        grad_out = grad_in;
    }
    Ok((grads, grad_out))
}

//! The feed-forward tanh network and its exact differentiation with respect
//! to both inputs (for the PDE terms) and parameters (for training).
//!
//! The architecture is a chain of affine maps with tanh on every hidden
//! layer and identity on the scalar output. Derivatives are computed by an
//! analytic layer recursion rather than a general-purpose tape: plain
//! reverse accumulation yields parameter gradients, and running the same
//! reverse pass in dual-number arithmetic (forward-over-reverse) yields the
//! mixed second derivatives `d(d u / d y_j) / d theta` needed for the
//! gradient of residuals that contain input derivatives.
//!
//! Checkpoint format (`save_checkpoint` / `load_checkpoint`): little-endian
//! throughout, magic `RTEPINN1`, then `u32` network count, then per network
//! `u32` width count, the widths as `u32`, a `u64` parameter count and the
//! flat parameter vector as IEEE-754 `f64` bit patterns. Round-trips are
//! bit-exact.

use crate::{Error, Result};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::io::Read;
use std::ops::{Add, Mul, Neg, Sub};
use std::path::Path;

/// Scalar abstraction so the forward/reverse passes run both in plain `f64`
/// and in dual-number arithmetic.
pub trait Value:
    Copy + Add<Output = Self> + Sub<Output = Self> + Mul<Output = Self> + Neg<Output = Self>
{
    const ZERO: Self;
    const ONE: Self;
    fn from_f64(v: f64) -> Self;
    fn tanh(self) -> Self;
    fn is_finite(self) -> bool;
}

impl Value for f64 {
    const ZERO: f64 = 0.0;
    const ONE: f64 = 1.0;
    fn from_f64(v: f64) -> f64 {
        v
    }
    fn tanh(self) -> f64 {
        f64::tanh(self)
    }
    fn is_finite(self) -> bool {
        f64::is_finite(self)
    }
}

/// First-order dual number `re + eps * d` with `eps^2 = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Dual {
    pub re: f64,
    pub eps: f64,
}

impl Dual {
    pub fn new(re: f64, eps: f64) -> Self {
        Dual { re, eps }
    }
}

impl Add for Dual {
    type Output = Dual;
    fn add(self, o: Dual) -> Dual {
        Dual::new(self.re + o.re, self.eps + o.eps)
    }
}

impl Sub for Dual {
    type Output = Dual;
    fn sub(self, o: Dual) -> Dual {
        Dual::new(self.re - o.re, self.eps - o.eps)
    }
}

impl Mul for Dual {
    type Output = Dual;
    fn mul(self, o: Dual) -> Dual {
        Dual::new(self.re * o.re, self.re * o.eps + self.eps * o.re)
    }
}

impl Neg for Dual {
    type Output = Dual;
    fn neg(self) -> Dual {
        Dual::new(-self.re, -self.eps)
    }
}

impl Value for Dual {
    const ZERO: Dual = Dual { re: 0.0, eps: 0.0 };
    const ONE: Dual = Dual { re: 1.0, eps: 0.0 };
    fn from_f64(v: f64) -> Dual {
        Dual::new(v, 0.0)
    }
    fn tanh(self) -> Dual {
        let t = self.re.tanh();
        Dual::new(t, self.eps * (1.0 - t * t))
    }
    fn is_finite(self) -> bool {
        self.re.is_finite() && self.eps.is_finite()
    }
}

/// Weight initialization scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitScheme {
    XavierUniform,
}

/// Fully connected tanh network with scalar output.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpNetwork {
    widths: Vec<usize>,
    /// Per layer, row-major `d_{k+1} x d_k`.
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl MlpNetwork {
    /// Zero-initialized network. Widths must have at least two entries,
    /// all positive, with a single output unit.
    pub fn zeros(widths: &[usize]) -> Result<Self> {
        if widths.len() < 2 {
            return Err(Error::config("a network needs at least input and output widths"));
        }
        if widths.contains(&0) {
            return Err(Error::config("layer widths must be positive"));
        }
        if *widths.last().unwrap() != 1 {
            return Err(Error::config("output width must be 1"));
        }
        let mut weights = Vec::with_capacity(widths.len() - 1);
        let mut biases = Vec::with_capacity(widths.len() - 1);
        for k in 0..widths.len() - 1 {
            weights.push(vec![0.0; widths[k + 1] * widths[k]]);
            biases.push(vec![0.0; widths[k + 1]]);
        }
        Ok(MlpNetwork {
            widths: widths.to_vec(),
            weights,
            biases,
        })
    }

    pub fn widths(&self) -> &[usize] {
        &self.widths
    }

    pub fn input_dim(&self) -> usize {
        self.widths[0]
    }

    fn layer_count(&self) -> usize {
        self.widths.len() - 1
    }

    /// Total number of trainable parameters `M = sum (d_k + 1) d_{k+1}`.
    pub fn param_count(&self) -> usize {
        self.widths
            .windows(2)
            .map(|w| (w[0] + 1) * w[1])
            .sum()
    }

    /// Flat parameter order: `[W_1 | b_1 | W_2 | b_2 | ...]`, weights
    /// row-major. `flatten` and `set_from_flat` are exact inverses.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.param_count());
        for k in 0..self.layer_count() {
            out.extend_from_slice(&self.weights[k]);
            out.extend_from_slice(&self.biases[k]);
        }
        out
    }

    pub fn set_from_flat(&mut self, theta: &[f64]) {
        assert_eq!(theta.len(), self.param_count(), "parameter count mismatch");
        let mut offset = 0;
        for k in 0..self.layer_count() {
            let nw = self.weights[k].len();
            self.weights[k].copy_from_slice(&theta[offset..offset + nw]);
            offset += nw;
            let nb = self.biases[k].len();
            self.biases[k].copy_from_slice(&theta[offset..offset + nb]);
            offset += nb;
        }
    }

    /// Index ranges of the weight blocks (biases excluded) in the flat
    /// layout, for weight-only regularization.
    pub fn weight_index_ranges(&self) -> Vec<std::ops::Range<usize>> {
        let mut ranges = Vec::with_capacity(self.layer_count());
        let mut offset = 0;
        for k in 0..self.layer_count() {
            ranges.push(offset..offset + self.weights[k].len());
            offset += self.weights[k].len() + self.biases[k].len();
        }
        ranges
    }

    /// Plain forward evaluation.
    ///
    /// # Panics
    ///
    /// Panics when `input.len() != widths[0]`.
    pub fn forward(&self, input: &[f64]) -> f64 {
        let mut ws = Workspace::<f64>::new(self);
        self.forward_tape(input, &mut ws)
    }

    /// Forward pass recording activations into the workspace; returns the
    /// output value. The workspace can then be used for reverse passes.
    pub fn forward_tape<T: Value>(&self, input: &[T], ws: &mut Workspace<T>) -> T {
        assert_eq!(input.len(), self.input_dim(), "input dimension mismatch");
        ws.acts[0].copy_from_slice(input);
        let layers = self.layer_count();
        for k in 0..layers {
            let (din, dout) = (self.widths[k], self.widths[k + 1]);
            let (prev, next) = ws.acts.split_at_mut(k + 1);
            let a = &prev[k];
            let out = &mut next[0];
            let w = &self.weights[k];
            let b = &self.biases[k];
            for r in 0..dout {
                let mut acc = T::from_f64(b[r]);
                let row = &w[r * din..(r + 1) * din];
                for (wi, ai) in row.iter().zip(a.iter()) {
                    acc = acc + T::from_f64(*wi) * *ai;
                }
                out[r] = if k + 1 < layers { acc.tanh() } else { acc };
            }
        }
        ws.acts[layers][0]
    }

    /// Dual forward pass: evaluates value and directional derivative along
    /// `tangent` simultaneously.
    pub fn dual_forward_tape(
        &self,
        input: &[f64],
        tangent: &[f64],
        ws: &mut Workspace<Dual>,
    ) -> Dual {
        assert_eq!(input.len(), self.input_dim(), "input dimension mismatch");
        assert_eq!(tangent.len(), self.input_dim(), "tangent dimension mismatch");
        let duals: Vec<Dual> = input
            .iter()
            .zip(tangent)
            .map(|(&v, &t)| Dual::new(v, t))
            .collect();
        self.forward_tape(&duals, ws)
    }

    /// Reverse pass over a recorded tape.
    ///
    /// Accumulates `seed * d(output)/d(theta)` into `grad` (flat layout) and,
    /// when `input_grad` is given, writes `seed * d(output)/d(input)` there.
    pub fn backprop_tape<T: Value>(
        &self,
        ws: &mut Workspace<T>,
        seed: T,
        mut grad: Option<&mut [T]>,
        input_grad: Option<&mut [T]>,
    ) {
        let layers = self.layer_count();
        if let Some(g) = grad.as_ref() {
            assert_eq!(g.len(), self.param_count(), "gradient buffer length mismatch");
        }
        ws.delta.clear();
        ws.delta.push(seed);
        // Flat offset of layer k's weight block.
        let mut offsets = Vec::with_capacity(layers);
        let mut off = 0;
        for k in 0..layers {
            offsets.push(off);
            off += self.weights[k].len() + self.biases[k].len();
        }
        for k in (0..layers).rev() {
            let (din, dout) = (self.widths[k], self.widths[k + 1]);
            let w = &self.weights[k];
            // delta_z = delta (x) activation derivative; tanh' = 1 - h^2 with
            // h the stored post-activation, identity on the output layer.
            if k + 1 < layers {
                for (dz, h) in ws.delta.iter_mut().zip(&ws.acts[k + 1]) {
                    *dz = *dz * (T::ONE - *h * *h);
                }
            }
            if let Some(g) = grad.as_deref_mut() {
                let base = offsets[k];
                let a = &ws.acts[k];
                for r in 0..dout {
                    let dz = ws.delta[r];
                    let row = &mut g[base + r * din..base + (r + 1) * din];
                    for (gi, ai) in row.iter_mut().zip(a.iter()) {
                        *gi = *gi + dz * *ai;
                    }
                    let bias_slot = base + dout * din + r;
                    g[bias_slot] = g[bias_slot] + dz;
                }
            }
            if k == 0 && input_grad.is_none() {
                break;
            }
            // delta_prev = W^T delta_z
            ws.delta_prev.clear();
            ws.delta_prev.resize(din, T::ZERO);
            for r in 0..dout {
                let dz = ws.delta[r];
                let row = &w[r * din..(r + 1) * din];
                for (dp, wi) in ws.delta_prev.iter_mut().zip(row) {
                    *dp = *dp + T::from_f64(*wi) * dz;
                }
            }
            std::mem::swap(&mut ws.delta, &mut ws.delta_prev);
        }
        if let Some(ig) = input_grad {
            assert_eq!(ig.len(), self.input_dim(), "input gradient length mismatch");
            for (o, d) in ig.iter_mut().zip(&ws.delta) {
                *o = *o + *d;
            }
        }
    }

    /// Fused dual reverse pass: accumulates
    /// `alpha * d(value)/d(theta) + beta * d(dir_deriv)/d(theta)` into `grad`.
    ///
    /// Relies on the linearity of reverse accumulation in the seed: seeding
    /// with `beta + alpha * eps` makes the eps component of the dual adjoint
    /// carry exactly that combination.
    pub fn dual_backprop_fused(
        &self,
        ws: &mut Workspace<Dual>,
        alpha: f64,
        beta: f64,
        grad: &mut [f64],
    ) {
        let m = self.param_count();
        assert_eq!(grad.len(), m, "gradient buffer length mismatch");
        ws.dual_grad.clear();
        ws.dual_grad.resize(m, Dual::ZERO);
        let mut buf = std::mem::take(&mut ws.dual_grad);
        self.backprop_tape(ws, Dual::new(beta, alpha), Some(&mut buf), None);
        for (g, d) in grad.iter_mut().zip(&buf) {
            *g += d.eps;
        }
        ws.dual_grad = buf;
    }

    /// Value plus exact gradients at `input`.
    ///
    /// Always computes the input gradient; parameter gradients and the mixed
    /// parameter-gradients of each input derivative only when requested.
    pub fn eval_with_gradients(&self, input: &[f64], need_param_grads: bool) -> Result<EvalRecord> {
        let mut ws = Workspace::<f64>::new(self);
        let value = self.forward_tape(input, &mut ws);
        for (k, layer) in ws.acts.iter().enumerate() {
            if layer.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "network activation overflow in layer {k}"
                )));
            }
        }
        let mut input_gradient = vec![0.0; self.input_dim()];
        let mut param_gradient = need_param_grads.then(|| vec![0.0; self.param_count()]);
        self.backprop_tape(
            &mut ws,
            1.0,
            param_gradient.as_deref_mut(),
            Some(&mut input_gradient),
        );
        let mixed_param_gradients = if need_param_grads {
            let mut dual_ws = Workspace::<Dual>::new(self);
            let mut mixed = Vec::with_capacity(self.input_dim());
            for j in 0..self.input_dim() {
                let mut tangent = vec![0.0; self.input_dim()];
                tangent[j] = 1.0;
                self.dual_forward_tape(input, &tangent, &mut dual_ws);
                let mut g = vec![0.0; self.param_count()];
                self.dual_backprop_fused(&mut dual_ws, 0.0, 1.0, &mut g);
                mixed.push(g);
            }
            Some(mixed)
        } else {
            None
        };
        Ok(EvalRecord {
            value,
            input_gradient,
            param_gradient,
            mixed_param_gradients,
        })
    }
}

/// Evaluation record: value, input gradient and (optionally) parameter
/// gradients plus the parameter-gradient of each input derivative.
#[derive(Debug, Clone)]
pub struct EvalRecord {
    pub value: f64,
    pub input_gradient: Vec<f64>,
    pub param_gradient: Option<Vec<f64>>,
    /// `mixed_param_gradients[j][m] = d(d u / d y_j) / d theta_m`.
    pub mixed_param_gradients: Option<Vec<Vec<f64>>>,
}

/// Reusable per-thread buffers for forward/reverse passes.
#[derive(Debug, Clone)]
pub struct Workspace<T> {
    acts: Vec<Vec<T>>,
    delta: Vec<T>,
    delta_prev: Vec<T>,
    dual_grad: Vec<T>,
}

impl<T: Value> Workspace<T> {
    pub fn new(net: &MlpNetwork) -> Self {
        Workspace {
            acts: net.widths.iter().map(|&w| vec![T::ZERO; w]).collect(),
            delta: Vec::new(),
            delta_prev: Vec::new(),
            dual_grad: Vec::new(),
        }
    }
}

/// Xavier-uniform initialized network: `W ~ U(+-sqrt(6/(d_in + d_out)))`,
/// zero biases, deterministic per seed.
pub fn init_network(widths: &[usize], seed: u64, scheme: InitScheme) -> Result<MlpNetwork> {
    let mut net = MlpNetwork::zeros(widths)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match scheme {
        InitScheme::XavierUniform => {
            for k in 0..net.layer_count() {
                let bound = (6.0 / (net.widths[k] + net.widths[k + 1]) as f64).sqrt();
                for w in net.weights[k].iter_mut() {
                    *w = rng.random_range(-bound..bound);
                }
            }
        }
    }
    Ok(net)
}

/// Write networks to a checkpoint file (see the module docs for the layout).
pub fn save_checkpoint(path: &Path, nets: &[&MlpNetwork]) -> std::io::Result<()> {
    let mut buf: Vec<u8> = Vec::new();
    buf.extend_from_slice(b"RTEPINN1");
    buf.extend_from_slice(&(nets.len() as u32).to_le_bytes());
    for net in nets {
        buf.extend_from_slice(&(net.widths.len() as u32).to_le_bytes());
        for &w in &net.widths {
            buf.extend_from_slice(&(w as u32).to_le_bytes());
        }
        let theta = net.flatten();
        buf.extend_from_slice(&(theta.len() as u64).to_le_bytes());
        for v in theta {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    std::fs::write(path, buf)
}

/// Read networks back from a checkpoint file; exact inverse of
/// [`save_checkpoint`].
pub fn load_checkpoint(path: &Path) -> std::io::Result<Vec<MlpNetwork>> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 8];
    file.read_exact(&mut magic)?;
    if &magic != b"RTEPINN1" {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "bad checkpoint magic",
        ));
    }
    let read_u32 = |f: &mut std::fs::File| -> std::io::Result<u32> {
        let mut b = [0u8; 4];
        f.read_exact(&mut b)?;
        Ok(u32::from_le_bytes(b))
    };
    let n_nets = read_u32(&mut file)?;
    let mut nets = Vec::with_capacity(n_nets as usize);
    for _ in 0..n_nets {
        let n_widths = read_u32(&mut file)? as usize;
        let mut widths = Vec::with_capacity(n_widths);
        for _ in 0..n_widths {
            widths.push(read_u32(&mut file)? as usize);
        }
        let mut b8 = [0u8; 8];
        file.read_exact(&mut b8)?;
        let n_params = u64::from_le_bytes(b8) as usize;
        let mut theta = Vec::with_capacity(n_params);
        for _ in 0..n_params {
            file.read_exact(&mut b8)?;
            theta.push(f64::from_le_bytes(b8));
        }
        let mut net = MlpNetwork::zeros(&widths)
            .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e.to_string()))?;
        if theta.len() != net.param_count() {
            return Err(std::io::Error::new(
                std::io::ErrorKind::InvalidData,
                "checkpoint parameter count mismatch",
            ));
        }
        net.set_from_flat(&theta);
        nets.push(net);
    }
    // Trailing garbage means the file was not written by save_checkpoint.
    let mut rest = Vec::new();
    file.read_to_end(&mut rest)?;
    if !rest.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "trailing bytes in checkpoint",
        ));
    }
    Ok(nets)
}

/// Softplus `ln(1 + e^z)` and its first two derivatives, used as the
/// positivity transform of the absorption-coefficient network.
pub fn softplus(z: f64) -> f64 {
    if z > 30.0 {
        z
    } else if z < -30.0 {
        z.exp()
    } else {
        z.exp().ln_1p()
    }
}

pub fn softplus_prime(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

pub fn softplus_second(z: f64) -> f64 {
    let s = softplus_prime(z);
    s * (1.0 - s)
}

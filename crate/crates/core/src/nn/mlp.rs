//! One-hidden-layer perceptron over a shared flat parameter vector.
//!
//! Weights are row-major `(out_dim, in_dim)`. The hot-path methods
//! ([`Mlp::forward_raw`], [`Mlp::backward`]) work on raw slices and panic on
//! shape misuse; [`Mlp::forward`] is the checked entry point.

use rand::Rng;

use crate::error::{Error, Result};
use crate::nn::params::{LayoutBuilder, ParameterVector};
use crate::nn::tape::{Tape, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputHead {
    Linear,
    Softmax,
}

#[derive(Debug, Clone)]
pub struct Mlp {
    input_dim: usize,
    hidden_dim: usize,
    output_dim: usize,
    head: OutputHead,
    w1: usize,
    b1: usize,
    w2: usize,
    b2: usize,
}

/// Hidden-layer activations kept for the backward pass.
#[derive(Debug, Clone, Default)]
pub struct MlpCache {
    pre: Vec<f64>,
    hidden: Vec<f64>,
}

impl Mlp {
    /// Registers `{prefix}.w1`, `.b1`, `.w2`, `.b2` in `layout`.
    pub fn register(
        layout: &mut LayoutBuilder,
        prefix: &str,
        input_dim: usize,
        hidden_dim: usize,
        output_dim: usize,
        head: OutputHead,
    ) -> Result<Self> {
        if input_dim == 0 || hidden_dim == 0 || output_dim == 0 {
            return Err(Error::Config(format!(
                "{prefix}: MLP dimensions must be positive, got {input_dim}x{hidden_dim}x{output_dim}"
            )));
        }
        Ok(Self {
            input_dim,
            hidden_dim,
            output_dim,
            head,
            w1: layout.push(format!("{prefix}.w1"), &[hidden_dim, input_dim]),
            b1: layout.push(format!("{prefix}.b1"), &[hidden_dim]),
            w2: layout.push(format!("{prefix}.w2"), &[output_dim, hidden_dim]),
            b2: layout.push(format!("{prefix}.b2"), &[output_dim]),
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn head(&self) -> OutputHead {
        self.head
    }

    /// Offset of the output bias, used by callers that seed biases explicitly.
    pub fn output_bias_offset(&self) -> usize {
        self.b2
    }

    fn end(&self) -> usize {
        self.b2 + self.output_dim
    }

    /// Glorot-uniform weights, zero biases.
    pub fn initialize<R: Rng + ?Sized>(&self, params: &mut [f64], rng: &mut R) {
        let fill = |slice: &mut [f64], fan_in: usize, fan_out: usize, rng: &mut R| {
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in slice {
                *w = rng.random_range(-bound..=bound);
            }
        };
        let (i, h, o) = (self.input_dim, self.hidden_dim, self.output_dim);
        fill(&mut params[self.w1..self.w1 + h * i], i, h, rng);
        params[self.b1..self.b1 + h].fill(0.0);
        fill(&mut params[self.w2..self.w2 + o * h], h, o, rng);
        params[self.b2..self.b2 + o].fill(0.0);
    }

    /// Checked forward pass; applies the softmax head when configured.
    pub fn forward(&self, params: &ParameterVector, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.input_dim {
            return Err(Error::Config(format!(
                "MLP expects input of length {}, got {}",
                self.input_dim,
                input.len()
            )));
        }
        if params.len() < self.end() {
            return Err(Error::Config(format!(
                "parameter vector of length {} does not hold this network (needs {})",
                params.len(),
                self.end()
            )));
        }
        let mut cache = MlpCache::default();
        let mut out = vec![0.0; self.output_dim];
        self.forward_raw(params.values(), input, &mut cache, &mut out);
        if self.head == OutputHead::Softmax {
            softmax_in_place(&mut out);
        }
        Ok(out)
    }

    /// Forward pass to the pre-head output (logits for a softmax head).
    pub fn forward_raw(&self, params: &[f64], input: &[f64], cache: &mut MlpCache, out: &mut [f64]) {
        let (i, h, o) = (self.input_dim, self.hidden_dim, self.output_dim);
        debug_assert_eq!(input.len(), i);
        debug_assert_eq!(out.len(), o);
        cache.pre.resize(h, 0.0);
        cache.hidden.resize(h, 0.0);
        let w1 = &params[self.w1..self.w1 + h * i];
        let b1 = &params[self.b1..self.b1 + h];
        for r in 0..h {
            let row = &w1[r * i..(r + 1) * i];
            let a = b1[r] + dot(row, input);
            cache.pre[r] = a;
            cache.hidden[r] = a.max(0.0);
        }
        let w2 = &params[self.w2..self.w2 + o * h];
        let b2 = &params[self.b2..self.b2 + o];
        for r in 0..o {
            out[r] = b2[r] + dot(&w2[r * h..(r + 1) * h], &cache.hidden);
        }
    }

    /// Accumulates `∂L/∂θ` into `grads` given `d_out = ∂L/∂(raw output)`, and
    /// optionally writes `∂L/∂input` into `d_input` (overwriting it).
    pub fn backward(
        &self,
        params: &[f64],
        input: &[f64],
        cache: &MlpCache,
        d_out: &[f64],
        grads: &mut [f64],
        d_input: Option<&mut [f64]>,
    ) {
        let (i, h, o) = (self.input_dim, self.hidden_dim, self.output_dim);
        let mut d_hidden = [0.0f64; 64];
        let mut d_hidden_vec;
        let d_hidden: &mut [f64] = if h <= 64 {
            &mut d_hidden[..h]
        } else {
            d_hidden_vec = vec![0.0; h];
            &mut d_hidden_vec
        };
        let w2 = &params[self.w2..self.w2 + o * h];
        for r in 0..o {
            let g = d_out[r];
            if g == 0.0 {
                continue;
            }
            grads[self.b2 + r] += g;
            let gw = &mut grads[self.w2 + r * h..self.w2 + (r + 1) * h];
            let wr = &w2[r * h..(r + 1) * h];
            for c in 0..h {
                gw[c] += g * cache.hidden[c];
                d_hidden[c] += g * wr[c];
            }
        }
        for c in 0..h {
            if cache.pre[c] <= 0.0 {
                d_hidden[c] = 0.0;
            }
        }
        let w1 = &params[self.w1..self.w1 + h * i];
        for r in 0..h {
            let g = d_hidden[r];
            if g == 0.0 {
                continue;
            }
            grads[self.b1 + r] += g;
            let gw = &mut grads[self.w1 + r * i..self.w1 + (r + 1) * i];
            for c in 0..i {
                gw[c] += g * input[c];
            }
        }
        if let Some(d_input) = d_input {
            d_input.fill(0.0);
            for r in 0..h {
                let g = d_hidden[r];
                if g == 0.0 {
                    continue;
                }
                let wr = &w1[r * i..(r + 1) * i];
                for c in 0..i {
                    d_input[c] += g * wr[c];
                }
            }
        }
    }

    /// The same computation recorded on a tape; `leaves` are the tape
    /// variables of the whole parameter vector. Returns the raw output.
    pub fn forward_on_tape(&self, tape: &mut Tape, leaves: &[Var], input: &[Var]) -> Vec<Var> {
        let (i, h, o) = (self.input_dim, self.hidden_dim, self.output_dim);
        let hidden: Vec<Var> = (0..h)
            .map(|r| {
                let w = &leaves[self.w1 + r * i..self.w1 + (r + 1) * i];
                let a = tape.affine(w, input, leaves[self.b1 + r]);
                tape.relu(a)
            })
            .collect();
        (0..o)
            .map(|r| {
                let w = &leaves[self.w2 + r * h..self.w2 + (r + 1) * h];
                tape.affine(w, &hidden, leaves[self.b2 + r])
            })
            .collect()
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn softmax_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut total = 0.0;
    for x in v.iter_mut() {
        *x = (*x - max).exp();
        total += *x;
    }
    for x in v.iter_mut() {
        *x /= total;
    }
}

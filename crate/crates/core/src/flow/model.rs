use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::data::{ColumnMoments, Matrix};
use crate::error::{Error, Result};
use crate::flow::config::FlowConfig;
use crate::flow::mixture::{log_pdf_accumulate, GaussianMixture, MixtureGrad};
use crate::flow::{LOG_VAR_MAX, LOG_VAR_MIN, U_CLAMP};
use crate::nn::mlp::{Mlp, MlpCache, OutputHead};
use crate::nn::params::{LayoutBuilder, ParameterVector};
use crate::nn::special::std_normal_icdf;
use crate::nn::tape::{Tape, Var};
use crate::seed::derive_seed;

/// Spread of the initial component means.
const INIT_MEAN_SPAN: f64 = 2.0;

#[derive(Debug, Clone)]
enum Conditioner {
    /// Learnable context for a dimension with no inputs (first dimension of an
    /// unconditional flow).
    Constant { offset: usize },
    Network(Mlp),
}

#[derive(Debug, Clone)]
struct DimensionNet {
    conditioner: Conditioner,
    weights: Mlp,
    means: Mlp,
    log_vars: Mlp,
}

impl DimensionNet {
    fn heads(&self) -> [&Mlp; 3] {
        [&self.weights, &self.means, &self.log_vars]
    }
}

/// `u = τ(x; z)` with `ln |det ∂u/∂x|`.
#[derive(Debug, Clone, PartialEq)]
pub struct Transformed {
    pub u: Vec<f64>,
    pub log_jacobian: f64,
}

/// Rows `Φ⁻¹(clamp(τ(xᵢ; zᵢ)))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurrogateSample {
    pub values: Matrix,
}

impl SurrogateSample {
    /// Per-column mean and variance; close to `(0, 1)` for a well-trained flow.
    pub fn diagnostics(&self) -> Vec<ColumnMoments> {
        self.values.column_moments()
    }
}

#[derive(Debug, Clone)]
pub struct ConditionalFlow {
    config: FlowConfig,
    params: ParameterVector,
    dims: Vec<DimensionNet>,
}

#[derive(Debug, Clone, Default)]
struct Scratch {
    ctx: Vec<f64>,
    h: Vec<f64>,
    cond_cache: MlpCache,
    head_caches: [MlpCache; 3],
    raw: [Vec<f64>; 3],
    grad: MixtureGrad,
    dh: Vec<f64>,
    dh_part: Vec<f64>,
}

impl Scratch {
    fn for_config(cfg: &FlowConfig) -> Self {
        let mut s = Scratch::default();
        let k = cfg.n_components;
        s.h.resize(cfg.hidden_dim, 0.0);
        s.dh.resize(cfg.hidden_dim, 0.0);
        s.dh_part.resize(cfg.hidden_dim, 0.0);
        for r in &mut s.raw {
            r.resize(k, 0.0);
        }
        s.grad.resize(k);
        s
    }
}

impl ConditionalFlow {
    fn build(config: FlowConfig) -> Result<(ParameterVector, Vec<DimensionNet>)> {
        config.validate()?;
        let (k, hd) = (config.n_components, config.hidden_dim);
        let mut layout = LayoutBuilder::new();
        let mut dims = Vec::with_capacity(config.data_dim);
        for i in 0..config.data_dim {
            let inputs = i + config.cond_dim;
            let conditioner = if inputs == 0 {
                Conditioner::Constant {
                    offset: layout.push(format!("dim{i}.context"), &[hd]),
                }
            } else {
                Conditioner::Network(Mlp::register(
                    &mut layout,
                    &format!("dim{i}.conditioner"),
                    inputs,
                    hd,
                    hd,
                    OutputHead::Linear,
                )?)
            };
            let weights = Mlp::register(&mut layout, &format!("dim{i}.weights"), hd, hd, k, OutputHead::Softmax)?;
            let means = Mlp::register(&mut layout, &format!("dim{i}.means"), hd, hd, k, OutputHead::Linear)?;
            let log_vars = Mlp::register(&mut layout, &format!("dim{i}.log_vars"), hd, hd, k, OutputHead::Linear)?;
            dims.push(DimensionNet {
                conditioner,
                weights,
                means,
                log_vars,
            });
        }
        Ok((layout.finish(), dims))
    }

    /// Randomly initialized flow, seeded from `config.train.seed`.
    pub fn new(config: FlowConfig) -> Result<Self> {
        let (mut params, dims) = Self::build(config)?;
        let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(config.train.seed, 0x1417));
        let k = config.n_components;
        let values = params.values_mut();
        for dim in &dims {
            match &dim.conditioner {
                Conditioner::Constant { offset } => {
                    for v in &mut values[*offset..*offset + config.hidden_dim] {
                        *v = rng.random_range(-1.0..=1.0);
                    }
                }
                Conditioner::Network(net) => net.initialize(values, &mut rng),
            }
            for head in dim.heads() {
                head.initialize(values, &mut rng);
            }
            if k > 1 {
                let b = dim.means.output_bias_offset();
                for j in 0..k {
                    values[b + j] = -INIT_MEAN_SPAN + 2.0 * INIT_MEAN_SPAN * j as f64 / (k - 1) as f64;
                }
            }
        }
        Ok(Self { config, params, dims })
    }

    /// Every parameter zero: each dimension is an equal-weight mixture of
    /// standard normals, so `τ = Φ` elementwise.
    pub fn with_zero_parameters(config: FlowConfig) -> Result<Self> {
        let (params, dims) = Self::build(config)?;
        Ok(Self { config, params, dims })
    }

    pub fn config(&self) -> &FlowConfig {
        &self.config
    }

    pub fn params(&self) -> &ParameterVector {
        &self.params
    }

    pub fn params_mut(&mut self) -> &mut ParameterVector {
        &mut self.params
    }

    pub fn data_dim(&self) -> usize {
        self.config.data_dim
    }

    fn check(&self, x: &[f64], z: &[f64]) -> Result<()> {
        if x.len() != self.config.data_dim {
            return Err(Error::Config(format!(
                "flow expects x of length {}, got {}",
                self.config.data_dim,
                x.len()
            )));
        }
        if self.config.cond_dim > 0 && z.len() != self.config.cond_dim {
            return Err(Error::Config(format!(
                "flow expects z of length {}, got {}",
                self.config.cond_dim,
                z.len()
            )));
        }
        let z_used = if self.config.cond_dim > 0 { z } else { &[] };
        if x.iter().chain(z_used).any(|v| !v.is_finite()) {
            return Err(Error::Data("non-finite flow input".into()));
        }
        Ok(())
    }

    /// Runs conditioner and heads of dimension `i`, leaving the raw head
    /// outputs in `s.raw` and the context in `s.h`.
    fn forward_dim(&self, i: usize, x: &[f64], z: &[f64], s: &mut Scratch) {
        let p = self.params.values();
        let dim = &self.dims[i];
        match &dim.conditioner {
            Conditioner::Constant { offset } => {
                s.h.copy_from_slice(&p[*offset..*offset + self.config.hidden_dim]);
            }
            Conditioner::Network(net) => {
                s.ctx.clear();
                s.ctx.extend_from_slice(&x[..i]);
                s.ctx.extend_from_slice(&z[..self.config.cond_dim]);
                net.forward_raw(p, &s.ctx, &mut s.cond_cache, &mut s.h);
            }
        }
        for (head, (cache, raw)) in dim
            .heads()
            .into_iter()
            .zip(s.head_caches.iter_mut().zip(s.raw.iter_mut()))
        {
            head.forward_raw(p, &s.h, cache, raw);
        }
    }

    /// Backpropagates `s.grad` through the heads and conditioner of dimension
    /// `i` into `grads`. `s` must still hold the forward state of `forward_dim`.
    fn backward_dim(&self, i: usize, s: &mut Scratch, grads: &mut [f64]) {
        let p = self.params.values();
        let dim = &self.dims[i];
        s.dh.fill(0.0);
        let d_outs = [&s.grad.logits, &s.grad.means, &s.grad.log_vars];
        for (h_idx, head) in dim.heads().into_iter().enumerate() {
            head.backward(p, &s.h, &s.head_caches[h_idx], d_outs[h_idx], grads, Some(&mut s.dh_part));
            for (a, b) in s.dh.iter_mut().zip(&s.dh_part) {
                *a += b;
            }
        }
        match &dim.conditioner {
            Conditioner::Constant { offset } => {
                for (g, d) in grads[*offset..*offset + self.config.hidden_dim].iter_mut().zip(&s.dh) {
                    *g += d;
                }
            }
            Conditioner::Network(net) => {
                net.backward(p, &s.ctx, &s.cond_cache, &s.dh, grads, None);
            }
        }
    }

    /// Mixture transformer of dimension `i` at `(x_<i, z)`; `x[i..]` is ignored.
    pub fn mixture(&self, i: usize, x: &[f64], z: &[f64]) -> Result<GaussianMixture> {
        if i >= self.config.data_dim {
            return Err(Error::Config(format!("dimension {i} out of range")));
        }
        let mut padded = x[..i.min(x.len())].to_vec();
        padded.resize(self.config.data_dim, 0.0);
        self.check(&padded, z)?;
        let mut s = Scratch::for_config(&self.config);
        self.forward_dim(i, &padded, z, &mut s);
        Ok(GaussianMixture::from_raw(&s.raw[0], &s.raw[1], &s.raw[2]))
    }

    pub fn transform(&self, x: &[f64], z: &[f64]) -> Result<Transformed> {
        self.check(x, z)?;
        let mut s = Scratch::for_config(&self.config);
        let mut u = Vec::with_capacity(x.len());
        let mut log_jacobian = 0.0;
        for i in 0..self.config.data_dim {
            self.forward_dim(i, x, z, &mut s);
            let m = GaussianMixture::from_raw(&s.raw[0], &s.raw[1], &s.raw[2]);
            u.push(m.cdf(x[i]));
            log_jacobian += m.log_pdf(x[i]);
        }
        Ok(Transformed { u, log_jacobian })
    }

    /// `ln p(x | z)`; the uniform base contributes nothing, so this is the
    /// log-Jacobian of the transform.
    pub fn log_density(&self, x: &[f64], z: &[f64]) -> Result<f64> {
        self.check(x, z)?;
        let mut s = Scratch::for_config(&self.config);
        let mut total = 0.0;
        for i in 0..self.config.data_dim {
            self.forward_dim(i, x, z, &mut s);
            s.grad.zero();
            total += log_pdf_accumulate(x[i], &s.raw[0], &s.raw[1], &s.raw[2], &mut s.grad);
        }
        Ok(total)
    }

    /// `ln p(x | z)` and its gradient with respect to every parameter.
    pub fn log_density_gradient(&self, x: &[f64], z: &[f64]) -> Result<(f64, Vec<f64>)> {
        self.check(x, z)?;
        let mut s = Scratch::for_config(&self.config);
        let mut grads = vec![0.0; self.params.len()];
        let mut total = 0.0;
        for i in 0..self.config.data_dim {
            self.forward_dim(i, x, z, &mut s);
            s.grad.zero();
            total += log_pdf_accumulate(x[i], &s.raw[0], &s.raw[1], &s.raw[2], &mut s.grad);
            self.backward_dim(i, &mut s, &mut grads);
        }
        Ok((total, grads))
    }

    /// Sum of `ln p(x_r | z_r)` over `rows`, adding its gradient into `grads`.
    ///
    /// Dimensions with a constant context share one forward/backward pass
    /// across the batch, since the backward pass is linear in the head
    /// output gradients.
    pub(crate) fn accumulate_batch(
        &self,
        rows: &[usize],
        x: &Matrix,
        z: &Matrix,
        grads: &mut [f64],
        ws: &mut FlowWorkspace,
    ) -> f64 {
        let s = &mut ws.scratch;
        let mut total = 0.0;
        let z_row = |r: usize| if z.n_cols() > 0 { z.row(r) } else { &[][..] };
        for i in 0..self.config.data_dim {
            if let Conditioner::Constant { .. } = self.dims[i].conditioner {
                self.forward_dim(i, &[], &[], s);
                s.grad.zero();
                for &r in rows {
                    total += log_pdf_accumulate(x.get(r, i), &s.raw[0], &s.raw[1], &s.raw[2], &mut s.grad);
                }
                self.backward_dim(i, s, grads);
            } else {
                for &r in rows {
                    let xr = x.row(r);
                    self.forward_dim(i, xr, z_row(r), s);
                    s.grad.zero();
                    total += log_pdf_accumulate(xr[i], &s.raw[0], &s.raw[1], &s.raw[2], &mut s.grad);
                    self.backward_dim(i, s, grads);
                }
            }
        }
        total
    }

    /// Mean `ln p(x | z)` over the rows of `x` and `z`.
    pub fn mean_log_likelihood(&self, x: &Matrix, z: &Matrix) -> Result<f64> {
        let mut total = 0.0;
        for r in 0..x.n_rows() {
            let zr = if z.n_cols() > 0 { z.row(r) } else { &[][..] };
            total += self.log_density(x.row(r), zr)?;
        }
        Ok(total / x.n_rows() as f64)
    }

    pub fn to_gaussian(&self, x: &Matrix, z: &Matrix) -> Result<SurrogateSample> {
        if z.n_rows() != x.n_rows() {
            return Err(Error::Data("x and z have different row counts".into()));
        }
        let mut out = Matrix::zeros(x.n_rows(), self.config.data_dim);
        for r in 0..x.n_rows() {
            let zr = if z.n_cols() > 0 { z.row(r) } else { &[][..] };
            let t = self.transform(x.row(r), zr)?;
            for (o, u) in out.row_mut(r).iter_mut().zip(&t.u) {
                *o = std_normal_icdf(u.clamp(U_CLAMP, 1.0 - U_CLAMP))?;
            }
        }
        Ok(SurrogateSample { values: out })
    }

    /// Solves `τ(x; z) = u` coordinate by coordinate.
    pub fn invert_transform(&self, u: &[f64], z: &[f64]) -> Result<Vec<f64>> {
        if u.len() != self.config.data_dim {
            return Err(Error::Config(format!(
                "flow expects u of length {}, got {}",
                self.config.data_dim,
                u.len()
            )));
        }
        if let Some(bad) = u.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::Domain(format!("u components must lie in (0, 1), got {bad}")));
        }
        let mut x = vec![0.0; u.len()];
        self.check(&x, z)?;
        let mut s = Scratch::for_config(&self.config);
        for i in 0..u.len() {
            self.forward_dim(i, &x, z, &mut s);
            let m = GaussianMixture::from_raw(&s.raw[0], &s.raw[1], &s.raw[2]);
            x[i] = m.quantile(u[i])?;
        }
        Ok(x)
    }

    /// `ln p(x | z)` recorded on a tape whose leaves `leaves` stand for this
    /// flow's parameter vector. An independent route to the gradient.
    pub fn log_density_on_tape(&self, tape: &mut Tape, leaves: &[Var], x: &[f64], z: &[f64]) -> Var {
        let mut per_dim = Vec::with_capacity(x.len());
        for (i, dim) in self.dims.iter().enumerate() {
            let h: Vec<Var> = match &dim.conditioner {
                Conditioner::Constant { offset } => leaves[*offset..*offset + self.config.hidden_dim].to_vec(),
                Conditioner::Network(net) => {
                    let ctx: Vec<Var> = x[..i]
                        .iter()
                        .chain(&z[..self.config.cond_dim])
                        .map(|&v| tape.constant(v))
                        .collect();
                    net.forward_on_tape(tape, leaves, &ctx)
                }
            };
            let logits = dim.weights.forward_on_tape(tape, leaves, &h);
            let means = dim.means.forward_on_tape(tape, leaves, &h);
            let log_vars = dim.log_vars.forward_on_tape(tape, leaves, &h);
            let norm = tape.log_sum_exp(&logits);
            let terms: Vec<Var> = (0..self.config.n_components)
                .map(|j| {
                    let lw = tape.sub(logits[j], norm);
                    let s = tape.clamp(log_vars[j], LOG_VAR_MIN, LOG_VAR_MAX);
                    let ln_n = tape.gaussian_log_pdf(x[i], means[j], s);
                    tape.add(lw, ln_n)
                })
                .collect();
            per_dim.push(tape.log_sum_exp(&terms));
        }
        tape.sum(&per_dim)
    }
}

/// Reusable buffers for batched gradient evaluation.
#[derive(Debug, Clone)]
pub(crate) struct FlowWorkspace {
    scratch: Scratch,
}

impl FlowWorkspace {
    pub fn new(config: &FlowConfig) -> Self {
        Self {
            scratch: Scratch::for_config(config),
        }
    }
}

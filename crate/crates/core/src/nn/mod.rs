//! Minimal differentiable-computation substrate: flat parameter storage,
//! one-hidden-layer perceptrons, reverse-mode gradients, the Adam optimizer
//! and standard-normal special functions.

pub mod adam;
pub mod mlp;
pub mod params;
pub mod special;
pub mod tape;

pub use adam::{AdamConfig, OptimizerState};
pub use mlp::{Mlp, MlpCache, OutputHead};
pub use params::{LayoutBuilder, ParameterVector, TensorSpec};
pub use special::{
    ln_std_normal_pdf, log_std_normal_cdf, log_sum_exp, std_normal_cdf, std_normal_icdf,
    std_normal_pdf,
};
pub use tape::{gradient, Tape, Var};

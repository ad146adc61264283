//! Conditional autoregressive normalizing flow with mixture-of-Gaussian-CDF
//! transformers.
//!
//! For dimension `i` the conditioner produces a context `hᵢ = cᵢ(x_<i, z)`,
//! and three heads turn it into mixture weights (softmax), means and
//! log-variances. The transformer `uᵢ = τ(xᵢ; hᵢ) = Σⱼ wᵢⱼ Φ((xᵢ − μᵢⱼ)/σᵢⱼ)`
//! maps onto a uniform base, so the log-density is just the sum of the log
//! mixture densities. Surrogates are `Φ⁻¹(u)`.

mod config;
mod mixture;
mod model;
mod snapshot;
mod train;

pub use config::{FlowConfig, TrainConfig};
pub use mixture::GaussianMixture;
pub use model::{ConditionalFlow, SurrogateSample, Transformed};
pub use train::{fit, fit_with_callback, FitReport};

/// Bounds applied to the log-variance head before exponentiation.
pub const LOG_VAR_MIN: f64 = -7.0;
pub const LOG_VAR_MAX: f64 = 7.0;

/// `u` is clamped to `[U_CLAMP, 1 − U_CLAMP]` before `Φ⁻¹`.
pub const U_CLAMP: f64 = 1e-7;

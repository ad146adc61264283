use crate::error::{Error, Result};
use crate::flow::{LOG_VAR_MAX, LOG_VAR_MIN};
use crate::nn::special::{lse, std_normal_cdf, HALF_LN_2PI};

/// One-dimensional Gaussian mixture in log-parametrization; its CDF is the
/// flow transformer for a single coordinate.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMixture {
    pub log_weights: Vec<f64>,
    pub means: Vec<f64>,
    pub log_vars: Vec<f64>,
}

impl GaussianMixture {
    /// Builds the mixture from raw head outputs: softmax logits, means and
    /// unclamped log-variances.
    pub fn from_raw(logits: &[f64], means: &[f64], raw_log_vars: &[f64]) -> Self {
        let norm = lse(logits);
        Self {
            log_weights: logits.iter().map(|l| l - norm).collect(),
            means: means.to_vec(),
            log_vars: raw_log_vars
                .iter()
                .map(|s| s.clamp(LOG_VAR_MIN, LOG_VAR_MAX))
                .collect(),
        }
    }

    pub fn n_components(&self) -> usize {
        self.means.len()
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|l| l.exp()).collect()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        let mut u = 0.0;
        for j in 0..self.means.len() {
            let sd = (0.5 * self.log_vars[j]).exp();
            u += self.log_weights[j].exp() * std_normal_cdf((x - self.means[j]) / sd);
        }
        u
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        let mut terms = [0.0f64; 64];
        let mut heap;
        let terms: &mut [f64] = if self.means.len() <= 64 {
            &mut terms[..self.means.len()]
        } else {
            heap = vec![0.0; self.means.len()];
            &mut heap
        };
        for j in 0..self.means.len() {
            let s = self.log_vars[j];
            let r = x - self.means[j];
            terms[j] = self.log_weights[j] - HALF_LN_2PI - 0.5 * s - 0.5 * r * r * (-s).exp();
        }
        lse(terms)
    }

    /// Solves `cdf(x) = u` by bisection.
    pub fn quantile(&self, u: f64) -> Result<f64> {
        if !(u > 0.0 && u < 1.0) {
            return Err(Error::Domain(format!("quantile requires u in (0, 1), got {u}")));
        }
        let spread = self
            .log_vars
            .iter()
            .map(|s| (0.5 * s).exp())
            .fold(0.0, f64::max);
        let lo_mean = self.means.iter().copied().fold(f64::INFINITY, f64::min);
        let hi_mean = self.means.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mut lo = lo_mean - 10.0 * spread;
        let mut hi = hi_mean + 10.0 * spread;
        let mut width = hi - lo;
        while self.cdf(lo) > u {
            lo -= width;
            width *= 2.0;
            if !lo.is_finite() || width > 1e300 {
                return Err(Error::Numerical(format!("cannot bracket quantile {u}")));
            }
        }
        let mut width = hi - lo;
        while self.cdf(hi) < u {
            hi += width;
            width *= 2.0;
            if !hi.is_finite() || width > 1e300 {
                return Err(Error::Numerical(format!("cannot bracket quantile {u}")));
            }
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                return Ok(mid);
            }
            let c = self.cdf(mid);
            if c == u {
                return Ok(mid);
            }
            if c < u {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Err(Error::Numerical(format!(
            "bisection for quantile {u} did not converge in 200 iterations"
        )))
    }
}

/// Gradient buffers of the mixture log-density with respect to the raw heads.
#[derive(Debug, Clone, Default)]
pub(crate) struct MixtureGrad {
    pub logits: Vec<f64>,
    pub means: Vec<f64>,
    pub log_vars: Vec<f64>,
    scratch: Vec<f64>,
}

impl MixtureGrad {
    pub fn resize(&mut self, k: usize) {
        self.logits.resize(k, 0.0);
        self.means.resize(k, 0.0);
        self.log_vars.resize(k, 0.0);
        self.scratch.resize(k, 0.0);
    }

    pub fn zero(&mut self) {
        self.logits.fill(0.0);
        self.means.fill(0.0);
        self.log_vars.fill(0.0);
    }
}

/// `ln Σⱼ softmax(logits)ⱼ N(x; meansⱼ, exp(clamp(raw_log_varsⱼ)))`, adding its
/// derivatives with respect to the three raw head outputs into `grad`.
pub(crate) fn log_pdf_accumulate(
    x: f64,
    logits: &[f64],
    means: &[f64],
    raw_log_vars: &[f64],
    grad: &mut MixtureGrad,
) -> f64 {
    let k = logits.len();
    let norm = lse(logits);
    let terms = &mut grad.scratch;
    for j in 0..k {
        let s = raw_log_vars[j].clamp(LOG_VAR_MIN, LOG_VAR_MAX);
        let r = x - means[j];
        terms[j] = logits[j] - norm - HALF_LN_2PI - 0.5 * s - 0.5 * r * r * (-s).exp();
    }
    let total = lse(terms);
    for j in 0..k {
        let s_raw = raw_log_vars[j];
        let s = s_raw.clamp(LOG_VAR_MIN, LOG_VAR_MAX);
        let inv_var = (-s).exp();
        let r = x - means[j];
        let resp = (terms[j] - total).exp();
        let weight = (logits[j] - norm).exp();
        grad.logits[j] += resp - weight;
        grad.means[j] += resp * r * inv_var;
        if s_raw > LOG_VAR_MIN && s_raw < LOG_VAR_MAX {
            grad.log_vars[j] += resp * (0.5 * r * r * inv_var - 0.5);
        }
    }
    total
}

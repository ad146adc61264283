use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::flow::model::{ConditionalFlow, FlowWorkspace};
use crate::nn::adam::{AdamConfig, OptimizerState};
use crate::seed::derive_seed;

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport {
    /// Per-epoch mean negative joint log-likelihood `−(ln p(x|z) + ln p(y|z))`,
    /// averaged over the minibatches of that epoch.
    pub loss_trace: Vec<f64>,
}

/// Maximum-likelihood training of both flows under one optimizer.
///
/// The objective is the mean of `ln p(xᵢ|zᵢ) + ln p(yᵢ|zᵢ)`; the parameter
/// sets are disjoint, so this is equivalent to fitting each flow on its own.
/// The schedule (epochs, batch size, learning rate, shuffling seed) is
/// taken from `flow_x`'s training config.
pub fn fit(flow_x: &mut ConditionalFlow, flow_y: &mut ConditionalFlow, data: &Dataset) -> Result<FitReport> {
    fit_with_callback(flow_x, flow_y, data, |_, _, _| {})
}

/// [`fit`], calling `after_epoch(epoch, flow_x, flow_y)` at the end of every
/// epoch, e.g. to monitor the full-data likelihood.
pub fn fit_with_callback(
    flow_x: &mut ConditionalFlow,
    flow_y: &mut ConditionalFlow,
    data: &Dataset,
    mut after_epoch: impl FnMut(usize, &ConditionalFlow, &ConditionalFlow),
) -> Result<FitReport> {
    let train = flow_x.config().train;
    train.validate()?;
    let (dx, dy, dz) = data.dims();
    for (name, flow, d) in [("x", &*flow_x, dx), ("y", &*flow_y, dy)] {
        let cfg = flow.config();
        if cfg.data_dim != d || cfg.cond_dim != dz {
            return Err(Error::Config(format!(
                "flow for {name} is configured for ({}, {}) but data has ({d}, {dz})",
                cfg.data_dim, cfg.cond_dim
            )));
        }
    }
    let n = data.n();
    let nx = flow_x.params().len();
    let mut joint: Vec<f64> = flow_x.params().values().iter().chain(flow_y.params().values()).copied().collect();
    let mut grads = vec![0.0; joint.len()];
    let mut optimizer = OptimizerState::new(
        AdamConfig {
            learning_rate: train.learning_rate,
            ..AdamConfig::default()
        },
        joint.len(),
    );
    let mut ws_x = FlowWorkspace::new(flow_x.config());
    let mut ws_y = FlowWorkspace::new(flow_y.config());
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(train.seed, 0x5eed));
    let mut order: Vec<usize> = (0..n).collect();
    let mut loss_trace = Vec::with_capacity(train.epochs);

    for epoch in 0..train.epochs {
        order.shuffle(&mut rng);
        let mut epoch_sum = 0.0;
        for batch in order.chunks(train.batch_size) {
            grads.fill(0.0);
            let (gx, gy) = grads.split_at_mut(nx);
            let ll = flow_x.accumulate_batch(batch, &data.x, &data.z, gx, &mut ws_x)
                + flow_y.accumulate_batch(batch, &data.y, &data.z, gy, &mut ws_y);
            if !ll.is_finite() {
                return Err(Error::Training {
                    epoch: Some(epoch),
                    value: ll,
                    context: "batch log-likelihood".into(),
                });
            }
            epoch_sum -= ll;
            let scale = -1.0 / batch.len() as f64;
            for g in grads.iter_mut() {
                *g *= scale;
            }
            optimizer.step(&mut joint, &grads).map_err(|e| match e {
                Error::Training { value, context, .. } => Error::Training {
                    epoch: Some(epoch),
                    value,
                    context,
                },
                other => other,
            })?;
            let (px, py) = joint.split_at(nx);
            flow_x.params_mut().assign(px)?;
            flow_y.params_mut().assign(py)?;
        }
        loss_trace.push(epoch_sum / n as f64);
        after_epoch(epoch, flow_x, flow_y);
    }
    Ok(FitReport { loss_trace })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Matrix;
    use crate::flow::config::FlowConfig;
    use rand::SeedableRng;
    use rand_distr::{Distribution, StandardNormal};

    /// Expected log-density of N(0, 1) under itself: `−½ ln(2πe)`.
    const NORMAL_LOG_LIKELIHOOD: f64 = -1.418_938_533_204_672_7;

    fn normal_column(n: usize, seed: u64, f: impl Fn(f64) -> f64) -> Matrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Matrix::column_vector((0..n).map(|_| f(StandardNormal.sample(&mut rng))).collect())
    }

    fn flows(seed: u64, epochs: usize) -> (ConditionalFlow, ConditionalFlow) {
        let mut cfg = FlowConfig::new(1, 0);
        cfg.train.epochs = epochs;
        cfg.train.seed = seed;
        let fx = ConditionalFlow::new(cfg).unwrap();
        cfg.train.seed = seed + 1;
        (fx, ConditionalFlow::new(cfg).unwrap())
    }

    fn fit_column(x: Matrix, epochs: usize) -> (ConditionalFlow, FitReport) {
        let y = normal_column(x.n_rows(), 99, |v| v);
        let data = Dataset::unconditional(x, y).unwrap();
        let (mut fx, mut fy) = flows(1, epochs);
        let report = fit(&mut fx, &mut fy, &data).unwrap();
        (fx, report)
    }

    #[test]
    fn standard_normal_reaches_its_entropy() {
        let x = normal_column(1000, 3, |v| v);
        let (fx, report) = fit_column(x.clone(), 100);
        assert_eq!(report.loss_trace.len(), 100);
        let ll = fx.mean_log_likelihood(&x, &Matrix::zeros(1000, 0)).unwrap();
        assert!((ll - NORMAL_LOG_LIKELIHOOD).abs() < 0.05, "{ll}");
    }

    #[test]
    fn shifted_normal_is_absorbed_by_the_means() {
        let x = normal_column(1000, 4, |v| 3.0 + v);
        let (fx, _) = fit_column(x.clone(), 100);
        let ll = fx.mean_log_likelihood(&x, &Matrix::zeros(1000, 0)).unwrap();
        assert!((ll - NORMAL_LOG_LIKELIHOOD).abs() < 0.05, "{ll}");
    }

    #[test]
    fn zero_epochs_changes_nothing() {
        let x = normal_column(50, 5, |v| v);
        let y = normal_column(50, 6, |v| v);
        let data = Dataset::unconditional(x, y).unwrap();
        let (mut fx, mut fy) = flows(2, 0);
        let before = (fx.params().clone(), fy.params().clone());
        let report = fit(&mut fx, &mut fy, &data).unwrap();
        assert!(report.loss_trace.is_empty());
        assert_eq!(fx.params(), &before.0);
        assert_eq!(fy.params(), &before.1);
    }

    #[test]
    fn lognormal_is_gaussianized() {
        let x = normal_column(1000, 7, f64::exp);
        let (fx, _) = fit_column(x.clone(), 100);
        let s = fx.to_gaussian(&x, &Matrix::zeros(1000, 0)).unwrap();
        let m = &s.diagnostics()[0];
        assert!(m.mean.abs() < 0.1 && (m.variance - 1.0).abs() < 0.15, "{m:?}");
    }

    #[test]
    fn training_is_deterministic() {
        let x = normal_column(200, 8, |v| v * v);
        let y = normal_column(200, 9, |v| v);
        let data = Dataset::unconditional(x, y).unwrap();
        let run = || {
            let (mut fx, mut fy) = flows(3, 5);
            let r = fit(&mut fx, &mut fy, &data).unwrap();
            (fx.params().clone(), r)
        };
        assert_eq!(run(), run());
    }

    #[test]
    fn dimension_mismatch_is_a_config_error() {
        let x = normal_column(20, 1, |v| v);
        let data = Dataset::unconditional(x.hstack(&x).unwrap(), x).unwrap();
        let (mut fx, mut fy) = flows(0, 1);
        assert!(matches!(fit(&mut fx, &mut fy, &data), Err(Error::Config(_))));
    }
}

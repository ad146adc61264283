use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdamConfig {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
}

impl Default for AdamConfig {
    fn default() -> Self {
        Self {
            learning_rate: 1e-2,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
        }
    }
}

/// Adam moment estimates for one parameter vector.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState {
    pub config: AdamConfig,
    step_count: u64,
    first_moment: Vec<f64>,
    second_moment: Vec<f64>,
}

impl OptimizerState {
    pub fn new(config: AdamConfig, n_params: usize) -> Self {
        Self {
            config,
            step_count: 0,
            first_moment: vec![0.0; n_params],
            second_moment: vec![0.0; n_params],
        }
    }

    pub fn step_count(&self) -> u64 {
        self.step_count
    }

    pub fn first_moment(&self) -> &[f64] {
        &self.first_moment
    }

    pub fn second_moment(&self) -> &[f64] {
        &self.second_moment
    }

    /// One bias-corrected Adam descent step. `grads` is checked for length and
    /// finiteness before anything is modified.
    pub fn step(&mut self, params: &mut [f64], grads: &[f64]) -> Result<()> {
        if params.len() != self.first_moment.len() || grads.len() != params.len() {
            return Err(Error::Config(format!(
                "optimizer holds {} moments but got {} parameters and {} gradients",
                self.first_moment.len(),
                params.len(),
                grads.len()
            )));
        }
        if let Some((i, g)) = grads.iter().enumerate().find(|(_, g)| !g.is_finite()) {
            return Err(Error::Training {
                epoch: None,
                value: *g,
                context: format!("gradient component {i}"),
            });
        }
        let AdamConfig {
            learning_rate,
            beta1,
            beta2,
            epsilon,
        } = self.config;
        self.step_count += 1;
        let t = self.step_count as i32;
        let c1 = 1.0 - beta1.powi(t);
        let c2 = 1.0 - beta2.powi(t);
        for ((p, &g), (m, v)) in params
            .iter_mut()
            .zip(grads)
            .zip(self.first_moment.iter_mut().zip(self.second_moment.iter_mut()))
        {
            *m = beta1 * *m + (1.0 - beta1) * g;
            *v = beta2 * *v + (1.0 - beta2) * g * g;
            *p -= learning_rate * (*m / c1) / ((*v / c2).sqrt() + epsilon);
        }
        if let Some(bad) = params.iter().find(|p| !p.is_finite()) {
            return Err(Error::Training {
                epoch: None,
                value: *bad,
                context: "parameter after optimizer step".into(),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_gradient_is_a_fixed_point() {
        let mut s = OptimizerState::new(AdamConfig::default(), 3);
        let mut p = vec![1.0, -2.0, 0.5];
        s.step(&mut p, &[0.0; 3]).unwrap();
        assert_eq!(p, vec![1.0, -2.0, 0.5]);
        assert_eq!(s.step_count(), 1);
    }

    #[test]
    fn converges_on_a_quadratic() {
        let mut s = OptimizerState::new(AdamConfig::default(), 1);
        let mut p = vec![0.0];
        for _ in 0..2000 {
            let g = 2.0 * (p[0] - 2.0);
            s.step(&mut p, &[g]).unwrap();
        }
        assert!((p[0] - 2.0).abs() < 1e-2, "{}", p[0]);
        assert_eq!(s.step_count(), 2000);
    }

    #[test]
    fn deterministic() {
        let run = || {
            let mut s = OptimizerState::new(AdamConfig::default(), 2);
            let mut p = vec![0.3f64, -0.7];
            for k in 0..50 {
                let g = [p[0].sin() + k as f64 * 0.01, p[1] * p[1]];
                s.step(&mut p, &g).unwrap();
            }
            (p, s)
        };
        let (a, sa) = run();
        let (b, sb) = run();
        assert_eq!(a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), b.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
        assert_eq!(sa, sb);
    }

    #[test]
    fn rejects_non_finite_and_mismatched_gradients() {
        let mut s = OptimizerState::new(AdamConfig::default(), 2);
        let mut p = vec![0.0, 0.0];
        assert!(matches!(s.step(&mut p, &[f64::NAN, 0.0]), Err(Error::Training { .. })));
        assert_eq!(s.step_count(), 0);
        assert!(matches!(s.step(&mut p, &[0.0]), Err(Error::Config(_))));
    }
}

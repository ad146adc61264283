//! Closed-form Gaussian mutual information of flow surrogates.
//!
//! The pipeline: standardize every column, fit one conditional flow for `x`
//! and one for `y` by maximum likelihood, map the samples to standard-Gaussian
//! surrogates `x'`, `y'`, form their uncentered covariances and return
//! `½ (ln det Σ_x' + ln det Σ_y' − ln det Σ_x'y')`.

use serde::{Deserialize, Serialize};

use crate::data::{ColumnMoments, Dataset, Matrix, Standardizer};
use crate::error::{Error, Result, StageExt};
use crate::flow::{fit, ConditionalFlow, FlowConfig, SurrogateSample, TrainConfig};
use crate::linalg;
use crate::seed::derive_seed;

/// Symmetric `dim × dim` matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceMatrix {
    dim: usize,
    entries: Vec<f64>,
}

impl CovarianceMatrix {
    pub fn new(dim: usize, entries: Vec<f64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Config(format!(
                "covariance of dimension {dim} needs {} entries, got {}",
                dim * dim,
                entries.len()
            )));
        }
        for i in 0..dim {
            for j in 0..i {
                if (entries[i * dim + j] - entries[j * dim + i]).abs() > 1e-12 {
                    return Err(Error::Contract(format!("covariance is not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(Self { dim, entries })
    }

    pub fn identity(dim: usize) -> Self {
        let mut entries = vec![0.0; dim * dim];
        for i in 0..dim {
            entries[i * dim + i] = 1.0;
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.dim + j]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i)).sum()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|v| v * c).collect(),
        }
    }

    /// Principal sub-block over `start..start + len`.
    pub fn block(&self, start: usize, len: usize) -> Self {
        let mut entries = Vec::with_capacity(len * len);
        for i in start..start + len {
            entries.extend_from_slice(&self.entries[i * self.dim + start..i * self.dim + start + len]);
        }
        Self { dim: len, entries }
    }

    fn with_jitter(&self) -> Self {
        let jitter = 1e-10 * self.trace() / self.dim as f64;
        let mut out = self.clone();
        for i in 0..self.dim {
            out.entries[i * self.dim + i] += jitter;
        }
        out
    }
}

/// Uncentered sample covariance `1/(n−1) Σᵢ vᵢ vᵢᵀ`.
pub fn sample_covariance(samples: &Matrix) -> Result<CovarianceMatrix> {
    let (n, d) = (samples.n_rows(), samples.n_cols());
    if n < 2 {
        return Err(Error::Data(format!("covariance needs at least 2 rows, got {n}")));
    }
    if d == 0 {
        return Err(Error::Data("covariance of zero columns".into()));
    }
    let mut entries = vec![0.0; d * d];
    for row in samples.rows() {
        for i in 0..d {
            let ri = row[i];
            for j in 0..=i {
                entries[i * d + j] += ri * row[j];
            }
        }
    }
    let norm = 1.0 / (n - 1) as f64;
    for i in 0..d {
        for j in 0..=i {
            let v = entries[i * d + j] * norm;
            entries[i * d + j] = v;
            entries[j * d + i] = v;
        }
    }
    Ok(CovarianceMatrix { dim: d, entries })
}

/// `ln det m` through the Cholesky factor.
pub fn log_det(m: &CovarianceMatrix) -> Result<f64> {
    linalg::log_det_spd(&m.entries, m.dim)
}

/// [`log_det`] with one retry after adding `1e-10 · trace/d` to the diagonal.
fn log_det_with_jitter(m: &CovarianceMatrix) -> Result<f64> {
    match log_det(m) {
        Err(Error::NotPositiveDefinite { .. }) => log_det(&m.with_jitter()),
        other => other,
    }
}

/// `½ (ln det Σ_x + ln det Σ_y − ln det Σ_xy)`.
pub fn gaussian_mi(cov_x: &CovarianceMatrix, cov_y: &CovarianceMatrix, cov_xy: &CovarianceMatrix) -> Result<f64> {
    let (dx, dy) = (cov_x.dim, cov_y.dim);
    if cov_xy.dim != dx + dy {
        return Err(Error::Contract(format!(
            "joint covariance has dimension {}, expected {dx} + {dy}",
            cov_xy.dim
        )));
    }
    for (block, marginal, name) in [(cov_xy.block(0, dx), cov_x, "x"), (cov_xy.block(dx, dy), cov_y, "y")] {
        if block.entries.iter().zip(&marginal.entries).any(|(a, b)| (a - b).abs() > 1e-9) {
            return Err(Error::Contract(format!("joint covariance block for {name} differs from its marginal")));
        }
    }
    Ok(0.5 * (log_det_with_jitter(cov_x)? + log_det_with_jitter(cov_y)? - log_det_with_jitter(cov_xy)?))
}

/// Gaussian MI of two aligned surrogate samples.
pub fn surrogate_mi(x: &Matrix, y: &Matrix) -> Result<f64> {
    let joint = x.hstack(y)?;
    gaussian_mi(&sample_covariance(x)?, &sample_covariance(y)?, &sample_covariance(&joint)?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub n_components: usize,
    pub hidden_dim: usize,
    /// Schedule and master seed; per-flow seeds are derived from `train.seed`.
    pub train: TrainConfig,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            n_components: FlowConfig::DEFAULT_COMPONENTS,
            hidden_dim: FlowConfig::DEFAULT_HIDDEN,
            train: TrainConfig::default(),
        }
    }
}

impl EstimatorConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.train.seed = seed;
        self
    }

    pub fn with_epochs(mut self, epochs: usize) -> Self {
        self.train.epochs = epochs;
        self
    }

    /// Flow configurations for `x` and `y` with independent derived seeds.
    pub fn flow_configs(&self, dims: (usize, usize, usize)) -> (FlowConfig, FlowConfig) {
        let (dx, dy, dz) = dims;
        let make = |d: usize, stream: u64| FlowConfig {
            data_dim: d,
            cond_dim: dz,
            n_components: self.n_components,
            hidden_dim: self.hidden_dim,
            train: TrainConfig {
                seed: derive_seed(self.train.seed, stream),
                ..self.train
            },
        };
        (make(dx, 1), make(dy, 2))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurrogateDiagnostics {
    pub x: Vec<ColumnMoments>,
    pub y: Vec<ColumnMoments>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateResult {
    /// Estimate in nats. Not clipped at zero.
    pub value: f64,
    pub n: usize,
    pub dims: (usize, usize, usize),
    pub loss_trace: Vec<f64>,
    pub surrogate_diagnostics: SurrogateDiagnostics,
    pub seed: u64,
}

/// Trained-flow surrogates of a dataset.
#[derive(Debug, Clone)]
pub struct Surrogates {
    pub x: SurrogateSample,
    pub y: SurrogateSample,
    pub loss_trace: Vec<f64>,
}

/// Standardization, maximum-likelihood fitting and the Gaussian surrogate map.
pub fn fit_surrogates(data: &Dataset, cfg: &EstimatorConfig) -> Result<Surrogates> {
    let standardize = |m: &Matrix| -> Result<Matrix> {
        if m.n_cols() == 0 {
            return Ok(m.clone());
        }
        Ok(Standardizer::fit(m)?.apply(m))
    };
    let std_data = Dataset::new(standardize(&data.x)?, standardize(&data.y)?, standardize(&data.z)?)
        .stage("standardize")?;
    let (cfg_x, cfg_y) = cfg.flow_configs(data.dims());
    let mut flow_x = ConditionalFlow::new(cfg_x).stage("build flows")?;
    let mut flow_y = ConditionalFlow::new(cfg_y).stage("build flows")?;
    let report = fit(&mut flow_x, &mut flow_y, &std_data).stage("fit")?;
    let x = flow_x.to_gaussian(&std_data.x, &std_data.z).stage("surrogates")?;
    let y = flow_y.to_gaussian(&std_data.y, &std_data.z).stage("surrogates")?;
    Ok(Surrogates {
        x,
        y,
        loss_trace: report.loss_trace,
    })
}

/// Estimate for any `d_Z ≥ 0`.
pub fn estimate(data: &Dataset, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    let s = fit_surrogates(data, cfg)?;
    let value = surrogate_mi(&s.x.values, &s.y.values).stage("gaussian mi")?;
    Ok(EstimateResult {
        value,
        n: data.n(),
        dims: data.dims(),
        loss_trace: s.loss_trace,
        surrogate_diagnostics: SurrogateDiagnostics {
            x: s.x.diagnostics(),
            y: s.y.diagnostics(),
        },
        seed: cfg.train.seed,
    })
}

/// `I(X; Y | Z)`; requires at least one conditioning column.
pub fn estimate_cmi(data: &Dataset, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    if data.z.n_cols() == 0 {
        return Err(Error::Config("estimate_cmi needs d_Z ≥ 1; use estimate_mi".into()));
    }
    estimate(data, cfg)
}

/// `I(X; Y)`: the same pipeline with an empty conditioning set.
pub fn estimate_mi(x: &Matrix, y: &Matrix, cfg: &EstimatorConfig) -> Result<EstimateResult> {
    estimate(&Dataset::unconditional(x.clone(), y.clone())?, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use rand_distr::{Distribution, StandardNormal};

    fn cov2(rho: f64) -> CovarianceMatrix {
        CovarianceMatrix::new(2, vec![1.0, rho, rho, 1.0]).unwrap()
    }

    #[test]
    fn covariance_examples() {
        let m = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        assert_eq!(sample_covariance(&m).unwrap(), CovarianceMatrix::identity(2));
        let z = Matrix::zeros(5, 3);
        assert!(sample_covariance(&z).unwrap().entries().iter().all(|&v| v == 0.0));
        assert!(matches!(sample_covariance(&Matrix::zeros(1, 2)), Err(Error::Data(_))));

        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let rows: Vec<Vec<f64>> = (0..1000)
            .map(|_| (0..3).map(|_| StandardNormal.sample(&mut rng)).collect())
            .collect();
        let c = sample_covariance(&Matrix::from_rows(&rows).unwrap()).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { 1.0 } else { 0.0 };
                assert!((c.get(i, j) - target).abs() < 0.15);
            }
        }
    }

    #[test]
    fn covariance_is_uncentered() {
        let m = Matrix::column_vector(vec![2.0, 2.0, 2.0]);
        assert_eq!(sample_covariance(&m).unwrap().get(0, 0), 6.0);
    }

    #[test]
    fn log_det_examples() {
        assert_eq!(log_det(&CovarianceMatrix::identity(4)).unwrap(), 0.0);
        let d = CovarianceMatrix::new(2, vec![2.0, 0.0, 0.0, 3.0]).unwrap();
        assert!((log_det(&d).unwrap() - 6f64.ln()).abs() < 1e-14);
        // direct 2x2 determinant: 1 - 0.64
        assert!((log_det(&cov2(0.8)).unwrap() - 0.36f64.ln()).abs() < 1e-14);
        let singular = CovarianceMatrix::new(2, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        assert!(matches!(log_det(&singular), Err(Error::NotPositiveDefinite { pivot: 1, .. })));
    }

    #[test]
    fn log_det_scaling() {
        let m = CovarianceMatrix::new(3, vec![2.0, 0.3, 0.1, 0.3, 1.0, 0.2, 0.1, 0.2, 1.5]).unwrap();
        let base = log_det(&m).unwrap();
        for c in [0.5f64, 2.0] {
            assert!((log_det(&m.scaled(c)).unwrap() - (3.0 * c.ln() + base)).abs() < 1e-9);
        }
    }

    #[test]
    fn gaussian_mi_examples() {
        let i1 = CovarianceMatrix::identity(1);
        assert_eq!(gaussian_mi(&i1, &i1, &CovarianceMatrix::identity(2)).unwrap(), 0.0);
        let mi = gaussian_mi(&i1, &i1, &cov2(0.8)).unwrap();
        assert!((mi - (-0.5 * 0.36f64.ln())).abs() < 1e-12);
        assert!((mi - 0.5108).abs() < 1e-4);

        let rho = 0.5;
        let mut e = vec![0.0; 16];
        for i in 0..4 {
            e[i * 4 + i] = 1.0;
        }
        for i in 0..2 {
            e[i * 4 + i + 2] = rho;
            e[(i + 2) * 4 + i] = rho;
        }
        let joint = CovarianceMatrix::new(4, e).unwrap();
        let i2 = CovarianceMatrix::identity(2);
        let mi = gaussian_mi(&i2, &i2, &joint).unwrap();
        assert!((mi - (-(0.75f64).ln())).abs() < 1e-12);
        assert!((mi - 0.2877).abs() < 1e-4);
    }

    #[test]
    fn gaussian_mi_contract_errors() {
        let i1 = CovarianceMatrix::identity(1);
        assert!(matches!(
            gaussian_mi(&i1, &i1, &CovarianceMatrix::identity(3)),
            Err(Error::Contract(_))
        ));
        let off = CovarianceMatrix::new(1, vec![2.0]).unwrap();
        assert!(matches!(gaussian_mi(&off, &i1, &cov2(0.1)), Err(Error::Contract(_))));
    }

    #[test]
    fn jitter_rescues_borderline_singular_covariance() {
        // duplicated sample columns: exactly singular joint covariance
        let x = Matrix::column_vector(vec![1.0, -1.0, 0.5, 2.0]);
        let joint = x.hstack(&x).unwrap();
        let c = sample_covariance(&joint).unwrap();
        assert!(log_det(&c).is_err());
        let mi = surrogate_mi(&x, &x).unwrap();
        assert!(mi.is_finite() && mi > 5.0);
    }

    #[test]
    fn estimate_cmi_requires_conditioning() {
        let x = Matrix::column_vector(vec![0.1, 0.5, -0.3, 0.9]);
        let data = Dataset::unconditional(x.clone(), x).unwrap();
        assert!(matches!(estimate_cmi(&data, &EstimatorConfig::default()), Err(Error::Config(_))));
    }

    #[test]
    fn flow_seeds_are_distinct() {
        let (a, b) = EstimatorConfig::default().with_seed(3).flow_configs((1, 1, 0));
        assert_ne!(a.train.seed, b.train.seed);
        assert_eq!(a.train.epochs, 100);
    }
}

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 100,
            batch_size: 64,
            learning_rate: 1e-2,
            seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size == 0 {
            return Err(Error::Config("batch_size must be positive".into()));
        }
        if !(self.learning_rate.is_finite() && self.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive and finite, got {}",
                self.learning_rate
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FlowConfig {
    /// Dimension of the transformed variable.
    pub data_dim: usize,
    /// Dimension of the conditioning variable; 0 for an unconditional flow.
    pub cond_dim: usize,
    /// Mixture components per dimension.
    pub n_components: usize,
    /// Width of every hidden layer and of the conditioner output.
    pub hidden_dim: usize,
    pub train: TrainConfig,
}

impl FlowConfig {
    pub const DEFAULT_COMPONENTS: usize = 16;
    pub const DEFAULT_HIDDEN: usize = 4;

    pub fn new(data_dim: usize, cond_dim: usize) -> Self {
        Self {
            data_dim,
            cond_dim,
            n_components: Self::DEFAULT_COMPONENTS,
            hidden_dim: Self::DEFAULT_HIDDEN,
            train: TrainConfig::default(),
        }
    }

    pub fn with_components(mut self, k: usize) -> Self {
        self.n_components = k;
        self
    }

    pub fn with_hidden(mut self, hidden: usize) -> Self {
        self.hidden_dim = hidden;
        self
    }

    pub fn with_train(mut self, train: TrainConfig) -> Self {
        self.train = train;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.data_dim == 0 {
            return Err(Error::Config("data_dim must be positive".into()));
        }
        if self.n_components == 0 {
            return Err(Error::Config("n_components must be at least 1".into()));
        }
        if self.hidden_dim == 0 {
            return Err(Error::Config("hidden_dim must be positive".into()));
        }
        self.train.validate()
    }
}

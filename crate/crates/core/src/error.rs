use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Shapes or hyperparameters that do not fit together.
    #[error("configuration error: {0}")]
    Config(String),

    /// Input data violating a precondition (row alignment, finiteness, ...).
    #[error("data error: {0}")]
    Data(String),

    #[error("training error at epoch {epoch:?}: non-finite value {value} ({context})")]
    Training {
        epoch: Option<usize>,
        value: f64,
        context: String,
    },

    #[error("matrix is not positive definite: pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("numerical error: {0}")]
    Numerical(String),

    /// Argument outside the mathematical domain of a function.
    #[error("domain error: {0}")]
    Domain(String),

    /// A caller-side contract was broken (e.g. covariance blocks disagree).
    #[error("contract error: {0}")]
    Contract(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("oracle error: {0}")]
    Oracle(String),

    #[error("AUC is undefined: records contain only one label")]
    AucUndefined,

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn at_stage(self, stage: &'static str) -> Self {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// The innermost error, skipping stage labels.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }

    /// Process exit code used by the command-line front end: 3 for numerical
    /// failures, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Training { .. } | Error::NotPositiveDefinite { .. } | Error::Numerical(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.at_stage(stage))
    }
}

use thiserror::Error;

/// Stage of a filter step at which the weights could not be normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightStage {
    /// Correction weights (likelihood, or combined likelihood for the smoother).
    Correction,
    /// First-stage pilot weights of the auxiliary filter.
    Pilot,
    /// Aggregated per-model weights of the model-averaging filter.
    ModelAveraging,
}

#[derive(Debug, Error)]
pub enum SmcError {
    /// Every weight underflowed to zero: the filter has lost track.
    #[error("weight degeneracy at k={k} ({stage:?} stage): all weights are zero")]
    Degeneracy { k: usize, stage: WeightStage },

    #[error("matrix is not positive (semi)definite")]
    NotPositiveDefinite,

    #[error("singular matrix")]
    Singular,

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("all weights are zero")]
    ZeroWeights,

    #[error("empty set")]
    EmptySet,

    #[error("bearing undefined at the origin")]
    BearingAtOrigin,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: String, message: String },
}

impl SmcError {
    pub fn io(path: impl AsRef<std::path::Path>, source: std::io::Error) -> Self {
        SmcError::Io {
            path: path.as_ref().display().to_string(),
            source,
        }
    }

    pub fn is_degeneracy(&self) -> bool {
        matches!(self, SmcError::Degeneracy { .. })
    }
}

pub type Result<T, E = SmcError> = std::result::Result<T, E>;

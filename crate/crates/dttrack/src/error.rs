use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// An operation was applied to tensors whose shapes do not conform to
    /// its shape rule. Carries both shapes for diagnosis.
    #[error("shape mismatch in {op}: {lhs:?} vs {rhs:?}")]
    ShapeMismatch {
        op: &'static str,
        lhs: Vec<usize>,
        rhs: Vec<usize>,
    },

    /// Input outside the mathematical domain of the primitive (log/sqrt of a
    /// negative value, fractional power of a negative base).
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// A caller broke an API precondition.
    #[error("contract violation: {0}")]
    Contract(String),

    /// A non-finite value appeared where the pipeline requires finiteness.
    #[error("numeric fault in {site}: {detail}")]
    NumericFault { site: String, detail: String },

    /// backward() produced no gradient for a parameter the optimizer expected.
    #[error("missing gradient for parameter `{0}`")]
    MissingGradient(String),

    /// A stage plan failed validation.
    #[error("invalid stage plan: {0}")]
    PlanValidation(String),

    /// A persisted artifact is internally inconsistent.
    #[error("integrity error: {0}")]
    Integrity(String),

    /// A metric has no defined value (for example, zero visible frames).
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Configuration file could not be parsed or violated the schema.
    #[error("config error: {0}")]
    Config(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

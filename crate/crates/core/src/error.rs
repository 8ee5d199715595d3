use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("operation undefined on the zero polynomial")]
    ZeroPolynomial,

    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },

    /// A degree computed from Chern data disagrees with a stored polynomial,
    /// or a formula produced a non-integral degree.
    #[error("degree mismatch for {what}: formula gives {expected}, found {found}")]
    DegreeMismatch {
        what: String,
        expected: String,
        found: String,
    },

    #[error("k = {k} is not admissible: formats must satisfy {delta} <= n - k (n = {n})")]
    Inadmissible { k: usize, n: usize, delta: usize },

    #[error("missing polynomial: {0}")]
    Missing(String),

    #[error("singular input: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    Invalid(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::Invalid(msg.into())
    }

    pub(crate) fn shape(expected: impl ToString, found: impl ToString) -> Self {
        Error::ShapeMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// Short machine-readable tag used by the CLI error object.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::ShapeMismatch { .. } => "shape_mismatch",
            Error::ZeroPolynomial => "zero_polynomial",
            Error::OutOfRange { .. } => "out_of_range",
            Error::DegreeMismatch { .. } => "degree_mismatch",
            Error::Inadmissible { .. } => "inadmissible",
            Error::Missing(_) => "missing",
            Error::Singular(_) => "singular",
            Error::Invalid(_) => "invalid",
            Error::Numerical(_) => "numerical",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}

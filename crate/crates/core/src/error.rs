use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown generator `{0}`")]
    UnknownGenerator(String),

    #[error("generator `{0}` is not of the form a<integer>")]
    NotIndexed(String),

    #[error("invalid presentation: {0}")]
    Presentation(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not unitary: ‖U†U − I‖ = {defect:e}")]
    NotUnitary { defect: f64 },

    #[error("eigendata does not reproduce the matrix: residual {residual:e}")]
    BadEigendata { residual: f64 },

    #[error("missing eigendata: {0}")]
    MissingEigendata(&'static str),

    #[error("power iteration did not converge after {iterations} iterations (last Rayleigh quotient {last_rayleigh:e})")]
    NonConvergence { iterations: usize, last_rayleigh: f64 },

    #[error("matrix is not normal to working precision (off-diagonal Schur residual {0:e})")]
    NotNormal(f64),

    #[error("parameter out of range: {0}")]
    OutOfRange(String),

    #[error("dimension cap exceeded: {0}")]
    Cap(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("invalid finite group data: {0}")]
    Group(String),

    #[error("while evaluating `{word}`: {source}")]
    InWord {
        word: String,
        #[source]
        source: Box<Error>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("json error in {context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn in_word(self, word: impl std::fmt::Display) -> Self {
        Error::InWord {
            word: word.to_string(),
            source: Box::new(self),
        }
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Malformed text score or chord annotation.
    #[error("syntax error at line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    /// A value parsed fine but breaks a song invariant.
    #[error("invariant violation: {0}")]
    Invariant(String),

    #[error("midi: {0}")]
    Midi(String),

    #[error("annotation sidecar: {0}")]
    Sidecar(String),

    #[error("structure spec: {0}")]
    Structure(String),

    #[error("empty corpus")]
    EmptyCorpus,

    #[error("empty seed melody")]
    EmptySeedMelody,

    #[error("empty bass track")]
    EmptyBass,

    #[error("statistics: {0}")]
    Stats(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("{module} (section {section}): {source}")]
    Module {
        module: &'static str,
        section: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invariant(msg: impl Into<String>) -> Self {
        Error::Invariant(msg.into())
    }

    pub fn in_module(self, module: &'static str, section: usize) -> Self {
        Error::Module {
            module,
            section,
            source: Box::new(self),
        }
    }

    /// True for errors caused by a value that parsed but violates an invariant.
    pub fn is_invariant_violation(&self) -> bool {
        match self {
            Error::Invariant(_) => true,
            Error::Module { source, .. } => source.is_invariant_violation(),
            _ => false,
        }
    }
}

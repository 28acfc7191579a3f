use thiserror::Error;

use crate::mode::PathId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid wiring: {0}")]
    InvalidWiring(String),

    #[error("OAM value {oam} in path {path} exceeds cutoff {l_max}")]
    OamCutoff { path: PathId, oam: i32, l_max: i32 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("element {index} ({element}): {source}")]
    Element {
        index: usize,
        element: String,
        #[source]
        source: Box<Error>,
    },

    #[error("term {term} does not hold exactly one photon in trigger path {path}")]
    MissingTriggerPhoton { path: PathId, term: String },

    #[error("cannot build tensor: {0}")]
    Tensor(String),

    #[error(transparent)]
    Parse(#[from] ParseError),

    #[error("manifest row {row} ({label}): {message}")]
    Manifest {
        row: usize,
        label: String,
        message: String,
    },

    #[error("behavior check fails on the unmodified configuration")]
    InconsistentBehaviorCheck,

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    UnknownElement(String),
    Arity {
        element: String,
        expected: usize,
        found: usize,
    },
    UnknownPath(String),
    MalformedInteger(String),
    Syntax(String),
}

/// A parse failure with a 1-based source position.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{line}:{column}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub kind: ParseErrorKind,
}

impl std::fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ParseErrorKind::UnknownElement(n) => write!(f, "unknown element `{n}`"),
            ParseErrorKind::Arity {
                element,
                expected,
                found,
            } => write!(
                f,
                "`{element}` takes {expected} arguments after the input, found {found}"
            ),
            ParseErrorKind::UnknownPath(p) => write!(f, "unknown path label `{p}`"),
            ParseErrorKind::MalformedInteger(s) => write!(f, "malformed integer `{s}`"),
            ParseErrorKind::Syntax(s) => write!(f, "{s}"),
        }
    }
}

use thiserror::Error;

/// Broad class of a failure. Front-ends map this onto exit codes and HTTP
/// statuses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Malformed or inconsistent input.
    Validation,
    /// A formula was evaluated outside its domain.
    Math,
    /// A referenced id does not exist.
    NotFound,
    /// The request is valid but conflicts with current state.
    Conflict,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}{message}", if path.is_empty() { String::new() } else { format!("{path}: ") })]
    Invalid { path: String, message: String },

    #[error("malformed document: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("unsupported schema version {found:?}, expected {expected:?}")]
    SchemaVersion { found: String, expected: String },

    #[error("{what} {id:?} not found")]
    NotFound { what: &'static str, id: String },

    #[error("out of order: {0}")]
    OutOfOrder(String),

    #[error("session is not complete")]
    Incomplete,

    #[error("{context}: {message}")]
    Math { context: String, message: String },

    #[error("power iteration did not converge after {iterations} iterations")]
    NoConvergence { iterations: usize },

    #[error("consistency ratio {ratio:.4} for {cluster:?} exceeds {threshold}")]
    Inconsistent {
        cluster: String,
        ratio: f64,
        threshold: f64,
    },
}

impl Error {
    pub fn invalid(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Invalid {
            path: path.into(),
            message: message.into(),
        }
    }

    pub fn math(context: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Math {
            context: context.into(),
            message: message.into(),
        }
    }

    pub fn not_found(what: &'static str, id: impl Into<String>) -> Self {
        Error::NotFound {
            what,
            id: id.into(),
        }
    }

    /// Prefix the location of a validation or math error with `prefix`.
    pub fn at(self, prefix: impl AsRef<str>) -> Self {
        let prefix = prefix.as_ref();
        match self {
            Error::Invalid { path, message } => Error::Invalid {
                path: format!("{prefix}{path}"),
                message,
            },
            Error::Math { context, message } => Error::Math {
                context: if context.is_empty() {
                    prefix.to_string()
                } else {
                    format!("{prefix}: {context}")
                },
                message,
            },
            other => other,
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Invalid { .. }
            | Error::Parse(_)
            | Error::Io(_)
            | Error::SchemaVersion { .. }
            | Error::Inconsistent { .. } => ErrorKind::Validation,
            Error::Math { .. } | Error::NoConvergence { .. } => ErrorKind::Math,
            Error::NotFound { .. } => ErrorKind::NotFound,
            Error::OutOfOrder(_) | Error::Incomplete => ErrorKind::Conflict,
        }
    }

    /// Location of the offending field, when one is known.
    pub fn path(&self) -> Option<&str> {
        match self {
            Error::Invalid { path, .. } => Some(path),
            Error::Math { context, .. } => Some(context),
            _ => None,
        }
    }

    /// Stable machine-readable code.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid { .. } => "invalid",
            Error::Parse(_) => "malformed",
            Error::Io(_) => "io",
            Error::SchemaVersion { .. } => "schema_version",
            Error::NotFound { .. } => "not_found",
            Error::OutOfOrder(_) => "out_of_order",
            Error::Incomplete => "incomplete",
            Error::Math { .. } => "math_domain",
            Error::NoConvergence { .. } => "no_convergence",
            Error::Inconsistent { .. } => "inconsistent_judgements",
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

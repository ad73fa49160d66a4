use std::fmt;

/// Module in which an error originated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    Measure,
    Operators,
    Dynamics,
    Dimensions,
    Constructors,
    Experiment,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Origin::Measure => "measure",
            Origin::Operators => "operators",
            Origin::Dynamics => "dynamics",
            Origin::Dimensions => "dimensions",
            Origin::Constructors => "constructors",
            Origin::Experiment => "experiment",
        };
        f.write_str(name)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{origin}: invalid input: {message}")]
    Validation { origin: Origin, message: String },

    #[error("{origin}: resource limit exceeded: {message}")]
    Resource { origin: Origin, message: String },

    #[error("{origin}: numerical failure: {message}")]
    Numerical { origin: Origin, message: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn validation(origin: Origin, message: impl Into<String>) -> Self {
        Error::Validation {
            origin,
            message: message.into(),
        }
    }

    pub(crate) fn resource(origin: Origin, message: impl Into<String>) -> Self {
        Error::Resource {
            origin,
            message: message.into(),
        }
    }

    pub(crate) fn numerical(origin: Origin, message: impl Into<String>) -> Self {
        Error::Numerical {
            origin,
            message: message.into(),
        }
    }

    pub fn origin(&self) -> Option<Origin> {
        match self {
            Error::Validation { origin, .. } | Error::Resource { origin, .. } | Error::Numerical { origin, .. } => {
                Some(*origin)
            }
            _ => None,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

/// One violated constraint in a configuration document.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct Violation {
    /// Dotted path into the document, e.g. `measure.probabilities`.
    pub path: String,
    pub message: String,
}

impl Violation {
    pub fn new(path: impl Into<String>, message: impl Into<String>) -> Self {
        Violation {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn nested(self, prefix: &str) -> Self {
        let path = if self.path.is_empty() {
            prefix.to_string()
        } else {
            format!("{prefix}.{}", self.path)
        };
        Violation { path, ..self }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.path, self.message)
    }
}

use std::path::PathBuf;

/// Coarse failure class, used by the CLI to pick an exit status.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ErrorCategory {
    Config,
    Parse,
    Integrity,
    Computation,
    Io,
}

impl ErrorCategory {
    pub fn exit_code(self) -> u8 {
        match self {
            ErrorCategory::Config => 2,
            ErrorCategory::Parse => 3,
            ErrorCategory::Integrity => 4,
            ErrorCategory::Computation => 5,
            ErrorCategory::Io => 6,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCategory::Config => "config",
            ErrorCategory::Parse => "parse",
            ErrorCategory::Integrity => "integrity",
            ErrorCategory::Computation => "computation",
            ErrorCategory::Io => "io",
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid box ({x_min}, {y_min}, {x_max}, {y_max}): {reason}")]
    InvalidBox {
        x_min: f64,
        y_min: f64,
        x_max: f64,
        y_max: f64,
        reason: &'static str,
    },

    #[error("enclosing box is degenerate, loss is undefined")]
    DegenerateEnclosure,

    #[error("box has zero height, aspect ratio is undefined")]
    UndefinedAspectRatio,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: String,
        line: u64,
        message: String,
    },

    #[error("referential integrity: {0}")]
    Integrity(String),

    #[error("mixed image ids in a per-image operation: {first} and {other}")]
    MixedImages { first: String, other: String },

    #[error("box lies entirely outside the {width}x{height} canvas")]
    OutsideCanvas { width: f64, height: f64 },

    #[error("need at least {k} distinct shapes, got {distinct}")]
    TooFewShapes { k: usize, distinct: usize },

    #[error("no target lesions for metric {0}")]
    NoTargets(&'static str),

    #[error("requested sensitivity {requested} exceeds the curve maximum {max}")]
    SensitivityUnreachable { requested: f64, max: f64 },

    #[error("ROC needs both positive and negative cases (positives: {positives}, negatives: {negatives})")]
    SingleClass { positives: usize, negatives: usize },

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::InvalidArgument(_) => ErrorCategory::Config,
            Error::Parse { .. } | Error::InvalidBox { .. } => ErrorCategory::Parse,
            Error::Integrity(_) | Error::MixedImages { .. } | Error::SingleClass { .. } => {
                ErrorCategory::Integrity
            }
            Error::DegenerateEnclosure
            | Error::UndefinedAspectRatio
            | Error::OutsideCanvas { .. }
            | Error::TooFewShapes { .. }
            | Error::NoTargets(_)
            | Error::SensitivityUnreachable { .. }
            | Error::EmptyInput(_) => ErrorCategory::Computation,
            Error::Io { .. } => ErrorCategory::Io,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(
        path: impl AsRef<std::path::Path>,
        line: u64,
        message: impl ToString,
    ) -> Self {
        Error::Parse {
            path: path.as_ref().display().to_string(),
            line,
            message: message.to_string(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn check_ratio(name: &str, value: f64) -> Result<()> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "{name} must lie in [0, 1], got {value}"
        )))
    }
}

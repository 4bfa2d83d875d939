use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("graph is not connected over the requested node set")]
    Disconnected,
    #[error("empty cascade")]
    EmptyCascade,
    #[error("both classes must be present: {0}")]
    SingleClass(String),
    #[error("class too small to stratify: {0}")]
    ClassTooSmall(String),
    #[error("empty sample: {0}")]
    EmptySample(String),
}

impl Error {
    /// Short machine-parsable code used by the command-line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Io(_) => "io",
            Error::Format(_) => "format",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::Disconnected => "disconnected",
            Error::EmptyCascade => "empty_cascade",
            Error::SingleClass(_) => "single_class",
            Error::ClassTooSmall(_) => "class_too_small",
            Error::EmptySample(_) => "empty_sample",
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        if e.is_io() {
            Error::Io(e.into())
        } else {
            Error::Format(e.to_string())
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                other => Error::Format(format!("{other:?}")),
            }
        } else {
            Error::Format(e.to_string())
        }
    }
}

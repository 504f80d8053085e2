use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("degenerate body: {0}")]
    Degenerate(String),
    #[error("origin is not an interior point of the body")]
    OriginNotInterior,
    #[error("unsupported dimension {0} (expected 2 or 3)")]
    Dimension(usize),
    #[error("value outside sampled range: {0}")]
    Range(String),
    #[error("level grid too short: {0}")]
    LevelGridTooShort(String),
    #[error("not a Young function: {0}")]
    NotYoung(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("io error: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable code, used by the command line front end.
    pub fn code(&self) -> &'static str {
        match self {
            Error::Invalid(_) => "E_INVALID",
            Error::Degenerate(_) => "E_DEGENERATE",
            Error::OriginNotInterior => "E_ORIGIN",
            Error::Dimension(_) => "E_DIMENSION",
            Error::Range(_) => "E_RANGE",
            Error::LevelGridTooShort(_) => "E_LEVELS",
            Error::NotYoung(_) => "E_NOT_YOUNG",
            Error::Parse(_) => "E_PARSE",
            Error::Io(_) => "E_IO",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Invalid(msg.into()))
}

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid parameter `{name}` = {value}: must satisfy {bound}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    #[error("mask dimension mismatch: mask covers {mask} indices but matrix has {matrix}")]
    MaskMismatch { mask: usize, matrix: usize },

    #[error("pole at {what} = {re}{im:+}i")]
    Pole { what: &'static str, re: f64, im: f64 },

    #[error("{what} = {value} is outside the domain {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("empty mask persisted after {attempts} redraws")]
    RetriesExhausted { attempts: u32 },

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("squared singular value {value} deviates from [0, 1] by more than {tolerance}")]
    ClampViolation { value: f64, tolerance: f64 },

    #[error("sample already holds singular values")]
    AlreadySingular,

    #[error("comparison requires the theorem normalization")]
    WrongNormalization,

    #[error("empirical distribution is empty")]
    EmptySample,

    #[error("{path}: line {line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("thread pool: {0}")]
    ThreadPool(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, value: f64, bound: &'static str) -> Self {
        Error::InvalidParameter { name, value, bound }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code for the command line: 2 for bad input, 3 for I/O,
    /// 4 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidDimension(_)
            | Error::InvalidParameter { .. }
            | Error::MaskMismatch { .. }
            | Error::Domain { .. }
            | Error::Pole { .. }
            | Error::AlreadySingular
            | Error::WrongNormalization
            | Error::EmptySample
            | Error::Parse { .. } => 2,
            Error::Io { .. } => 3,
            Error::RetriesExhausted { .. }
            | Error::ClampViolation { .. }
            | Error::ThreadPool(_) => 4,
            Error::Trial { source, .. } => source.exit_code(),
        }
    }
}

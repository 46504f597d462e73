use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Which selected instrument set an error refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstrumentSet {
    Exposure,
    Mediator,
    ExposureAndMediator,
    Union,
    MediatorOnly,
}

impl std::fmt::Display for InstrumentSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            InstrumentSet::Exposure => "S_x (exposure)",
            InstrumentSet::Mediator => "S_m (mediator)",
            InstrumentSet::ExposureAndMediator => "S_x ∩ S_m",
            InstrumentSet::Union => "S_x ∪ S_m",
            InstrumentSet::MediatorOnly => "S_m \\ S_x (mediator-only)",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch {
        what: &'static str,
        got: usize,
        expected: usize,
    },

    #[error("insufficient instruments in {set}: found {found}, need at least {needed}")]
    InsufficientInstruments {
        set: InstrumentSet,
        found: usize,
        needed: usize,
    },

    #[error("degenerate design: scaled condition number {condition:.3e} exceeds {limit:.0e}")]
    DegenerateDesign { condition: f64, limit: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: u64,
        message: String,
    },

    #[error("no common SNPs across the three GWAS files")]
    NoCommonSnps,

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Process exit code for this error class.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::InvalidInput(_)
            | Error::Config(_)
            | Error::LengthMismatch { .. }
            | Error::Parse { .. }
            | Error::NoCommonSnps => 2,
            Error::InsufficientInstruments { .. } | Error::DegenerateDesign { .. } => 3,
            Error::Io { .. } => 4,
        }
    }

    /// Stable machine-readable tag for the diagnostic stream.
    pub fn code(&self) -> &'static str {
        match self {
            Error::InvalidInput(_) => "invalid_input",
            Error::Config(_) => "invalid_config",
            Error::LengthMismatch { .. } => "length_mismatch",
            Error::InsufficientInstruments { .. } => "insufficient_instruments",
            Error::DegenerateDesign { .. } => "degenerate_design",
            Error::Parse { .. } => "parse_error",
            Error::NoCommonSnps => "no_common_snps",
            Error::Io { .. } => "io_error",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

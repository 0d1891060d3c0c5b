use std::path::{Path, PathBuf};

use serde::Serialize;

/// Problems with the contents of a `PFLD` or `PBIN` file.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FormatError {
    #[error("bad magic: expected {expected:?}, found {found:?}")]
    BadMagic { expected: String, found: String },
    #[error("unsupported format version {0}")]
    UnsupportedVersion(u32),
    #[error("truncated payload: expected {expected} bytes, found {found}")]
    Truncated { expected: usize, found: usize },
    #[error("non-finite value in plane {plane} at pixel ({x}, {y})")]
    NonFinite { plane: &'static str, x: usize, y: usize },
    #[error("up vector at pixel ({x}, {y}) has norm {norm}, not unit")]
    NonUnit { x: usize, y: usize, norm: f64 },
    #[error("malformed file: {0}")]
    Malformed(String),
}

impl FormatError {
    pub fn code(&self) -> &'static str {
        match self {
            FormatError::BadMagic { .. } => "bad_magic",
            FormatError::UnsupportedVersion(_) => "unsupported_version",
            FormatError::Truncated { .. } => "truncated",
            FormatError::NonFinite { .. } => "non_finite",
            FormatError::NonUnit { .. } => "non_unit",
            FormatError::Malformed(_) => "malformed",
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            FormatError::BadMagic { .. } => 10,
            FormatError::UnsupportedVersion(_) => 11,
            FormatError::Truncated { .. } => 12,
            FormatError::NonFinite { .. } => 13,
            FormatError::NonUnit { .. } => 14,
            FormatError::Malformed(_) => 15,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{}: {source}", path.display())]
    Format { path: PathBuf, source: FormatError },
    #[error("{}: {message}", path.display())]
    Decode { path: PathBuf, message: String },
    #[error(transparent)]
    Core(#[from] pfield_core::Error),
}

/// Exit codes, also listed in the CLI help.
pub mod exit {
    pub const USAGE: i32 = 2;
    pub const IO: i32 = 3;
    pub const DECODE: i32 = 4;
    pub const INVALID: i32 = 5;
    pub const FAILED: i32 = 6;
}

impl Error {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        Error::Io { path: path.to_path_buf(), source }
    }

    pub fn format(path: &Path, source: FormatError) -> Self {
        Error::Format { path: path.to_path_buf(), source }
    }

    pub fn decode(path: &Path, message: impl std::fmt::Display) -> Self {
        Error::Decode { path: path.to_path_buf(), message: message.to_string() }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Error::Usage(message.into())
    }

    pub fn code(&self) -> &'static str {
        use pfield_core::Error as C;
        match self {
            Error::Usage(_) => "usage",
            Error::Io { .. } => "io",
            Error::Format { source, .. } => source.code(),
            Error::Decode { .. } => "decode",
            Error::Core(e) => match e {
                C::NoOverlap => "no_overlap",
                C::AllMasked => "all_masked",
                C::InsufficientCoverage { .. } => "insufficient_coverage",
                C::NonFiniteLoss { .. } => "non_finite_loss",
                C::EmptyCandidates => "empty_candidates",
                C::EmptyWindows => "empty_windows",
                C::VanishingUpDisplacement | C::UndefinedUpDirection | C::OutsideProjection => "projection",
                _ => "invalid_input",
            },
        }
    }

    pub fn exit_code(&self) -> i32 {
        use pfield_core::Error as C;
        match self {
            Error::Usage(_) => exit::USAGE,
            Error::Io { .. } => exit::IO,
            Error::Format { source, .. } => source.exit_code(),
            Error::Decode { .. } => exit::DECODE,
            Error::Core(
                C::NoOverlap
                | C::AllMasked
                | C::InsufficientCoverage { .. }
                | C::NonFiniteLoss { .. }
                | C::EmptyCandidates
                | C::EmptyWindows
                | C::VanishingUpDisplacement
                | C::UndefinedUpDirection
                | C::OutsideProjection,
            ) => exit::FAILED,
            Error::Core(_) => exit::INVALID,
        }
    }

    /// Machine-readable form written to stderr by the CLI.
    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Report<'a> {
            error: &'a str,
            message: String,
            exit_code: i32,
        }
        serde_json::to_string(&Report { error: self.code(), message: self.to_string(), exit_code: self.exit_code() })
            .expect("error report serializes")
    }
}

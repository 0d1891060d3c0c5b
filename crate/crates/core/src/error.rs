use alloc::string::String;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected:?}, found {found:?}")]
    DimensionMismatch {
        expected: (usize, usize),
        found: (usize, usize),
    },

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("invalid camera: {0}")]
    InvalidCamera(String),

    #[error("{kind} bin index {index} out of range at pixel ({x}, {y})")]
    BinIndexOutOfRange {
        kind: &'static str,
        x: usize,
        y: usize,
        index: u16,
    },

    #[error("vanishing up displacement")]
    VanishingUpDisplacement,

    #[error("undefined up direction")]
    UndefinedUpDirection,

    #[error("point is outside the projective domain")]
    OutsideProjection,

    #[error("not equirectangular: {width}x{height} is not 2:1")]
    NotEquirectangular { width: usize, height: usize },

    #[error("singular transform")]
    SingularTransform,

    #[error("incompatible sizes: {0}")]
    IncompatibleSizes(String),

    #[error("empty candidate list")]
    EmptyCandidates,

    #[error("no overlapping valid pixels")]
    NoOverlap,

    #[error("target field has no valid pixels")]
    AllMasked,

    #[error("target field has too few valid pixels ({valid} of {total})")]
    InsufficientCoverage { valid: usize, total: usize },

    #[error("non-finite loss at initialization (parameter `{parameter}`)")]
    NonFiniteLoss { parameter: &'static str },

    #[error("empty window list")]
    EmptyWindows,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

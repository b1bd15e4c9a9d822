use thiserror::Error;

/// Errors raised by the core algorithms.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid box: {0}")]
    InvalidBox(String),
    #[error("invalid keypoint: {0}")]
    InvalidKeypoint(String),
    #[error("pose has no finite joint coordinates")]
    DegeneratePose,
    #[error("expected {expected} joints, found {found}")]
    JointCount { expected: usize, found: usize },
    #[error("parameter value {value} outside [0, 1]")]
    ParameterOutOfRange { value: f64 },
    #[error("not enough points to fit a curve: need at least {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("region {start}..={end} has fewer than 2 usable frames")]
    SparseRegion { start: usize, end: usize },
    #[error("no tracks to select from")]
    NoTracks,
    #[error("override segments overlap: {first:?} and {second:?}")]
    OverlappingOverrides {
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("manifest entries still pending for frames {0:?}")]
    PendingFrames(Vec<usize>),
    #[error("insufficient samples: need at least {needed}, got {got}")]
    InsufficientSamples { needed: usize, got: usize },
    #[error("covariance is not finite")]
    NonFiniteCovariance,
    #[error("beat track is empty")]
    EmptyBeatTrack,
    #[error("beat track is not strictly increasing and non-negative")]
    UnsortedBeats,
    #[error("sequences cover different frame sets")]
    FrameMismatch,
    #[error("segments overlap in sequence {sequence}: {first:?} and {second:?}")]
    OverlappingSegments {
        sequence: String,
        first: (usize, usize),
        second: (usize, usize),
    },
    #[error("sequence is too short: need at least {needed} frames, got {got}")]
    SequenceTooShort { needed: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

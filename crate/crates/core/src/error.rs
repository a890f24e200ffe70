//! Crate-wide error type.

use thiserror::Error;

/// Result alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("input key list is empty")]
    EmptyInput,

    #[error("keys are not strictly increasing at position {pos}")]
    UnsortedInput { pos: usize },

    #[error("duplicate key at position {pos}")]
    DuplicateKey { pos: usize },

    #[error("key {key} at position {pos} exceeds the supported universe (keys must be < 2^62)")]
    KeyOutOfRange { pos: usize, key: u64 },

    #[error("key {key} at position {pos} does not fit the declared 32-bit width")]
    KeyWidthMismatch { pos: usize, key: u64 },

    #[error("index {index} out of range for list of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("invalid quantile ({k}, {q}): require 1 <= k <= q")]
    InvalidQuantile { k: u64, q: u64 },

    #[error("need at least {need} keys, got {got}")]
    TooShort { need: usize, got: usize },

    #[error("tuning stats carry no calibration constant; run calibrate_c or set one")]
    MissingCalibration,

    #[error("calibration sample is degenerate: segment count does not vary across the sweep")]
    DegenerateSample,

    #[error(
        "epsilon {epsilon} cannot be met after 32-bit parameter quantization \
         (key magnitude exceeds float32 resolution at this error bound)"
    )]
    EpsilonInfeasible { epsilon: u32 },

    #[error("corrupt compressed payload: {0}")]
    CorruptPayload(&'static str),

    #[error("bad magic bytes (not an LCI file)")]
    BadMagic,

    #[error("unsupported format version {0}")]
    UnsupportedVersion(u8),

    #[error("payload is truncated or has trailing bytes")]
    TruncatedPayload,

    #[error("segment start indices are not strictly increasing from zero")]
    NonMonotoneSegments,

    #[error("segment start {0} does not fit in 32 bits")]
    SegmentStartOverflow(usize),

    #[error("parse error: {0}")]
    ParseError(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Stable exit-code class for the CLI: 3 = file format, 4 = domain, 5 = I/O.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            BadMagic | UnsupportedVersion(_) | TruncatedPayload | NonMonotoneSegments
            | SegmentStartOverflow(_) | CorruptPayload(_) | ParseError(_) => 3,
            Io(_) => 5,
            _ => 4,
        }
    }
}

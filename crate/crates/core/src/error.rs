use std::path::PathBuf;

use crate::trace::ContentClass;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("line {line}: {reason}: {content:?}")]
    MalformedLine {
        line: usize,
        content: String,
        reason: &'static str,
    },

    #[error("trace contains no frames")]
    EmptyTrace,

    #[error("no frame rate: add a `# fps=<rate>` header or pass an fps override")]
    MissingFps,

    #[error("frame rate must be finite and positive, got {0}")]
    InvalidFps(f64),

    #[error("flows do not share a frame rate ({first} vs {other} fps)")]
    MixedFps { first: f64, other: f64 },

    #[error("window of {length_slots} slots cannot end at slot {end_slot}")]
    WindowOutOfRange { end_slot: u64, length_slots: u64 },

    #[error("traces hold {available} slots but the window needs {needed}")]
    InsufficientHistory { available: usize, needed: usize },

    #[error("all rate ranges have zero width; the Hoeffding bound is undefined")]
    DegenerateRanges,

    #[error("invalid rate bounds [{min}, {max}] bits/s")]
    InvalidBounds { min: f64, max: f64 },

    #[error("no integer frame size fits rate bounds [{min}, {max}] bits/s at {fps} fps")]
    BoundsTooTight { min: f64, max: f64, fps: f64 },

    #[error("series mean is zero")]
    ZeroMean,

    #[error("series needs at least {needed} values, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("trace library is empty")]
    EmptyLibrary,

    #[error("library has no traces of class {0}")]
    ClassMissing(ContentClass),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

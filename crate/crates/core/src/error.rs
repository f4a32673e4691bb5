use std::path::PathBuf;

use crate::path::PixelPath;
use crate::{Layer, ModuleId};

/// Errors raised by configuration mutation, strategies, and the simulation harness.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("pixel {0} is not empty")]
    PixelNotEmpty(PixelPath),

    #[error("module layer {module} does not match pixel layer {pixel}")]
    LayerMismatch { module: Layer, pixel: Layer },

    #[error("unknown module {0}")]
    UnknownModule(ModuleId),

    #[error("module {0} is already placed")]
    DuplicateModule(ModuleId),

    #[error("destination {0} is not empty")]
    DestinationNotEmpty(PixelPath),

    #[error("source {0} is not occupied")]
    SourceNotOccupied(PixelPath),

    #[error("layer {layer} exceeds the maximum depth {max_depth}")]
    DepthExceeded { layer: u32, max_depth: Layer },

    #[error("pixels {0} and {1} are nested; z-order is undefined")]
    NestedPixels(PixelPath, PixelPath),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("remaining capacity is below the volume of a {0}-square")]
    InsufficientCapacity(Layer),

    #[error("no empty {0}-pixel available")]
    NoEmptyPixel(Layer),

    #[error("side length {0} is outside (0, 1]")]
    InvalidSide(f64),

    #[error("aspect ratio {ratio} exceeds the bound {bound}")]
    AspectRatioExceeded { ratio: f64, bound: f64 },

    #[error("malformed request sequence at index {index}: {reason}")]
    MalformedSequence { index: usize, reason: String },

    #[error("enumeration limits too large: {0}")]
    LimitsTooLarge(String),

    #[error("search budget of {0} expanded states exceeded")]
    SearchBudgetExceeded(usize),

    #[error("configuration invariant violated: {0}")]
    InvariantViolated(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv failure: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::IoFailure {
            path: path.into(),
            source,
        }
    }
}

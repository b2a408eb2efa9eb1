use alloc::string::String;
use core::fmt;

/// Errors raised by the algorithmic core.
#[derive(Debug, Clone, PartialEq)]
pub enum CoreError {
    /// Fewer than 3 distinct points, all points collinear, or a zero-area polygon.
    DegenerateInput(String),
    /// Histogram with zero total count cannot be normalized.
    EmptyHistogram,
    /// Two probability vectors live on different (domain, resolution) grids.
    DomainMismatch,
    /// Quadtree build was given no points.
    EmptySample,
    /// Point lies outside the partitioner domain and clamping is disabled.
    OutOfDomain,
    /// Serialized partitioner structure is inconsistent (bad paths or tiling).
    InvalidPartitioner(String),
    /// Checkpoint layer shapes do not match the fixed architecture.
    ShapeMismatch(String),
    /// Training produced a non-finite loss; carries the offending batch index.
    NonFiniteLoss { batch: usize },
}

impl fmt::Display for CoreError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoreError::DegenerateInput(msg) => write!(f, "degenerate input: {msg}"),
            CoreError::EmptyHistogram => write!(f, "histogram has zero total count"),
            CoreError::DomainMismatch => write!(f, "histogram domain/resolution mismatch"),
            CoreError::EmptySample => write!(f, "partitioner build requires a non-empty sample"),
            CoreError::OutOfDomain => write!(f, "point outside partitioner domain"),
            CoreError::InvalidPartitioner(msg) => write!(f, "invalid partitioner: {msg}"),
            CoreError::ShapeMismatch(msg) => write!(f, "checkpoint shape mismatch: {msg}"),
            CoreError::NonFiniteLoss { batch } => {
                write!(f, "non-finite loss in batch {batch}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for CoreError {}

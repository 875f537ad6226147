use std::fmt;

/// Errors raised by construction and structure operations.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// A point occurs in more than one block.
    Overlap { point: u32 },
    /// A ground-set point is covered by no block.
    Gap { point: u32 },
    /// A block with no points was supplied.
    EmptyBlock,
    /// Ground size outside the supported 1..=32 range.
    BadGroundSize { size: usize },
    /// Two arguments live over different ground sets.
    GroundMismatch { left: usize, right: usize },
    /// Block counts or block sizes do not fit the operation.
    ShapeMismatch { detail: String },
    /// Operation requires equal-size blocks.
    NotRegular,
    /// A factor tuple needs at least two parts.
    TooFewParts,
    /// Block index out of range.
    BadBlockIndex { index: usize },
    /// Invalid dimension or field parameter.
    BadDimension { detail: String },
    /// A size cap protecting against runaway enumeration was exceeded.
    SizeGuard { size: usize, cap: usize },
    /// A prime was required.
    NotPrime { value: u64 },
    /// The atom set is not a slab.
    NotASlab { detail: String },
    /// The relation set is not a collapse.
    NotACollapse { detail: String },
    /// A black-box automorphism oracle failed a consistency probe.
    Oracle { detail: String },
    /// Malformed text input.
    Parse { position: usize, detail: String },
    /// The operation is not defined for this input.
    Unsupported { detail: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Overlap { point } => write!(f, "point {point} belongs to more than one block"),
            Error::Gap { point } => write!(f, "point {point} is not covered by any block"),
            Error::EmptyBlock => write!(f, "empty block"),
            Error::BadGroundSize { size } => {
                write!(f, "ground size {size} outside supported range 1..=32")
            }
            Error::GroundMismatch { left, right } => {
                write!(f, "ground sets differ: {left} vs {right}")
            }
            Error::ShapeMismatch { detail } => write!(f, "shape mismatch: {detail}"),
            Error::NotRegular => write!(f, "partition is not regular"),
            Error::TooFewParts => write!(f, "factor tuple needs at least two parts"),
            Error::BadBlockIndex { index } => write!(f, "block index {index} out of range"),
            Error::BadDimension { detail } => write!(f, "bad dimension: {detail}"),
            Error::SizeGuard { size, cap } => {
                write!(f, "size {size} exceeds guard cap {cap}")
            }
            Error::NotPrime { value } => write!(f, "{value} is not prime"),
            Error::NotASlab { detail } => write!(f, "not a slab: {detail}"),
            Error::NotACollapse { detail } => write!(f, "not a collapse: {detail}"),
            Error::Oracle { detail } => write!(f, "oracle diagnostic: {detail}"),
            Error::Parse { position, detail } => {
                write!(f, "parse error at position {position}: {detail}")
            }
            Error::Unsupported { detail } => write!(f, "unsupported: {detail}"),
        }
    }
}

impl std::error::Error for Error {}

use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("samples per axis must be a power of two >= 4, got {0}")]
    NotPowerOfTwo(usize),
    #[error("dimension must lie in [1, 4], got {0}")]
    Dimension(usize),
    #[error("box length must be positive and finite, got {0}")]
    BoxLength(f64),
    #[error("exponent p must be >= 1, got {0}")]
    Exponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("direct convolution is limited to 2^16 cells, grid has {0}")]
    OracleTooLarge(usize),
    #[error("annulus thickness must lie in (0, 1/2), got {0}")]
    Delta(f64),
    #[error("dilation vector has length {got}, expected {expected}")]
    DilationLength { expected: usize, got: usize },
    #[error("dilated annulus of diameter {diameter} does not fit a periodic box of side {box_length}")]
    AnnulusTooLarge { diameter: f64, box_length: f64 },
    #[error("shell of thickness {thickness} is under-resolved by sample spacing {spacing}")]
    UnderResolved { thickness: f64, spacing: f64 },
    #[error("empty dilation range")]
    EmptyRange,
    #[error("invalid scale bounds: {0}")]
    Scales(String),
    #[error("band {0:?} lies outside the grid frequency range")]
    BandOutOfRange(Vec<i32>),
    #[error("negative argument {0} for a radial profile")]
    NegativeArgument(f64),
    #[error("lambda must be positive, got {0}")]
    Lambda(f64),
    #[error("level system and field do not match")]
    Inconsistent,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("field file: {0}")]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Structured failure of the ADF1 field decoder.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum DecodeError {
    #[error("bad magic {0:?}")]
    Magic([u8; 4]),
    #[error("unsupported version {0}")]
    Version(u32),
    #[error("truncated header")]
    TruncatedHeader,
    #[error("invalid header: {0}")]
    Header(String),
    #[error("payload has {got} bytes, header implies {expected}")]
    Payload { expected: usize, got: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

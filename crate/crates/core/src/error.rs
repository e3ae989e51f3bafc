use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Format(#[from] FormatError),

    /// An event arrived in a phase that does not accept it.
    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),

    #[error("unsupported design: {0}")]
    UnsupportedDesign(String),

    #[error("not found: {0}")]
    NotFound(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("image codec: {0}")]
    Image(#[from] image::ImageError),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

/// Problems found while decoding a mask archive.
#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FormatError {
    #[error("bad magic {found:?}, expected \"PMSK\"")]
    BadMagic { found: [u8; 4] },

    #[error("unsupported archive version {0}")]
    UnsupportedVersion(u16),

    #[error("truncated archive header")]
    TruncatedHeader,

    #[error("truncated payload in mask {mask_id}")]
    Truncated { mask_id: u32 },

    #[error("mask {mask_id}: stored area {stored} but bitmap has {counted} set bits")]
    BitCountMismatch { mask_id: u32, stored: u32, counted: u32 },

    #[error("mask {mask_id}: nonzero padding bits")]
    Padding { mask_id: u32 },

    #[error("mask {mask_id}: unknown shape class {code}")]
    ShapeClass { mask_id: u32, code: u8 },

    #[error("mask {mask_id}: label is not valid UTF-8")]
    Label { mask_id: u32 },

    #[error("duplicate mask id {mask_id}")]
    DuplicateId { mask_id: u32 },

    #[error("{0} trailing bytes after last mask")]
    TrailingBytes(usize),

    #[error("archive dimensions {width}x{height} are not encodable")]
    Dimensions { width: u32, height: u32 },
}

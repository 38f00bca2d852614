//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// Two masks that must share a resolution do not.
    #[error("mask dimensions differ: {0}x{1} vs {2}x{3}")]
    DimensionMismatch(u32, u32, u32, u32),

    /// An operation that needs foreground pixels got an empty mask.
    #[error("mask has no foreground pixels")]
    EmptyMask,

    /// An operation that needs contour points got an empty contour.
    #[error("contour has no points")]
    EmptyContour,

    /// A parameter is outside its documented range.
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A scenario config failed validation; `path` names the offending field.
    #[error("config error at {path}: {reason}")]
    Config { path: String, reason: String },

    /// Two streams that must advance in lockstep diverged.
    #[error("stream alignment error: {0}")]
    Alignment(String),

    /// A mask stream is missing a frame.
    #[error("mask stream gap at frame {frame_index}")]
    StreamGap { frame_index: u64 },

    /// A stored artifact is malformed.
    #[error("format error in {what}: {reason}")]
    Format { what: String, reason: String },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            reason: reason.into(),
        }
    }

    pub fn format(what: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Format {
            what: what.into(),
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

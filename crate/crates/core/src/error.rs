// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use crate::geometry::Frame;
use crate::lidar::RayIndex;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("rotation matrix is not orthonormal (deviation {deviation:.3e})")]
    NonOrthonormalInput { deviation: f64 },

    #[error("frame mismatch: expected {expected:?}, found {found:?}")]
    FrameMismatch { expected: Frame, found: Frame },

    #[error("ray index (i={i}, j={j}) out of range for a {m}x{k} ray grid")]
    IndexOutOfRange { i: usize, j: usize, m: usize, k: usize },

    #[error("invalid lidar model: {0}")]
    InvalidModel(String),

    #[error("input cloud is empty")]
    EmptyCloud,

    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },

    #[error("ground points do not support a plane fit")]
    DegenerateGround,

    #[error("ray (i={}, j={}) has more than one return", .0.i, .0.j)]
    DuplicateRay(RayIndex),

    #[error("histogram has zero total weight")]
    ZeroTotal,

    #[error("vector has zero norm")]
    ZeroVector,

    #[error("{path}: length {len} is not a multiple of 16 bytes")]
    TruncatedFile { path: PathBuf, len: u64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("schema error at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("config error at line {line}, key `{key}`: {message}")]
    Config { key: String, line: usize, message: String },

    #[error("target `{0}` not found in labels")]
    TargetNotFound(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn schema(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Schema {
            path: path.into(),
            message: message.into(),
        }
    }
}

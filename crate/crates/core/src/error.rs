use std::path::PathBuf;

use thiserror::Error;

use crate::flowfield::GridNode;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("field has no traversable nodes")]
    EmptyField,

    #[error("domain error: {0}")]
    Domain(String),

    #[error("node {0} is outside the grid")]
    OutOfBounds(GridNode),

    #[error("node {0} is occupied")]
    Occupied(GridNode),

    #[error("nodes {from} and {to} are not 26-neighbors")]
    NotNeighbors { from: GridNode, to: GridNode },

    #[error("edge {from} -> {to} is blocked")]
    BlockedEdge { from: GridNode, to: GridNode },

    #[error("no path to goal after expanding {expanded} nodes")]
    NoPath { expanded: usize },

    #[error("invalid path: {0}")]
    InvalidPath(String),

    #[error("statistics belong to field {expected:08x}, not {found:08x}")]
    Provenance { expected: u32, found: u32 },

    #[error("path has {len} waypoints, more than the {max} the network emits")]
    OverlongPath { len: usize, max: usize },

    #[error("loss undefined: mask has no unmasked entries")]
    UndefinedLoss,

    #[error("non-finite network input")]
    NonFiniteInput,

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("empty dataset: {0}")]
    EmptyData(String),

    #[error("corpora are not comparable: {0}")]
    Comparability(String),

    #[error("not a field file (bad magic)")]
    BadMagic,

    #[error("unsupported format version {found:?}")]
    VersionMismatch { found: char },

    #[error("file truncated: needed {needed} bytes, found {found}")]
    Truncated { needed: usize, found: usize },

    #[error("checksum mismatch: stored {stored:08x}, computed {computed:08x}")]
    Checksum { stored: u32, computed: u32 },

    #[error("malformed file: {0}")]
    Format(String),

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Short machine-readable tag, used in the CLI's structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Config(_) => "config",
            Error::Geometry(_) => "geometry",
            Error::EmptyField => "empty_field",
            Error::Domain(_) => "domain",
            Error::OutOfBounds(_) => "out_of_bounds",
            Error::Occupied(_) => "occupied",
            Error::NotNeighbors { .. } => "not_neighbors",
            Error::BlockedEdge { .. } => "blocked_edge",
            Error::NoPath { .. } => "no_path",
            Error::InvalidPath(_) => "invalid_path",
            Error::Provenance { .. } => "provenance",
            Error::OverlongPath { .. } => "overlong_path",
            Error::UndefinedLoss => "undefined_loss",
            Error::NonFiniteInput => "non_finite_input",
            Error::Shape(_) => "shape",
            Error::EmptyData(_) => "empty_data",
            Error::Comparability(_) => "comparability",
            Error::BadMagic => "bad_magic",
            Error::VersionMismatch { .. } => "version_mismatch",
            Error::Truncated { .. } => "truncated",
            Error::Checksum { .. } => "checksum",
            Error::Format(_) => "format",
            Error::File { .. } | Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn file(path: impl Into<PathBuf>) -> impl FnOnce(std::io::Error) -> Error {
        let path = path.into();
        move |source| Error::File { path, source }
    }
}

use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty reduction")]
    EmptyReduction,

    #[error("non-finite logits")]
    NonFiniteLogits,

    #[error("shape mismatch in {op}: {left:?} vs {right:?}")]
    ShapeMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("non-finite function value while probing coordinate {coordinate}")]
    NonFiniteProbe { coordinate: usize },

    #[error("empty sequence")]
    EmptySequence,

    #[error("stale or mismatched encoder cache: {0}")]
    StaleCache(String),

    #[error("label out of inventory: label {label} with {classes} classes")]
    LabelOutOfInventory { label: usize, classes: usize },

    #[error("blank index used as a label at position {0}")]
    BlankInLabels(usize),

    #[error("infeasible alignment: {frames} frames cannot emit {labels} labels ({required} frames required)")]
    InfeasibleAlignment {
        frames: usize,
        labels: usize,
        required: usize,
    },

    #[error("posteriors at frame {frame} sum to {sum}, not 1")]
    Unnormalized { frame: usize, sum: f64 },

    #[error("oracle bound exceeded: {classes}^{frames} paths")]
    OracleBoundExceeded { classes: usize, frames: usize },

    #[error("no head for language {0:?}")]
    UnknownLanguage(String),

    #[error("invalid inventory: {0}")]
    Inventory(String),

    #[error("beam width must be at least 1")]
    ZeroBeamWidth,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("invalid model file: {0}")]
    ModelFormat(String),

    #[error("divergence: {0}")]
    Divergence(String),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub(crate) fn parse(path: impl Into<PathBuf>, line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            line,
            message: message.into(),
        }
    }
}

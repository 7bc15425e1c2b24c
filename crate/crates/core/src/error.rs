//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Everything that can go wrong while configuring or running a simulation.
#[derive(Debug, Error)]
pub enum Error {
    /// A scenario file or scenario struct failed validation. The message
    /// names the offending field.
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),

    /// A UE location pattern is empty or contains out-of-area positions.
    #[error("invalid pattern: {0}")]
    InvalidPattern(String),

    /// A numeric argument was outside its documented domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// More UEs handed to the precoder than the AP has antennas.
    #[error("AP {ap}: {served} served UEs exceed {antennas} antennas; the scheduler must chunk first")]
    Oversubscribed {
        ap: u32,
        served: usize,
        antennas: usize,
    },

    /// The stacked channel matrix is rank deficient within tolerance.
    #[error("singular channel: pivot {pivot:.3e} below tolerance at UE row {row}")]
    SingularChannel { pivot: f64, row: usize },

    /// Energy efficiency is undefined for non-positive energy.
    #[error("energy efficiency undefined: total energy {0} J is not positive")]
    NonPositiveEnergy(f64),

    /// A REM lookup hit a pattern key with no recorded statistics.
    #[error("no REM entry for pattern key {0}; run a cold-start sweep first")]
    ColdStart(String),

    /// A drop result was accumulated under the wrong action.
    #[error("action mismatch: entry action {action} but drop used cluster size {cluster_size}")]
    ActionMismatch { action: u32, cluster_size: u32 },

    /// A serialized store, channel dump, or pattern file failed to parse.
    #[error("{what} line {line}: {msg}")]
    Format {
        what: &'static str,
        line: usize,
        msg: String,
    },

    /// Underlying file I/O failure.
    #[error("io error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Shorthand used by the parsers.
    pub(crate) fn format(what: &'static str, line: usize, msg: String) -> Self {
        Error::Format { what, line, msg }
    }
}

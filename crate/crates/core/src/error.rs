use thiserror::Error;

/// Errors surfaced by the mining pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A configuration invariant was violated; the message names the constraint.
    #[error("invalid configuration: {0}")]
    Config(String),

    /// Input data is malformed (ragged rows, non-finite values, too short).
    #[error("invalid input: {0}")]
    Input(String),

    /// Every candidate shape was discarded: the series has no repeating
    /// structure at the configured distance threshold, so the search
    /// cannot proceed.
    #[error("no repeating structure: {0}")]
    NoRepeatingStructure(String),

    /// Every scored subset came out at the sentinel; no window set is
    /// better explained by an event model than by noise.
    #[error("no event found: {0}")]
    NoEventFound(String),

    /// Synthetic generation could not satisfy the requested layout.
    #[error("synthesis failed: {0}")]
    Synthesis(String),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub fn no_repeating_structure(msg: impl Into<String>) -> Self {
        Error::NoRepeatingStructure(msg.into())
    }

    pub fn no_event_found(msg: impl Into<String>) -> Self {
        Error::NoEventFound(msg.into())
    }

    pub fn synthesis(msg: impl Into<String>) -> Self {
        Error::Synthesis(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

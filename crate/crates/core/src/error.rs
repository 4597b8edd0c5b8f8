use thiserror::Error;

/// Unified error type for the wiring engine.
#[derive(Debug, Error)]
pub enum Error {
    /// Unreadable or undecodable input (files, corpus roots, stub libraries).
    #[error("input error: {0}")]
    Input(String),

    /// Missing, duplicated, or out-of-order region control tokens.
    #[error("marker error: {0}")]
    Marker(String),

    /// Invalid or unresolvable configuration (missing API key, bad flag values).
    #[error("config error: {0}")]
    Config(String),

    /// Model transport failure after exhausting retries.
    #[error("transport error: {0}")]
    Transport(String),

    /// Model output that could not be repaired into a tool action.
    #[error("malformed action: {0}")]
    MalformedAction(String),

    /// Action name not present in the registered toolkit.
    #[error("unknown tool: {0}")]
    UnknownTool(String),

    /// Class name absent from the class index and the stub library.
    #[error("unknown class: {0}")]
    UnknownClass(String),

    /// Edit script applied to text that no longer matches its base hash.
    #[error("stale edit: expected base hash {expected}, found {actual}")]
    StaleEdit { expected: String, actual: String },

    /// Invariant breach inside the engine itself.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

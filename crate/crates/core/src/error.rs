use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// A channel transition table failed validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A combined channel would exceed the output-alphabet cap.
    #[error("output alphabet of size {required} exceeds cap {cap}")]
    AlphabetCap { required: u128, cap: u64 },

    /// Checked integer arithmetic overflowed (lengths, complexities).
    #[error("arithmetic overflow in {0}")]
    Overflow(&'static str),

    /// An argument was outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A computation would exceed the configured memory/enumeration budget.
    #[error("budget exceeded: {0}")]
    Budget(String),

    /// A vector had the wrong length for the requested operation.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    /// A code specification failed validation.
    #[error("invalid code spec: {0}")]
    InvalidSpec(String),

    /// A decoder workspace was reused without an intervening reset.
    #[error("decoder workspace reused without reset")]
    WorkspaceReused,
}

pub type Result<T> = std::result::Result<T, Error>;

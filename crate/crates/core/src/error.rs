use thiserror::Error;

/// Errors raised by the simulation engines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar parameter is outside its admissible range.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// Only one- and two-photon Fock pulses are modelled.
    #[error("unsupported photon number {0} (expected 1 or 2)")]
    UnsupportedPhotonNumber(u32),

    /// The population hierarchy is only closed on resonance.
    #[error("the ODE hierarchy requires zero detuning, got delta = {0}")]
    NonZeroDetuning(f64),

    /// The envelope has (numerically) zero norm or its samples are not
    /// unit-normalised on the time-bin grid.
    #[error("envelope cannot be normalised: {0}")]
    Unnormalizable(String),

    /// Two objects that must share a time grid do not.
    #[error("time grid mismatch: {0}")]
    GridMismatch(String),

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("SVD failed to converge on a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    /// The number of singular values above the cutoff exceeds `max_bond`.
    #[error("bond dimension overflow at step {step}: need {needed}, max_bond = {max_bond}")]
    BondOverflow { step: usize, needed: usize, max_bond: usize },

    /// Discarded Schmidt weight in a single step is larger than the policy allows.
    #[error("truncation budget exceeded at step {step}: discarded weight {discarded:e} > {budget:e}")]
    TruncationBudget { step: usize, discarded: f64, budget: f64 },

    #[error("checkpoint: {0}")]
    Checkpoint(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { name, reason: reason.into() }
}

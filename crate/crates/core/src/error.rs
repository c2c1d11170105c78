use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("number of polarization states must be at least 3, got {0}")]
    TooFewStates(usize),

    #[error("weight class {w} out of range for m = {m} (reduce modulo m first)")]
    WeightOutOfRange { w: usize, m: usize },

    #[error("shift {shift} out of range for m = {m}: |D| must be at most m - 1")]
    ShiftOutOfRange { shift: i64, m: usize },

    #[error("symbol {symbol} out of range for m = {m}")]
    SymbolOutOfRange { symbol: usize, m: usize },

    #[error("lumped binomial overflows 128-bit integers for n = {0}")]
    Overflow(usize),

    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("pulse count must be at least 1")]
    NoPulses,

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("trace is not 1 (deviation {0:e})")]
    InvalidTrace(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPositive(f64),
}

pub type Result<T> = std::result::Result<T, Error>;

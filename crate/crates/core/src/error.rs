use alloc::string::String;

/// Errors raised by the numerical kernels.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the window in which the formula is defined.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// The input cannot be processed (non-finite samples, zero mass, ...).
    #[error("domain error: {0}")]
    Domain(String),
    /// A set or weight kind does not support the requested operation.
    #[error("unsupported: {0}")]
    Unsupported(String),
    /// Not enough sampling data for an estimate.
    #[error("insufficient data: {0}")]
    InsufficientData(String),
}

pub type Result<T> = core::result::Result<T, Error>;

macro_rules! param_err {
    ($($arg:tt)*) => { $crate::Error::Parameter(alloc::format!($($arg)*)) };
}
macro_rules! domain_err {
    ($($arg:tt)*) => { $crate::Error::Domain(alloc::format!($($arg)*)) };
}
pub(crate) use domain_err;
pub(crate) use param_err;

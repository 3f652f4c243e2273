use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

/// One failed invariant reported by parameter validation.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Coarse classification used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    /// Bad input parameters or inconsistent model requests.
    Config,
    /// A size cap would be exceeded.
    Resource,
    /// An iterative method failed to meet its tolerance.
    Numerical,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("validation failed: {}", join(.0))]
    Validation(Vec<Violation>),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("model error: {0}")]
    Model(String),
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),
    #[error("unsupported: {0}")]
    Unsupported(&'static str),
    #[error("basis size {size} exceeds cap {cap}")]
    BasisTooLarge { size: u128, cap: usize },
    #[error("shape mismatch: expected {expected}, found {found}")]
    Shape { expected: usize, found: usize },
    #[error("state not in basis")]
    NotInBasis,
    #[error("matrix is not hermitian (asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("norm drift {drift:e} exceeds tolerance")]
    NormDrift { drift: f64 },
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::BasisTooLarge { .. } => ErrorKind::Resource,
            Error::NoConvergence { .. } | Error::NormDrift { .. } => ErrorKind::Numerical,
            _ => ErrorKind::Config,
        }
    }

    /// Field names of a validation error, empty for other variants.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            Error::Validation(v) => v.iter().map(|v| v.field).collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

fn join(violations: &[Violation]) -> String {
    use core::fmt::Write;
    let mut out = String::new();
    for (i, v) in violations.iter().enumerate() {
        if i > 0 {
            out.push_str("; ");
        }
        let _ = write!(out, "{v}");
    }
    out
}

use thiserror::Error;

/// Errors raised by every computation in the crate.
///
/// The CLI maps [`Error::exit_code`] onto its process exit status: input
/// problems exit with 1, numerical failures with 2.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("fit error: {0}")]
    Fit(String),

    #[error("cutoff error: {0}")]
    Cutoff(String),

    #[error("degenerate filling: gap {gap:e} at N = {n} is below {threshold:e}")]
    Degenerate { n: usize, gap: f64, threshold: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("accuracy error: {0}")]
    Accuracy(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Domain(_)
            | Error::Fit(_)
            | Error::Cutoff(_)
            | Error::Degenerate { .. }
            | Error::Precondition(_)
            | Error::Io(_) => 1,
            Error::Numeric(_) | Error::Accuracy(_) => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_finite(name: &str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be finite, got {value}")))
    }
}

pub(crate) fn ensure_positive(name: &str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("{name} must be positive, got {value}")))
    }
}

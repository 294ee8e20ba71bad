use thiserror::Error;

use crate::zerofinder::{ComplexZero, Rectangle};

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no sign change on bracket [{lo}, {hi}]")]
    Bracket { lo: f64, hi: f64 },

    /// The contour passes too close to a zero; perturb the rectangle and retry.
    #[error("contour too close to a zero near {near_re} + {near_im}i (|f| = {modulus:e})")]
    Boundary {
        near_re: f64,
        near_im: f64,
        modulus: f64,
    },

    #[error("incomplete enumeration: {} zero(s) found, {} box(es) unresolved", .found.len(), .unresolved.len())]
    IncompleteEnumeration {
        found: Vec<ComplexZero>,
        unresolved: Vec<Rectangle>,
    },

    #[error("search exhausted: {0}")]
    SearchExhausted(String),

    #[error("consistency check failed: {0}")]
    Consistency(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

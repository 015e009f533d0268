//! Error types shared across the crate.

/// Errors reported by model evaluation, root finding and search routines.
///
/// Diagnostic values are carried as `f64` regardless of the scalar type the
/// computation ran at.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CoreError {
    /// An input violated a mathematical precondition (non-positive power,
    /// share vector off the simplex, M <= K, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A scenario/share vector length mismatch.
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    /// The bracket search loops ran out of iterations without finding a sign
    /// change. The final probes are reported to aid diagnosis.
    #[error(
        "bracket search failed after {expansions} expansions: \
         f({x_lo}) = {f_lo}, f({x_hi}) = {f_hi}"
    )]
    BracketFailure {
        expansions: usize,
        x_lo: f64,
        f_lo: f64,
        x_hi: f64,
        f_hi: f64,
    },

    /// An exhaustive search was asked to scan an empty grid.
    #[error("empty search grid")]
    EmptyGrid,
}

impl CoreError {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        CoreError::Domain(msg.into())
    }
}

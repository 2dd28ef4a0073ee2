use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("metric coefficient x{index} = {value} is not positive")]
    NonPositiveMetric { index: usize, value: f64 },

    #[error("field index {0} is out of range (expected 1, 2 or 3)")]
    InvalidIndex(usize),

    #[error("no real solution for {coordinate}: discriminant {discriminant:e}")]
    InfeasibleSample { coordinate: &'static str, discriminant: f64 },

    #[error("cannot solve for {coordinate}: its quadratic coefficient vanishes")]
    DegenerateBranch { coordinate: &'static str },

    #[error("point is off the variety: |G| = {g:e}, |F|/x1^12 = {f_rel:e}")]
    OffVariety { g: f64, f_rel: f64 },

    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    #[error("flow truncated at t = {t}: {reason}")]
    Truncated { t: f64, reason: TruncationReason },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("frame degenerated at node {node:?}: Gram determinant {det:e}")]
    FrameDegenerate { node: [usize; 3], det: f64 },

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("value {value} outside the admissible range {range}")]
    OutOfRange { value: f64, range: String },

    #[error("principal curvatures are not distinct: {0:?}")]
    RepeatedCurvatures([f64; 3]),

    #[error("correspondence is empty or unbalanced ({0} vs {1} points)")]
    BadCorrespondence(usize, usize),
}

/// Why a flow stopped before reaching its requested end time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TruncationReason {
    /// The state came closer to the singular lines than the configured guard.
    Singular,
    /// Step size underflow or the state left the positive-x domain.
    Domain,
}

impl std::fmt::Display for TruncationReason {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TruncationReason::Singular => f.write_str("too close to the singular lines"),
            TruncationReason::Domain => f.write_str("left the integration domain"),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

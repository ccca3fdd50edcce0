use thiserror::Error;

/// Unified error type for every fallible operation in the crate.
///
/// Variants name the violated invariant so that CLI diagnostics can be
/// produced by `Display` alone.
#[derive(Debug, Error)]
pub enum Error {
    /// Two objects that must share an alphabet have different sizes.
    #[error("alphabet mismatch: {left} vs {right}")]
    AlphabetMismatch { left: usize, right: usize },

    /// A probability vector failed validation (negative mass, bad total, NaN).
    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    /// A matrix failed joint-distribution validation.
    #[error("invalid joint distribution: {0}")]
    InvalidJoint(String),

    /// A channel matrix failed row-stochasticity validation.
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    /// A scalar parameter is outside its documented range.
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// KL/χ²-style quantity requested where it is provably infinite and the
    /// operation cannot represent that (e.g. the quadrature oracle).
    #[error("divergence is infinite: support of the first argument is not contained in the support of the second")]
    InfiniteDivergence,

    /// A product construction would exceed the configured entry cap.
    #[error("size cap exceeded: requested {requested} entries, cap {cap}")]
    SizeCap { requested: usize, cap: usize },

    /// Graph validation failed (cycle, bad reference, structural rule).
    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    /// A referenced node id does not exist.
    #[error("unknown node id: {0}")]
    UnknownId(String),

    /// Percolation/path queries need at least one sink.
    #[error("sink set is empty")]
    EmptySinks,

    /// Path enumeration exceeded its cap.
    #[error("path enumeration cap exceeded: more than {cap} paths")]
    PathCapExceeded { cap: usize },

    /// Curve construction or combination failed an invariant.
    #[error("invalid curve: {0}")]
    InvalidCurve(String),

    /// Curves passed to a combinator do not share a grid.
    #[error("curve grid mismatch: {0}")]
    GridMismatch(String),

    /// The linear-programming solver failed on a problem that must be
    /// feasible; indicates an internal inconsistency.
    #[error("linear program failed: {0}")]
    LpFailure(String),

    /// A textual spec (channel-spec string, divergence-kind string) failed to
    /// parse.
    #[error("parse error: {0}")]
    Parse(String),

    /// JSON (de)serialization failure, wrapped to keep one error type.
    #[error("json error: {0}")]
    Json(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Json(e.to_string())
    }
}

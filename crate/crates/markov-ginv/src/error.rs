use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Errors raised by chain validation, factorizations and the g-inverse
/// procedures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// A pivot fell below the scale-relative singularity threshold.
    #[error("singular matrix: pivot magnitude {pivot:.3e} below threshold {threshold:.3e}")]
    SingularMatrix { pivot: f64, threshold: f64 },

    /// Matrix/vector dimensions do not conform.
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    /// A NaN or infinity was admitted or produced.
    #[error("non-finite value encountered: {0}")]
    NonFinite(String),

    /// A row of the transition matrix is negative or does not sum to one.
    #[error("not row-stochastic at row {row} (1-based): {detail}")]
    NotStochastic { row: usize, detail: String },

    /// The support graph is not strongly connected.
    #[error("not irreducible: state {to} is unreachable from state {from} (1-based)")]
    NotIrreducible { from: usize, to: usize },

    /// A candidate stationary vector failed validation.
    #[error("invalid stationary vector: {0}")]
    InvalidStationary(String),

    /// A 1-based state index is outside [1, m].
    #[error("state index {index} out of range 1..={m}")]
    IndexOutOfRange { index: usize, m: usize },

    /// A recipe that needs the stationary vector was built without one.
    #[error("recipe {0} requires the stationary vector")]
    MissingPi(&'static str),

    /// A user-supplied matrix is not a g-inverse of I - P.
    #[error("condition 1 failed: residual {residual:.3e} exceeds tolerance {tolerance:.3e}")]
    Condition1Failed { residual: f64, tolerance: f64 },

    /// A*e vanished, contradicting the defining property of a g-inverse.
    #[error("degenerate alpha: (I - (I-P)G)e is numerically zero; G is not a g-inverse")]
    DegenerateAlpha,

    /// pi'*t or u'*e is numerically zero, so I - P + t*u' is singular.
    #[error("degenerate pivot: {0} is numerically zero")]
    DegeneratePivot(&'static str),

    /// The scale-invariance family produced inconsistent members.
    #[error("invariance violated: max discrepancy {discrepancy:.3e} exceeds {tolerance:.3e}")]
    InvarianceViolated { discrepancy: f64, tolerance: f64 },

    /// delta = 0 is excluded from the scaled-update family.
    #[error("delta must be non-zero")]
    ZeroDelta,

    /// The probing vector v is orthogonal to the column span of A.
    #[error("zero projection: v'Ae is numerically zero for the supplied v")]
    ZeroProjection,

    /// No row of A has a non-zero sum; G is not a g-inverse.
    #[error("no row of A = I - (I-P)G has a non-zero sum; G is not a g-inverse")]
    NoValidRow,

    /// The procedure excludes (1,2) g-inverses (gamma = -1).
    #[error("g-inverse has gamma = -1 (a (1,2) inverse); this procedure does not apply")]
    Gamma2Inverse,

    /// The g-inverse is not a (1,5) inverse.
    #[error("not a (1,5) g-inverse (alpha = e, beta = pi required)")]
    Not15Inverse,

    /// The g-inverse is not a (1,4) inverse.
    #[error("not a (1,4) g-inverse (beta = e/m required)")]
    Not14Inverse,

    /// The g-inverse carries no (t, u) recipe vectors.
    #[error("g-inverse was not built from explicit (t, u) vectors")]
    NoRecipeVectors,

    /// Row sums of G are not constant, so the short-form formulas do not apply.
    #[error("row sums of G are not constant (spread {spread:.3e}); short form does not apply")]
    RowSumNotConstant { spread: f64 },

    /// The chain is periodic, so the asymptotic decomposition does not converge.
    #[error("chain is periodic with period {period}; asymptotic form requires aperiodicity")]
    PeriodicChain { period: usize },

    /// The horizon must be at least one step.
    #[error("occupation horizon must be >= 1")]
    InvalidHorizon,

    /// Power iteration failed to reach the requested residual.
    #[error("power iteration did not converge within {iters} iterations (residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    /// A simulated trajectory exceeded the per-trial step cap.
    #[error("trajectory exceeded {cap} steps without reaching the target state")]
    TrajectoryCapExceeded { cap: u64 },

    /// A variance came out more negative than rounding can explain.
    #[error("variance {value:.3e} at ({row}, {col}) is more negative than numerical tolerance")]
    NegativeVariance { value: f64, row: usize, col: usize },
}

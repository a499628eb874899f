use num_complex::Complex64;
use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("exponent {exponent} is outside the representable range")]
    Overflow { exponent: f64 },

    #[error("non-finite input: {0}")]
    NonFinite(String),

    #[error("x = {x} is a pole of g; choose a different sample point")]
    PoleOfG { x: Complex64 },

    #[error("finite-difference stencil node {node} (t = {t}) hits a pole")]
    StencilHitsPole { node: Complex64, t: f64 },

    #[error("sum form is indeterminate at x = {x}: a one-soliton factor has a pole there")]
    Indeterminate { x: Complex64 },

    #[error("commensurability data required: {0}")]
    NotCommensurable(String),

    #[error("exact mode does not support nonzero shifts in the polynomial coefficients")]
    ShiftedExactPoly,

    #[error("polynomial has degree {0} after specialization; need at least 1")]
    DegreeTooLow(usize),

    #[error("root finder did not converge after {iterations} iterations (worst residual {worst_residual:e})")]
    RootsNotConverged { iterations: usize, worst_residual: f64 },

    #[error("y = 0 has no preimage under y = exp(-x/lambda)")]
    ZeroY,

    #[error("corrector diverged at t = {t}; last good sample t = {last_t}, x = {last_x}")]
    CorrectorDiverged { t: f64, last_t: f64, last_x: Complex64 },

    #[error("near-multiple root at t = {t}, x = {x}: step size fell below the floor away from any declared collision")]
    NearMultipleRoot { t: f64, x: Complex64 },

    #[error("x = {x} is not a zero (relative residual {residual:e})")]
    NotAZero { x: Complex64, residual: f64 },

    #[error("zero at x = {x} is not simple (|F_x| relative {derivative:e})")]
    MultipleZero { x: Complex64, derivative: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("ambiguous branch classification: cubic limit {cubic}, linear limit {linear}")]
    AmbiguousFit { cubic: Complex64, linear: Complex64 },

    #[error("ambiguous family matching: {0}")]
    AmbiguousMatch(String),

    #[error("label direction does not match the sign of t - t_c")]
    DirectionMismatch,

    #[error("no crossing of Im x = {level}: Im x - level does not change sign on the curve")]
    NoCrossing { level: f64 },

    #[error("tangential crossing at t = {t} (vertical speed {speed:e})")]
    TangentialCrossing { t: f64, speed: f64 },

    #[error("grid too narrow: boundary |u| = {boundary:e} against peak {peak:e}; widen the grid")]
    GridTooNarrow { boundary: f64, peak: f64 },

    #[error("poor fit (R^2 = {r_squared})")]
    PoorFit { r_squared: f64 },

    #[error("singular configuration: {0}")]
    SingularConfiguration(String),

    #[error("second derivative vanishes at the origin")]
    VanishingDerivative,

    #[error("report serialization failed: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;

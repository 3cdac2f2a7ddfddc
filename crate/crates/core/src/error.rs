use thiserror::Error;

pub type Result<T> = std::result::Result<T, SsaError>;

/// Every failure mode of the library. Each variant names the precondition
/// that was violated so that front ends can print it verbatim.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SsaError {
    #[error("series too short: length {len}, need at least 3 values")]
    SeriesTooShort { len: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("window length {window} out of range for series of length {len} (need 2 <= L <= N-1)")]
    WindowOutOfRange { window: usize, len: usize },

    #[error("decomposition failed: {0}")]
    DecompositionFailed(String),

    #[error("eigentriple index {index} out of range ({count} retained)")]
    IndexOutOfRange { index: usize, count: usize },

    #[error("group syntax error: {0}")]
    GroupSyntax(String),

    #[error("rank {rank} too large: only {available} available")]
    RankTooLarge { rank: usize, available: usize },

    #[error("rank must be at least 1")]
    ZeroRank,

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("basis columns are not orthonormal (deviation {deviation:e})")]
    NotOrthonormal { deviation: f64 },

    #[error("vertical signal subspace (nu^2 = {nu2}); min-norm prediction undefined")]
    VerticalSubspace { nu2: f64 },

    #[error("forecast diverged at step {step} (|value| = {value:e})")]
    ForecastDiverged { step: usize, value: f64 },

    #[error("seed length {got} does not match recurrence order {expected}")]
    SeedLength { got: usize, expected: usize },

    #[error("recurrent forecast needs a forward recurrence")]
    BackwardForecast,

    #[error("forecast horizon must be at least 1")]
    ZeroSteps,

    #[error("all recurrence coefficients are zero")]
    AllZeroCoefficients,

    #[error("ill-conditioned basis (condition number {cond:e} > 1e12)")]
    IllConditionedBasis { cond: f64 },

    #[error("too many basis functions ({functions}) for series of length {len}")]
    TooManyBasisFunctions { functions: usize, len: usize },

    #[error("input must be nonzero")]
    ZeroInput,

    #[error("residual is identically zero")]
    ZeroResidual,

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("shift matrix estimate is rank deficient (basis without last row lost rank)")]
    RankDeficientShift,

    #[error("TLS-ESPRIT degenerate: V22 block is singular")]
    TlsDegenerate,

    #[error("pole equals zero")]
    ZeroPole,

    #[error("noise basis is empty")]
    EmptyNoiseBasis,

    #[error("EV weight {index} is not positive ({value:e})")]
    NonpositiveEigenvalue { index: usize, value: f64 },

    #[error("only {found} roots inside the unit circle, {wanted} requested")]
    TooFewRootsInside { found: usize, wanted: usize },

    #[error("requested {wanted} roots but polynomial has only {found}")]
    TooFewRoots { found: usize, wanted: usize },

    #[error("found {found} pseudospectrum peaks, {wanted} requested")]
    TooFewPeaks { found: usize, wanted: usize },

    #[error("grid size must be at least 2")]
    GridTooSmall,

    #[error("eigenvalue computation did not converge")]
    EigenFailed,

    #[error("invalid signal spec: {0}")]
    InvalidSpec(String),

    #[error("argument out of domain: {0}")]
    OutOfDomain(String),

    #[error("parse error: {0}")]
    Parse(String),
}

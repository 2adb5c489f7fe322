use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("character index {index} out of range for a unit group of order {order}")]
    CharacterIndex { index: u64, order: u64 },

    #[error("unsupported weight {0}: expected one of 12, 16, 18, 20, 22, 26")]
    UnsupportedWeight(u32),

    #[error("Ramanujan bound violated at p = {p}: |lambda(p)| = {value} > {degree}")]
    Ramanujan { p: u64, value: f64, degree: usize },

    #[error("normalization: lambda(1) = {0}, expected 1")]
    Normalization(String),

    #[error("invariant violated at m = {index}: {reason}")]
    Invariant { index: u64, reason: String },

    #[error("parse error at line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("outside evaluation domain: {0}")]
    Domain(String),

    #[error("gcd({a}, {q}) != 1")]
    NotCoprime { a: u64, q: u64 },

    #[error("all-zero polynomial")]
    ZeroPolynomial,

    #[error("monomial input: {0}")]
    Monomial(String),

    #[error("no t0 found: best min |D_i(1+it)| = {best} at t = {t}, threshold {threshold}")]
    NoT0 { t: f64, best: f64, threshold: f64 },

    #[error("root search failed after {attempts} lines")]
    RootSearch { attempts: usize },

    #[error("modulus window violated at sigma = {sigma}; maximal admissible sigma = {max_sigma}")]
    Window { sigma: f64, max_sigma: f64 },

    #[error("K-membership failure: {reason} (slack {slack})")]
    KMembership { reason: String, slack: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("no admissible index pair: min ||g_i^-1 g_j - I|| = {best}, need < {bound}")]
    NoPairing { best: f64, bound: f64 },

    #[error("coverage shortfall: {0}")]
    Coverage(String),

    #[error("iteration budget exhausted after {steps} steps (residual {residual})")]
    Budget { steps: usize, residual: f64 },

    #[error("scale condition unmet: required mu >= {required}, available {available}")]
    Scale { required: f64, available: f64 },

    #[error("solver residual {residual} above tolerance {tolerance}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("evaluation error {error} exceeds threshold {threshold}; usable sigma floor {sigma_floor}")]
    Sensitivity { error: f64, threshold: f64, sigma_floor: f64 },

    #[error("simultaneous approximation budget exhausted: best discrepancy {best} at t = {t}, good-t density ~ {density}")]
    Approximation { t: f64, best: f64, density: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

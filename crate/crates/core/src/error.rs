//! Error type shared by every module in the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

/// Failure modes for construction, checking, and evaluation routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Operand dimensions do not allow the requested operation.
    #[error("{op}: operand shapes {lhs} and {rhs} are incompatible")]
    ShapeMismatch {
        op: &'static str,
        lhs: String,
        rhs: String,
    },

    /// A square matrix was required.
    #[error("{op}: requires a square matrix, got {rows}x{cols}")]
    NotSquare {
        op: &'static str,
        rows: usize,
        cols: usize,
    },

    /// Hermiticity check failed on an input that must be Hermitian.
    #[error("input is not Hermitian: defect {defect:.3e} exceeds {tol:.0e}")]
    NonHermitianInput { defect: f64, tol: f64 },

    /// The coupling ratio must be positive and finite.
    #[error("coupling ratio must be positive and finite, got {kappa}")]
    InvalidKappa { kappa: f64 },

    /// The interaction phase must be a finite number.
    #[error("interaction phase must be finite, got {theta}")]
    InvalidTheta { theta: f64 },

    /// Amplitudes or state vectors failed the normalization check.
    #[error("not normalized: squared norm {norm_sq} is off by more than {tol:.0e}")]
    NotNormalized { norm_sq: f64, tol: f64 },

    /// The measurement-operator set does not resolve the identity.
    #[error(
        "measurement operators do not sum to the identity: defect {defect:.3e} exceeds {tol:.0e}"
    )]
    CompletenessViolation { defect: f64, tol: f64 },

    /// Conditioning on an outcome of (numerically) zero probability.
    #[error("outcome {outcome} has probability {probability:.3e}; the collapsed state is undefined")]
    ZeroProbabilityOutcome { outcome: char, probability: f64 },

    /// Sweep bounds must satisfy 0 < lo <= hi with a positive step.
    #[error("invalid sweep range: lo={lo}, hi={hi}, step={step}")]
    InvalidRange { lo: f64, hi: f64, step: f64 },

    /// Priors must lie in [0, 1].
    #[error("prior must lie in [0, 1], got {q1}")]
    InvalidPrior { q1: f64 },

    /// The reference success bound is stated for equal priors only.
    #[error("no reference bound for q1 = {q1}; it is defined only at q1 = 0.5")]
    UnsupportedPrior { q1: f64 },

    /// Closed-form probability expressions hold only for the standard
    /// candidate pair |0⟩ and (|0⟩+|1⟩)/√2.
    #[error("closed-form probabilities require the standard candidate states")]
    UnsupportedEnsemble,

    /// Trial counts must be at least 1.
    #[error("trial count must be at least 1")]
    InvalidTrialCount,

    /// A probability report violated one of its defining identities.
    #[error("probability invariant violated: {detail}")]
    ProbabilityInvariant { detail: String },
}

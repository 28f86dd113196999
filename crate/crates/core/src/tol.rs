//! Numerical tolerances used across the crate.
//!
//! Every matrix in this protocol is at most 9x9, so checks can sit near
//! machine precision. Looser bounds would let transcription mistakes in the
//! closed-form expressions slip through unnoticed, which is exactly what the
//! cross-check tests exist to catch.

/// Max-norm bound on ‖U†U − I‖ for an operator to count as unitary.
pub const UNITARITY_TOL: f64 = 1e-10;

/// Max-norm bound on ‖A − A†‖ for an operator to count as Hermitian.
pub const HERMITICITY_TOL: f64 = 1e-12;

/// Eigenvalue floor for positive-semidefiniteness checks: all eigenvalues
/// must be at least `-PSD_TOL`.
pub const PSD_TOL: f64 = 1e-10;

/// Bound on |⟨v|v⟩ − 1| for normalized amplitude pairs and state vectors.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Max-norm bound on ‖Σ_ν M_ν†M_ν − I‖ for a measurement-operator set.
pub const COMPLETENESS_TOL: f64 = 1e-10;

/// Bound on the misleading-outcome expectation values ⟨ψ₁|E_c|ψ₁⟩ and
/// ⟨ψ₂|E_b|ψ₂⟩ at unambiguous parameter sets.
pub const UNAMBIGUITY_TOL: f64 = 1e-12;

/// Bound on |closed form − trace pipeline| for outcome probabilities, and on
/// the matching analytic-vs-exponential column comparison.
pub const CLOSED_FORM_AGREEMENT_TOL: f64 = 1e-10;

/// Outcome probabilities below this cutoff are treated as exactly zero; the
/// collapsed post-measurement state is undefined there.
pub const ZERO_PROB_TOL: f64 = 1e-14;

/// Bound on |p_s + p_in − 1| and on per-preparation outcome-distribution sums.
pub const PROBABILITY_SUM_TOL: f64 = 1e-10;

/// Slack allowed on raw (unclamped) probabilities outside [0, 1]; roundoff
/// may produce values like -3e-17 that are still legitimate.
pub const PROBABILITY_RANGE_TOL: f64 = 1e-12;

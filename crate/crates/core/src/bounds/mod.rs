//! Explicit constants and evaluable two-sided bounds.

mod envelope;
mod laplace;
mod ledger;
mod surrogate;

pub use envelope::{
    density_envelope, diagonal_lower, nu_envelope, regime_classify, tail_bounds, BoundEnvelope,
    EnvelopePoint, NuBounds, NuEnvelope, Regime, RegimeCheck, TailBounds, REGIME_TOLERANCE,
};
pub use laplace::{
    laplace_lower_b, laplace_upper_from_derivative, monotone_laplace_lower, monotone_laplace_upper,
    LaplaceLower,
};
pub use ledger::{
    comparison_radius, envelope_constants, laplace_constant, off_diagonal_constant, stable_bound,
    stable_bound_constant, tail_lower_constants, upper_constants, ConstantLedger, LedgerEntry,
    LowerConstants,
};
pub use surrogate::{
    profile_exponent, surrogate_cbf, surrogate_ratios, ProfileExponent, RatioRange,
};

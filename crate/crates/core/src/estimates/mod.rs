//! Quantitative checks: kernel decay, per-piece envelopes, the cancellation
//! condition, operator norms, the smoothness budget and the `L^p` conditions.

mod budget;
mod cancellation;
mod conditions;
mod decay;
mod envelope;
mod norm;

pub use budget::{check_budget, floor_even, smoothness_budget, SmoothnessBudget};
pub use cancellation::{
    check_cancellation_class, cz_condition_check, cz_sweep, make_cancellation_test_function, max_outer_radius,
    CZCheckConfig, CZReport, CZSweep, Profile,
};
pub use conditions::{condition_report, ConditionReport};
pub use decay::{decay_fit, log_log_slope, minimal_l, DecayFit, KernelDecayParams, DECAY_SHELLS};
pub use envelope::{dyadic_envelope_check, EnvelopeReport};
pub use norm::{
    necessary_condition_probe, operator_norm_estimate, theorem_norm_bound, NormBoundInputs, NormBudget, NormEstimate,
    NormMethod, ProbeEntry, ProbeReport,
};

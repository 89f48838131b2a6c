//! Leray projector, Stokes operator, the convective and absorption forms, and
//! executable versions of the inequalities they satisfy.

mod bracket;
mod pointwise;
mod report;
mod spectral;

pub use bracket::{
    dissipation_bracket, grad_l6_ratio, sobolev_ratio, Bracket, GRAD_L6_CONSTANT,
    SOBOLEV_CONSTANT,
};
pub use pointwise::{
    absorption_pointwise, certified_monotonicity_constant, difference_bound_check,
    monotonicity_gap, power_mean_fact, Vec3,
};
pub use report::{
    check_difference_bound, check_dissipation_bracket, check_grad_l6, check_monotonicity,
    check_power_mean, run_inequality_suite, sample_pair, ExponentReport, InequalityReport,
    LemmaId, SuiteOutcome, SuiteSettings, BRACKET_TOLERANCE,
};
pub use spectral::{
    absorption, absorption_self, convective, convective_with, leray_project, stokes,
    tail_fraction,
};

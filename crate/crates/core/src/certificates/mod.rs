//! Computable criteria that certify regularity of perturbed solutions, and
//! the constants they depend on.

mod exponent;
mod ode;
mod pairs;
mod robustness;

pub use exponent::{exponent_gap_norm, exponent_robustness_lhs, gronwall_envelope};
pub use ode::{local_existence_horizon, ode_blowup_time, ode_threshold};
pub use pairs::{
    calibrate, certify_pair, fit_difference_inequality, fit_existence_inequality, fit_gronwall,
    forcing_difference_l2, forcing_perturbation, initial_perturbation, pair_history,
    with_headroom, Calibration, PairHistory, PairSample, CALIBRATION_FLOOR,
};
pub use robustness::{
    robustness_integrand, robustness_lhs, robustness_r, CertificateConstants, CertificateReport,
    ConstantsMode, Verdict,
};

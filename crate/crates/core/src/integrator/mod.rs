//! Time integration of the Galerkin-truncated CBF system with per-step
//! diagnostics.

mod config;
mod diagnostics;
mod stepper;
mod twin;

pub use config::{
    taylor_green, Forcing, ForcingMode, InitialCondition, SimulationConfig, TimeStep,
};
pub use diagnostics::{
    cumulative_trapezoid, trapezoid, DiagnosticsRow, DiagnosticsSeries, CSV_HEADER,
};
pub use stepper::{
    energy_balance_residual, simulate, simulate_from, simulate_in, step, Outcome, Simulation,
    SimulationResult, Snapshot, Stepper, Trajectory, BLOWUP_H1,
};
pub use twin::{h1_distance, identical_twin_difference, twin_run_divergence, TwinOptions, TwinReport};

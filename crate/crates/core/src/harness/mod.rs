//! Scenario files, orchestration of runs and sweeps, and the artifact tree
//! with its checksum manifest.

mod artifacts;
mod plot;
mod scenario;
mod spec;

pub use artifacts::{ArtifactWriter, Manifest, ManifestEntry, MANIFEST, METADATA};
pub use plot::{emit_plot_data, PlotData};
pub use scenario::{
    resume, run_scenario, ExponentRow, RunContext, ScenarioSummary, SweepResult, SweepRow,
};
pub use spec::{
    ConstantsChoice, ExponentPair, Perturbation, PerturbationMode, ScenarioKind, ScenarioSpec,
    CONFIG_VERSION,
};

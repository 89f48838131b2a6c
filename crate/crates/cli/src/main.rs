use std::path::{Path, PathBuf};
use std::process::ExitCode;

use cbf_core::fields::reduce;
use cbf_core::harness::{resume, run_scenario, RunContext, ScenarioKind, ScenarioSpec};
use cbf_core::{CbfError, Result};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(name = "cbf", version, about = "Convective Brinkman-Forchheimer simulator and regularity certificates")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Scenario file (JSON, "cbf_config_version": 1).
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the scenario's `output_dir`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Use fixed-order reductions so results do not depend on scheduling.
    #[arg(long)]
    deterministic: bool,
    /// Worker threads (default: all cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation.
    Simulate(Common),
    /// Certify perturbations of a reference run.
    Certify(Common),
    /// Certify and simulate a sweep of perturbation sizes.
    PerturbSweep(Common),
    /// Sample the pointwise and functional inequalities.
    InequalitySuite(Common),
    /// Exponent robustness along a reference trajectory.
    ExponentSweep(Common),
    /// Time and space refinement study.
    TwinRun(Common),
    /// Continue a run from a CBF1 checkpoint.
    Resume {
        #[command(flatten)]
        common: Common,
        /// Checkpoint to continue from.
        #[arg(long)]
        checkpoint: PathBuf,
    },
}

fn load_spec(common: &Common, kind: ScenarioKind) -> Result<ScenarioSpec> {
    let mut spec = ScenarioSpec::load(&common.config)?;
    match spec.kind {
        Some(k) if k != kind => {
            return Err(CbfError::Config(format!(
                "config is a {} scenario, not {}",
                k.as_str(),
                kind.as_str()
            )))
        }
        _ => spec.kind = Some(kind),
    }
    spec.validate()?;
    Ok(spec)
}

fn out_dir(common: &Common, spec: &ScenarioSpec) -> Result<PathBuf> {
    common
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .ok_or_else(|| CbfError::Config("no output directory given".into()))
}

fn context(common: &Common) -> RunContext {
    RunContext {
        base_dir: common.config.parent().map(Path::to_path_buf),
        threads: common.threads,
        deterministic: common.deterministic,
    }
}

fn run(cli: Cli) -> Result<i32> {
    let (common, kind) = match &cli.command {
        Command::Simulate(c) => (c, ScenarioKind::Simulate),
        Command::Certify(c) => (c, ScenarioKind::Certify),
        Command::PerturbSweep(c) => (c, ScenarioKind::PerturbSweep),
        Command::InequalitySuite(c) => (c, ScenarioKind::InequalitySuite),
        Command::ExponentSweep(c) => (c, ScenarioKind::ExponentSweep),
        Command::TwinRun(c) => (c, ScenarioKind::TwinRun),
        Command::Resume { common, .. } => (common, ScenarioKind::Simulate),
    };
    if let Some(k) = common.threads {
        if k == 0 {
            return Err(CbfError::Config("--threads must be at least 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(k)
            .build_global()
            .map_err(|e| CbfError::Config(e.to_string()))?;
    }
    reduce::set_deterministic(common.deterministic);
    let spec = load_spec(common, kind)?;
    let out = out_dir(common, &spec)?;
    let ctx = context(common);
    let summary = match &cli.command {
        Command::Resume { checkpoint, .. } => resume(checkpoint, spec.base()?, &out, &ctx)?,
        _ => run_scenario(&spec, &out, &ctx)?,
    };
    if let Some(msg) = &summary.message {
        log::error!("{msg}");
    }
    log::info!(
        "{} artifacts written to {}",
        summary.manifest.artifacts.len(),
        out.display()
    );
    Ok(summary.exit_code)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            log::error!("{e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}

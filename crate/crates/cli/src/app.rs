//! Command-line surface: argument parsing and subcommand dispatch.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{EngineChoice, ScenarioConfig};
use crate::error::{CliError, CliResult};
use crate::output::OutputDir;
use crate::run::{run_free_pulse, run_scenario, spectra_outputs, Job};
use crate::sweep::run_sweep;
use crate::verify::run_verify;

/// Output directory used when neither `--out` nor the environment sets one.
pub const DEFAULT_OUT_DIR: &str = "wgqed_out";
pub const OUT_DIR_ENV: &str = "WGQED_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "wgqed", version, about = "Fock-pulse scattering off a two-level emitter in a waveguide")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Output directory (overrides $WGQED_OUT_DIR).
    #[arg(long, env = OUT_DIR_ENV, default_value = DEFAULT_OUT_DIR)]
    pub out: PathBuf,
    /// Worker threads; defaults to one per core.
    #[arg(long)]
    pub threads: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    /// Scenario file (TOML), or a manifest.json from an earlier run.
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the [engines] section.
    #[arg(long, value_enum)]
    pub engine: Option<EngineChoice>,
    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Populations and fluxes (and optionally G¹ and spectra) for one scenario.
    Simulate(ScenarioArgs),
    /// Time-dependent and long-time spectra plus a plot script.
    Spectra {
        #[command(flatten)]
        args: ScenarioArgs,
        /// Remove the emitter: spectra of the free pulse.
        #[arg(long)]
        no_emitter: bool,
    },
    /// Peak emitter population against rect pulse length.
    Sweep(ScenarioArgs),
    /// Built-in consistency suite; exits nonzero on any failure.
    Verify {
        /// Adds conservation and cross-engine checks for this scenario.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, value_enum)]
        engine: Option<EngineChoice>,
        #[command(flatten)]
        common: Common,
        /// Flip the drive sign in the hierarchy (mutation test of the suite).
        #[arg(long, hide = true)]
        inject_drive_sign_flip: bool,
    },
}

fn init_threads(threads: Option<usize>) -> CliResult<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Config("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("cannot start the thread pool: {e}")))?;
    }
    Ok(())
}

fn load(path: &Path, engine: Option<EngineChoice>) -> CliResult<ScenarioConfig> {
    let mut config = ScenarioConfig::load(path)?;
    if let Some(e) = engine {
        config.apply_engine(e);
    }
    Ok(config)
}

pub fn execute(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(a) => {
            init_threads(a.common.threads)?;
            let sc = load(&a.config, a.engine)?.validate()?;
            let mut out = OutputDir::create(&a.common.out)?;
            let manifest = run_scenario(Job::Simulate, &sc, &mut out)?;
            out.write_json("manifest.json", &manifest)?;
            for d in &manifest.diff {
                println!("{:<10} max |Δ| = {:.3e}  rms = {:.3e}", d.quantity, d.max_abs_error, d.rms_error);
            }
            println!("wrote {} files to {}", manifest.outputs.len(), out.root().display());
        }
        Command::Spectra { args: a, no_emitter } => {
            init_threads(a.common.threads)?;
            let mut config = load(&a.config, a.engine)?;
            spectra_outputs(&mut config);
            if no_emitter {
                // no emitter means no engine; keep validation away from engine-only constraints
                config.engines.analytic = false;
                config.engines.mps = true;
                config.emitter.delta_over_gamma = 0.0;
            }
            let sc = config.validate()?;
            let mut out = OutputDir::create(&a.common.out)?;
            let manifest =
                if no_emitter { run_free_pulse(&sc, &mut out)? } else { run_scenario(Job::Spectra, &sc, &mut out)? };
            out.write_json("manifest.json", &manifest)?;
            println!("wrote {} files to {}", manifest.outputs.len(), out.root().display());
        }
        Command::Sweep(a) => {
            init_threads(a.common.threads)?;
            let config = load(&a.config, a.engine)?;
            if config.sweep.is_none() {
                return Err(CliError::Config("the sweep command needs a [sweep] section".into()));
            }
            let sc = config.validate()?;
            let mut out = OutputDir::create(&a.common.out)?;
            let manifest = run_sweep(&sc, &mut out)?;
            println!("{} sweep rows written to {}", manifest.points, out.path("sweep.csv").display());
        }
        Command::Verify { config, engine, common, inject_drive_sign_flip } => {
            init_threads(common.threads)?;
            let scenario = match config {
                Some(path) => Some(load(&path, engine)?.validate()?),
                None => None,
            };
            let out = OutputDir::create(&common.out)?;
            run_verify(scenario.as_ref(), inject_drive_sign_flip, &out)?;
        }
    }
    Ok(())
}

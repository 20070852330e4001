//! Experiment harness for the `hamlin` library: configuration-driven sweeps
//! that write CSV/JSON artifacts plus a `manifest.json` per run.

pub mod commands;
pub mod config;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{Map, Value};
use thiserror::Error;

pub use commands::{Artifacts, Check};
pub use config::{Command, ConfigFile, ExperimentConfig, Overrides};
use config::*;

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage error: {0}")]
    Usage(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Library(#[from] hamlin::Error),
}

impl CliError {
    /// 2 for numerical failures that amount to a failed check, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Library(hamlin::Error::Convergence(_) | hamlin::Error::Cert(_)) => 2,
            _ => 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
struct Versions {
    hamlin: &'static str,
    hamlin_cli: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct Manifest {
    pub command: Command,
    pub seed: u64,
    /// Parameters after defaults were applied.
    pub params: Value,
    versions: Versions,
    pub outputs: Vec<String>,
    pub checks: Vec<Check>,
    pub passed: bool,
    /// The only field that differs between identical runs.
    pub wall_time_s: f64,
}

#[derive(Clone, Debug)]
pub struct Outcome {
    pub manifest: Manifest,
}

impl Outcome {
    pub fn passed(&self) -> bool {
        self.manifest.passed
    }

    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            2
        }
    }
}

fn dispatch<P>(
    cfg: &ExperimentConfig,
    out: &mut Artifacts,
    f: fn(&P, u64, &mut Artifacts) -> Result<Vec<Check>, CliError>,
) -> Result<(Value, Vec<Check>), CliError>
where
    P: DeserializeOwned + Serialize,
{
    let p: P = decode_params(&cfg.params)?;
    let checks = f(&p, cfg.seed, out)?;
    Ok((serde_json::to_value(&p).expect("params serialize"), checks))
}

/// Runs one experiment into `cfg.out_dir` and writes its manifest.
pub fn run(cfg: &ExperimentConfig) -> Result<Outcome, CliError> {
    let start = Instant::now();
    std::fs::create_dir_all(&cfg.out_dir)?;
    let mut out = Artifacts::new(&cfg.out_dir);
    let (params, checks) = match cfg.command {
        Command::BoundCheck => dispatch::<BoundCheck>(cfg, &mut out, commands::bound_check)?,
        Command::TrotterSweep => dispatch::<TrotterSweep>(cfg, &mut out, commands::trotter_sweep)?,
        Command::GcSweep => dispatch::<GcSweep>(cfg, &mut out, commands::gc_sweep)?,
        Command::MultiplyDemo => dispatch::<MultiplyDemo>(cfg, &mut out, commands::multiply_demo)?,
        Command::QsvtDemo => dispatch::<QsvtDemo>(cfg, &mut out, commands::qsvt_demo)?,
        Command::PolyVerify => dispatch::<PolyVerify>(cfg, &mut out, commands::poly_verify)?,
        Command::OverlapSim => dispatch::<OverlapSim>(cfg, &mut out, commands::overlap_sim)?,
        Command::GreenDemo => dispatch::<GreenDemo>(cfg, &mut out, commands::green_demo)?,
        Command::SosSim => dispatch::<SosSim>(cfg, &mut out, commands::sos_sim)?,
        Command::EtaNorm => dispatch::<EtaNorm>(cfg, &mut out, commands::eta_norm)?,
    };
    let manifest = Manifest {
        command: cfg.command,
        seed: cfg.seed,
        params,
        versions: Versions { hamlin: hamlin::VERSION, hamlin_cli: env!("CARGO_PKG_VERSION") },
        outputs: out.files().to_vec(),
        passed: checks.iter().all(|c| c.passed),
        checks,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let mut s = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    s.push('\n');
    std::fs::write(cfg.out_dir.join(MANIFEST), s)?;
    Ok(Outcome { manifest })
}

#[derive(Debug, Parser)]
#[command(name = "hamlin", version, about = "Block-encoding experiments with CSV output")]
pub struct Cli {
    /// JSON config file; flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// RNG seed (falls back to the config, then HAMLIN_SEED).
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads; defaults to the number of logical cores.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[command(subcommand)]
    pub command: Sub,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Group-commutator error against its third-order bound.
    BoundCheck(BoundCheckFlags),
    /// Suzuki formula error versus step count.
    TrotterSweep(TrotterSweepFlags),
    /// Group-commutator error versus step size and repetition count.
    GcSweep(GcSweepFlags),
    /// Block-encoding multiplication by group commutators.
    MultiplyDemo(MultiplyDemoFlags),
    /// Singular value transformation of random payloads.
    QsvtDemo(QsvtDemoFlags),
    /// Builds and certifies a dominated polynomial pair.
    PolyVerify(PolyVerifyFlags),
    /// Repeated seeded overlap estimation.
    OverlapSim(OverlapSimFlags),
    /// Sampled Green's functions against the dense inverse.
    GreenDemo(GreenDemoFlags),
    /// Sum-of-squares Hamiltonian simulation.
    SosSim(SosSimFlags),
    /// Eta-seminorms against subset sums and sector norms.
    EtaNorm(EtaNormFlags),
    /// Runs the command named in the config file.
    Run,
}

impl Sub {
    fn split(&self) -> (Option<Command>, Map<String, Value>) {
        match self {
            Sub::BoundCheck(f) => (Some(Command::BoundCheck), flag_map(f)),
            Sub::TrotterSweep(f) => (Some(Command::TrotterSweep), flag_map(f)),
            Sub::GcSweep(f) => (Some(Command::GcSweep), flag_map(f)),
            Sub::MultiplyDemo(f) => (Some(Command::MultiplyDemo), flag_map(f)),
            Sub::QsvtDemo(f) => (Some(Command::QsvtDemo), flag_map(f)),
            Sub::PolyVerify(f) => (Some(Command::PolyVerify), flag_map(f)),
            Sub::OverlapSim(f) => (Some(Command::OverlapSim), flag_map(f)),
            Sub::GreenDemo(f) => (Some(Command::GreenDemo), flag_map(f)),
            Sub::SosSim(f) => (Some(Command::SosSim), flag_map(f)),
            Sub::EtaNorm(f) => (Some(Command::EtaNorm), flag_map(f)),
            Sub::Run => (None, Map::new()),
        }
    }
}

/// Builds the config for a parsed command line.
pub fn config_from_cli(cli: &Cli, env_seed: Option<&str>) -> Result<ExperimentConfig, CliError> {
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    let (command, params) = cli.command.split();
    let flags = Overrides { command, seed: cli.seed, out_dir: cli.out_dir.clone(), params };
    resolve(file, flags, env_seed)
}

/// Runs on a pool of `jobs` threads, or the global pool when unset.
pub fn run_with_jobs(cfg: &ExperimentConfig, jobs: Option<usize>) -> Result<Outcome, CliError> {
    match jobs {
        None => run(cfg),
        Some(0) => Err(CliError::Usage("--jobs must be positive".into())),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| CliError::Usage(e.to_string()))?
            .install(|| run(cfg)),
    }
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let env_seed = std::env::var(SEED_ENV).ok();
    let result = config_from_cli(&cli, env_seed.as_deref()).and_then(|cfg| {
        log::info!("running {} with seed {} into {}", cfg.command.name(), cfg.seed, cfg.out_dir.display());
        let o = run_with_jobs(&cfg, cli.jobs)?;
        Ok((cfg, o))
    });
    match result {
        Ok((cfg, o)) => {
            for c in &o.manifest.checks {
                let tag = if c.passed { "PASS" } else { "FAIL" };
                if c.detail.is_empty() {
                    println!("{tag} {}", c.name);
                } else {
                    println!("{tag} {}: {}", c.name, c.detail);
                }
            }
            println!("wrote {} files to {}", o.manifest.outputs.len() + 1, cfg.out_dir.display());
            o.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

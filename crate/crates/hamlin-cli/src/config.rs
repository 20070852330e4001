//! Experiment configuration: a JSON document, command-line overrides and
//! per-command parameter sets with defaults.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::CliError;

pub const SEED_ENV: &str = "HAMLIN_SEED";
pub const DEFAULT_SEED: u64 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    BoundCheck,
    TrotterSweep,
    GcSweep,
    MultiplyDemo,
    QsvtDemo,
    PolyVerify,
    OverlapSim,
    GreenDemo,
    SosSim,
    EtaNorm,
}

impl Command {
    pub const ALL: [Command; 10] = [
        Command::BoundCheck,
        Command::TrotterSweep,
        Command::GcSweep,
        Command::MultiplyDemo,
        Command::QsvtDemo,
        Command::PolyVerify,
        Command::OverlapSim,
        Command::GreenDemo,
        Command::SosSim,
        Command::EtaNorm,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::BoundCheck => "bound-check",
            Command::TrotterSweep => "trotter-sweep",
            Command::GcSweep => "gc-sweep",
            Command::MultiplyDemo => "multiply-demo",
            Command::QsvtDemo => "qsvt-demo",
            Command::PolyVerify => "poly-verify",
            Command::OverlapSim => "overlap-sim",
            Command::GreenDemo => "green-demo",
            Command::SosSim => "sos-sim",
            Command::EtaNorm => "eta-norm",
        }
    }
}

/// A fully resolved run request.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub command: Command,
    pub seed: u64,
    /// Command-specific keys; missing keys take their defaults at run time.
    #[serde(default)]
    pub params: Map<String, Value>,
    pub out_dir: PathBuf,
}

impl ExperimentConfig {
    pub fn new(command: Command, seed: u64, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig { command, seed, params: Map::new(), out_dir: out_dir.into() }
    }

    pub fn with_param(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.params.insert(key.to_string(), value.into());
        self
    }
}

/// The on-disk config document. Every key is optional so that flags can
/// supply the rest.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigFile {
    #[serde(default)]
    pub command: Option<Command>,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub params: Map<String, Value>,
    #[serde(default)]
    pub out_dir: Option<PathBuf>,
}

impl ConfigFile {
    pub fn from_json(s: &str) -> Result<Self, CliError> {
        serde_json::from_str(s).map_err(|e| CliError::Usage(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let s = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        Self::from_json(&s)
    }
}

/// Values given on the command line; they win over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub command: Option<Command>,
    pub seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    pub params: Map<String, Value>,
}

/// Merges file, flags and the HAMLIN_SEED fallback into one config.
pub fn resolve(file: ConfigFile, flags: Overrides, env_seed: Option<&str>) -> Result<ExperimentConfig, CliError> {
    let command = match (flags.command, file.command) {
        (Some(a), Some(b)) if a != b => {
            return Err(CliError::Usage(format!("config names {}, command line names {}", b.name(), a.name())))
        }
        (Some(a), _) | (None, Some(a)) => a,
        (None, None) => return Err(CliError::Usage("no command given".into())),
    };
    let env = match env_seed {
        Some(s) => Some(
            s.trim().parse::<u64>().map_err(|e| CliError::Usage(format!("{SEED_ENV}={s}: {e}")))?,
        ),
        None => None,
    };
    let seed = flags.seed.or(file.seed).or(env).unwrap_or(DEFAULT_SEED);
    let out_dir = flags.out_dir.or(file.out_dir).unwrap_or_else(|| PathBuf::from("out").join(command.name()));
    let mut params = file.params;
    params.extend(flags.params);
    Ok(ExperimentConfig { command, seed, params, out_dir })
}

/// Strict decode of a parameter map; absent keys take the struct defaults.
pub fn decode_params<P: DeserializeOwned>(params: &Map<String, Value>) -> Result<P, CliError> {
    serde_json::from_value(Value::Object(params.clone())).map_err(|e| CliError::Usage(format!("params: {e}")))
}

/// Serialized flag struct with unset flags dropped.
pub fn flag_map<F: Serialize>(flags: &F) -> Map<String, Value> {
    match serde_json::to_value(flags) {
        Ok(Value::Object(m)) => m.into_iter().filter(|(_, v)| !v.is_null()).collect(),
        _ => Map::new(),
    }
}

/// Declares a parameter struct with defaults and its clap flag mirror.
macro_rules! params {
    ($(#[$meta:meta])* $name:ident / $flags:ident {
        $($field:ident : $ty:ty = $default:expr, $help:literal $([$($arg:tt)*])?;)*
    }) => {
        $(#[$meta])*
        #[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
        #[serde(default, deny_unknown_fields)]
        pub struct $name {
            $(pub $field: $ty,)*
        }

        impl Default for $name {
            fn default() -> Self {
                $name { $($field: $default,)* }
            }
        }

        #[derive(Clone, Debug, Default, Serialize, clap::Args)]
        pub struct $flags {
            $(
                #[arg(long, help = $help $(, $($arg)*)?)]
                pub $field: Option<$ty>,
            )*
        }
    };
}

params! {
    BoundCheck / BoundCheckFlags {
        dim: usize = 4, "matrix dimension";
        trials: usize = 20, "random Hermitian pairs";
        taus: Vec<f64> = vec![0.02, 0.05, 0.1], "comma-separated step sizes" [value_delimiter = ','];
    }
}

params! {
    TrotterSweep / TrotterSweepFlags {
        dim: usize = 4, "matrix dimension";
        terms: usize = 3, "number of Hermitian terms";
        order: u32 = 2, "Suzuki order (1 or even)";
        time: f64 = 1.0, "evolution time";
        steps: Vec<u64> = vec![8, 16, 32, 64, 128], "comma-separated step counts" [value_delimiter = ','];
        slope_tol: f64 = 0.15, "allowed deviation of the fitted slope from -order";
    }
}

params! {
    GcSweep / GcSweepFlags {
        dim: usize = 4, "matrix dimension";
        trials: usize = 5, "random Hermitian pairs";
        order: u32 = 2, "group commutator order (even)";
        taus: Vec<f64> = vec![0.2, 0.1, 0.05, 0.025], "comma-separated step sizes" [value_delimiter = ','];
        time: f64 = 0.5, "total time for the repeated formula";
        steps: Vec<u64> = vec![16, 32, 64, 128, 256], "comma-separated repetition counts" [value_delimiter = ','];
        slope_tol: f64 = 0.2, "allowed deviation of the tau slope from order + 1";
        steps_slope_tol: f64 = 0.1, "allowed deviation of the repetition slope";
    }
}

params! {
    MultiplyDemo / MultiplyDemoFlags {
        dim: usize = 1, "payload dimension; 1 uses the scalars a and b";
        a: f64 = 0.4, "first factor (norm when dim > 1)";
        b: f64 = 0.5, "second factor (norm when dim > 1)";
        order: u32 = 2, "group commutator order";
        steps: Vec<u64> = vec![16, 32, 64, 128], "comma-separated step counts" [value_delimiter = ','];
        tol: f64 = 5e-3, "required decoding error at the largest step count";
    }
}

params! {
    QsvtDemo / QsvtDemoFlags {
        target: String = "cube".into(), "cube, fractional, inverse or square";
        dim: usize = 4, "payload dimension";
        norm: f64 = 1.0, "spectral norm of the random payload";
        eps: f64 = 1e-6, "pair precision";
        trials: usize = 3, "random payloads";
        kappa: f64 = 3.0, "condition number for inverse";
        tau: f64 = 0.5, "scale for fractional";
    }
}

params! {
    PolyVerify / PolyVerifyFlags {
        target: String = "cube".into(), "x, x3, cube, fractional, overlap, inverse or green";
        xi: f64 = 0.4, "slack";
        eps: f64 = 1e-4, "certification tolerance";
        tau: f64 = 0.5, "scale for fractional";
        kappa: f64 = 5.0, "condition number for inverse";
        eta: f64 = 0.5, "broadening for green";
        grid: usize = 20_000, "certification grid points";
        recheck_factor: usize = 4, "the pair is re-verified on grid * factor points";
    }
}

params! {
    OverlapSim / OverlapSimFlags {
        a: f64 = 0.6, "scalar payload";
        eps: f64 = 0.02, "estimation tolerance";
        pfail: f64 = 1e-3, "failure probability per estimate";
        reps: usize = 200, "seeded repetitions";
        max_failures: usize = 2, "allowed repetitions off by more than eps";
        log_samples: bool = false, "write the per-sample log of repetition 0";
    }
}

params! {
    GreenDemo / GreenDemoFlags {
        modes: usize = 3, "fermionic modes";
        j: usize = 0, "first mode index";
        k: usize = 1, "second mode index";
        zeta: f64 = 0.2, "real part of z";
        eta: f64 = 0.5, "broadening (imaginary part of z)";
        eps: f64 = 0.05, "estimation tolerance";
        all_pairs: bool = false, "sweep every (j, k) pair";
    }
}

params! {
    SosSim / SosSimFlags {
        spec: String = String::new(), "path to a JSON simulation spec; replaces the random instance";
        nk: usize = 2, "number of squares";
        nj: usize = 2, "terms per square";
        dim: usize = 2, "payload dimension (dense instances)";
        modes: usize = 0, "fermionic modes; 0 draws dense payloads";
        norm: f64 = 0.5, "payload spectral norm";
        t: f64 = 0.5, "evolution time";
        eps: f64 = 1e-2, "target error";
        order: u32 = 2, "product formula order";
        path: String = "generic".into(), "generic or square";
        leakage_tol: f64 = 1e-8, "allowed particle-number leakage";
    }
}

params! {
    EtaNorm / EtaNormFlags {
        n: usize = 6, "fermionic modes";
        trials: usize = 3, "random coefficient matrices";
        normal: bool = false, "draw complex normal instead of Hermitian coefficients";
        comm_terms: usize = 2, "Hermitian terms in the commutator report; 0 skips it";
        tol: f64 = 1e-8, "agreement tolerance";
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(ConfigFile::from_json(r#"{"command": "bound-check", "sede": 3}"#).is_err());
        let mut m = Map::new();
        m.insert("dims".into(), Value::from(4));
        assert!(decode_params::<BoundCheck>(&m).is_err());
    }

    #[test]
    fn flags_override_file() {
        let file = ConfigFile::from_json(r#"{"command": "bound-check", "seed": 3, "params": {"dim": 2, "trials": 5}}"#).unwrap();
        let flags = BoundCheckFlags { dim: Some(6), ..Default::default() };
        let o = Overrides { seed: Some(9), params: flag_map(&flags), ..Default::default() };
        let cfg = resolve(file, o, Some("11")).unwrap();
        assert_eq!(cfg.seed, 9);
        let p: BoundCheck = decode_params(&cfg.params).unwrap();
        assert_eq!((p.dim, p.trials), (6, 5));
        assert_eq!(p.taus, vec![0.02, 0.05, 0.1]);
    }

    #[test]
    fn seed_falls_back_to_env() {
        let file = ConfigFile { command: Some(Command::EtaNorm), ..Default::default() };
        let cfg = resolve(file.clone(), Overrides::default(), Some("42")).unwrap();
        assert_eq!(cfg.seed, 42);
        assert_eq!(resolve(file.clone(), Overrides::default(), None).unwrap().seed, DEFAULT_SEED);
        assert!(resolve(file, Overrides::default(), Some("x")).is_err());
    }

    #[test]
    fn conflicting_commands_are_a_usage_error() {
        let file = ConfigFile { command: Some(Command::EtaNorm), ..Default::default() };
        let o = Overrides { command: Some(Command::SosSim), ..Default::default() };
        assert!(matches!(resolve(file, o, None), Err(CliError::Usage(_))));
    }

    #[test]
    fn experiment_config_round_trips() {
        let cfg = ExperimentConfig::new(Command::OverlapSim, 5, "o").with_param("reps", 3);
        let s = serde_json::to_string(&cfg).unwrap();
        assert!(s.contains("\"overlap-sim\""));
        assert_eq!(serde_json::from_str::<ExperimentConfig>(&s).unwrap(), cfg);
    }
}

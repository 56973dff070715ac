//! Command-line arguments and the optional `key = value` config file.
//!
//! Every knob resolves as flag, then config file, then built-in default, and
//! the resolved value is recorded for the report's parameter echo.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::Value;

use crate::CliError;

#[derive(Parser, Debug)]
#[command(
    name = "msep",
    version,
    about = "Bimodal learning separation workbench"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Sample a dataset and write it with a JSON sidecar.
    GenData(GenDataArgs),
    /// Run the majority-vote learner and report recovery and risk.
    Learn(LearnArgs),
    /// Run the unimodal attacks over a grid of dimensions.
    ProbeHardness(ProbeArgs),
    /// Run bit-agreement sessions and the built-in eavesdroppers.
    Ba(BaArgs),
    /// Run key agreement repeatedly and report key equality.
    Ka(KaArgs),
    /// Run the distinguisher and hybrid reductions.
    Reduce(ReduceArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::GenData(_) => "gen-data",
            Command::Learn(_) => "learn",
            Command::ProbeHardness(_) => "probe-hardness",
            Command::Ba(_) => "ba",
            Command::Ka(_) => "ka",
            Command::Reduce(_) => "reduce",
        }
    }

    pub fn common(&self) -> &CommonArgs {
        match self {
            Command::GenData(a) => &a.common,
            Command::Learn(a) => &a.common,
            Command::ProbeHardness(a) => &a.common,
            Command::Ba(a) => &a.common,
            Command::Ka(a) => &a.common,
            Command::Reduce(a) => &a.common,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug, Clone, Default)]
pub struct CommonArgs {
    #[arg(long)]
    pub n: Option<usize>,
    /// Noise rate; defaults to n^-0.5.
    #[arg(long)]
    pub theta: Option<f64>,
    /// Training-set size; defaults to n^3.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub tau: Option<f64>,
    /// Report path (the dataset path for gen-data); stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// File of `key = value` lines; flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Fail unless a seed is given explicitly.
    #[arg(long)]
    pub strict_seed: bool,
    /// Exit with status 4 if any acceptance check fails.
    #[arg(long)]
    pub check: bool,
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Args, Debug)]
pub struct LearnArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Dataset written by gen-data; without it, fresh datasets are sampled
    /// per trial.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Held-out points for the risk estimate.
    #[arg(long)]
    pub test_points: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ProbeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Comma-separated dimensions, e.g. `12,24,48`.
    #[arg(long)]
    pub grid: Option<String>,
    /// `(Y, z)` pairs handed to each attack.
    #[arg(long)]
    pub pairs: Option<usize>,
    #[arg(long)]
    pub max_weight: Option<usize>,
    /// Candidate budget of the low-weight search.
    #[arg(long)]
    pub budget: Option<u64>,
    #[arg(long)]
    pub gauss_trials: Option<u64>,
    /// Points used by the x/z correlation probe.
    #[arg(long)]
    pub probe_points: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Exact,
    Threshold,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum TransportArg {
    Memory,
    Socket,
}

#[derive(Args, Debug)]
pub struct BaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long, value_enum)]
    pub transport: Option<TransportArg>,
}

#[derive(Args, Debug)]
pub struct KaArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum)]
    pub rule: Option<RuleArg>,
    #[arg(long)]
    pub m_sessions: Option<usize>,
    #[arg(long)]
    pub key_len: Option<usize>,
}

#[derive(Args, Debug)]
pub struct ReduceArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub t_budget: Option<u64>,
    /// Training blocks per distinguisher run; defaults to k.
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub hybrid_k: Option<usize>,
    #[arg(long)]
    pub hybrid_trials: Option<u64>,
    #[arg(long)]
    pub pmu_trials: Option<u64>,
}

/// Resolves knobs against the config file and records the parameter echo.
pub struct Resolver {
    file: toml::Table,
    used: Vec<String>,
    pub echo: BTreeMap<String, Value>,
}

impl Resolver {
    pub fn new(config: Option<&Path>) -> Result<Self, CliError> {
        let file = match config {
            None => toml::Table::new(),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
                text.parse::<toml::Table>()
                    .map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?
            }
        };
        Ok(Self {
            file,
            used: Vec::new(),
            echo: BTreeMap::new(),
        })
    }

    fn file_value<T: serde::de::DeserializeOwned>(
        &mut self,
        key: &str,
    ) -> Result<Option<T>, CliError> {
        self.used.push(key.to_owned());
        match self.file.get(key) {
            None => Ok(None),
            Some(v) => v
                .clone()
                .try_into()
                .map(Some)
                .map_err(|e| CliError::Config(format!("config key {key}: {e}"))),
        }
    }

    /// Flag, then file, then `default`; recorded in the echo.
    pub fn get<T>(
        &mut self,
        key: &str,
        flag: Option<T>,
        default: Option<T>,
    ) -> Result<Option<T>, CliError>
    where
        T: serde::de::DeserializeOwned + serde::Serialize + Clone,
    {
        let file = self.file_value(key)?;
        let v = flag.or(file).or(default);
        if let Some(v) = &v {
            self.echo.insert(
                key.to_owned(),
                serde_json::to_value(v).map_err(|e| CliError::Internal(e.to_string()))?,
            );
        }
        Ok(v)
    }

    pub fn require<T>(&mut self, key: &str, flag: Option<T>, default: T) -> Result<T, CliError>
    where
        T: serde::de::DeserializeOwned + serde::Serialize + Clone,
    {
        Ok(self
            .get(key, flag, Some(default))?
            .expect("default supplied"))
    }

    /// Rejects config keys that no knob of this subcommand consumed.
    pub fn finish(&self) -> Result<(), CliError> {
        let unknown: Vec<&String> = self
            .file
            .keys()
            .filter(|k| !self.used.contains(k))
            .collect();
        if unknown.is_empty() {
            Ok(())
        } else {
            Err(CliError::Config(format!(
                "unknown config keys: {unknown:?}"
            )))
        }
    }
}

/// Parses a value-enum knob given in the config file as a string.
pub fn enum_knob<E: ValueEnum + Clone>(
    r: &mut Resolver,
    key: &str,
    flag: Option<E>,
    default: E,
) -> Result<E, CliError> {
    let file: Option<String> = r.file_value(key)?;
    let v = match (flag, file) {
        (Some(f), _) => f,
        (None, Some(s)) => {
            E::from_str(&s, true).map_err(|e| CliError::Config(format!("config key {key}: {e}")))?
        }
        (None, None) => default,
    };
    let name = v
        .to_possible_value()
        .map(|p| p.get_name().to_owned())
        .unwrap_or_default();
    r.echo.insert(key.to_owned(), Value::String(name));
    Ok(v)
}

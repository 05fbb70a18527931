//! Command-line and TOML configuration, merged into a validated [`ExperimentConfig`].

use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use recmwpm::code::FlavorPair;
use recmwpm::decoder::DecoderConfig;
use recmwpm::noise::{Bias, ExtremeOrdering};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "recmwpm", version, about = "Surface code simulations with conventional and recursive MWPM decoding")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Decode one sampled (or given) error and optionally write the iteration trace.
    Decode(Options),
    /// Logical error rate on every (distance, p) cell.
    Sweep(Options),
    /// Sweep followed by a crossing estimate between adjacent distances.
    Threshold(Options),
    /// Probability at which the logical error rate equals the physical one.
    Pseudothreshold(Options),
    /// Pseudo-threshold campaign over random placements of calibrated qubits.
    Inid(Options),
}

impl CommandArgs {
    pub fn split(self) -> (Command, Options) {
        match self {
            CommandArgs::Decode(o) => (Command::Decode, o),
            CommandArgs::Sweep(o) => (Command::Sweep, o),
            CommandArgs::Threshold(o) => (Command::Threshold, o),
            CommandArgs::Pseudothreshold(o) => (Command::Pseudothreshold, o),
            CommandArgs::Inid(o) => (Command::Inid, o),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Command {
    Decode,
    Sweep,
    Threshold,
    Pseudothreshold,
    Inid,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DecoderKind {
    Mwpm,
    /// Conventional matching with per-qubit log-likelihood weights.
    Wmwpm,
    Recmwpm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NoiseKind {
    Depolarizing,
    Biased,
    /// Per-qubit pure-dephasing channels from calibration times.
    Inid,
    /// One pure-dephasing channel at the mean calibration times.
    Pta,
}

impl NoiseKind {
    pub fn name(self) -> &'static str {
        match self {
            NoiseKind::Depolarizing => "depolarizing",
            NoiseKind::Biased => "biased",
            NoiseKind::Inid => "inid",
            NoiseKind::Pta => "pta",
        }
    }

    pub fn uses_calibration(self) -> bool {
        matches!(self, NoiseKind::Inid | NoiseKind::Pta)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FlavorArg {
    Xz,
    Xy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderingArg {
    T1,
    T2,
}

/// Flags shared by every subcommand. Unset flags fall back to the config
/// file, then to defaults.
#[derive(Debug, Clone, Default, Args)]
pub struct Options {
    /// TOML file with the same keys as the long flags (underscores for dashes).
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Code distances, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub distance: Option<Vec<usize>>,
    #[arg(long, value_enum)]
    pub flavor: Option<FlavorArg>,
    #[arg(long, value_enum)]
    pub decoder: Option<DecoderKind>,
    #[arg(long, value_enum)]
    pub noise: Option<NoiseKind>,
    /// Physical error probability: a value, a comma list, or `start:stop:count`.
    #[arg(long)]
    pub p: Option<String>,
    /// Z bias `p_z / (p_x + p_y)`, or `inf` for pure Z noise.
    #[arg(long)]
    pub eta: Option<String>,
    /// Exposure time in microseconds.
    #[arg(long)]
    pub t: Option<f64>,
    /// Calibration table (CSV `qubit,t1_us,t2_us` or JSON).
    #[arg(long)]
    pub calibration: Option<PathBuf>,
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long)]
    pub arrangements: Option<usize>,
    /// Subgraph computation budget of the recursive decoder.
    #[arg(long)]
    pub nmax: Option<usize>,
    /// Master seed; drawn at random and reported when omitted.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Stop the pseudo-threshold search once |P_L - p| is at most this.
    #[arg(long)]
    pub tolerance: Option<f64>,
    /// Maximum bisection steps of the pseudo-threshold search.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Probability bracket of the pseudo-threshold search, `lo:hi`.
    #[arg(long)]
    pub bracket: Option<String>,
    /// Calibration time used to pick the extreme qubits.
    #[arg(long, value_enum)]
    pub ordering: Option<OrderingArg>,
    /// Result table path; stdout when omitted.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// JSON run report (configuration, summary statistics, timing).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Worker threads; 0 picks the number of cores.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Error to decode instead of sampling one, e.g. `IIYIIIIII`.
    #[arg(long)]
    pub error: Option<String>,
    /// JSON-lines file receiving one event per subgraph computation.
    #[arg(long)]
    pub trace: Option<PathBuf>,
}

/// Probability values as written in a config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ProbabilityValue {
    One(f64),
    List(Vec<f64>),
    Text(String),
}

/// Contents of a `--config` file.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub command: Option<Command>,
    pub distance: Option<Vec<usize>>,
    pub flavor: Option<FlavorPair>,
    pub decoder: Option<DecoderKind>,
    pub noise: Option<NoiseKind>,
    pub p: Option<ProbabilityValue>,
    pub eta: Option<Bias>,
    pub t: Option<f64>,
    pub calibration: Option<PathBuf>,
    pub shots: Option<u64>,
    pub arrangements: Option<usize>,
    pub nmax: Option<usize>,
    pub seed: Option<u64>,
    pub tolerance: Option<f64>,
    pub max_steps: Option<usize>,
    pub bracket: Option<(f64, f64)>,
    pub ordering: Option<ExtremeOrdering>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub report: Option<PathBuf>,
    pub threads: Option<usize>,
    pub error: Option<String>,
    pub trace: Option<PathBuf>,
}

/// Fully resolved and validated experiment description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub command: Command,
    pub distance: Vec<usize>,
    pub flavor: FlavorPair,
    pub decoder: DecoderKind,
    pub noise: NoiseKind,
    pub p: Vec<f64>,
    pub eta: Option<Bias>,
    pub t: Option<f64>,
    pub calibration: Option<PathBuf>,
    pub shots: u64,
    pub arrangements: usize,
    pub nmax: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub max_steps: usize,
    pub bracket: (f64, f64),
    pub ordering: ExtremeOrdering,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub report: Option<PathBuf>,
    pub threads: usize,
    pub error: Option<String>,
    pub trace: Option<PathBuf>,
}

pub const DEFAULT_SHOTS: u64 = 10_000;
pub const DEFAULT_ARRANGEMENTS: usize = 20;
pub const DEFAULT_NMAX: usize = 10;
pub const DEFAULT_TOLERANCE: f64 = 1e-3;
pub const DEFAULT_MAX_STEPS: usize = 12;
pub const DEFAULT_BRACKET: (f64, f64) = (0.001, 0.35);

impl ExperimentConfig {
    pub fn decoder_config(&self) -> DecoderConfig {
        match self.decoder {
            DecoderKind::Mwpm => DecoderConfig::Mwpm,
            DecoderKind::Wmwpm => DecoderConfig::Wmwpm,
            DecoderKind::Recmwpm => DecoderConfig::Recmwpm { n_max: self.nmax },
        }
    }

    /// Same settings as a config file.
    pub fn to_toml(&self) -> String {
        toml::to_string(&self.to_file_config()).expect("config fields are TOML-representable")
    }

    pub fn to_file_config(&self) -> FileConfig {
        FileConfig {
            command: Some(self.command),
            distance: Some(self.distance.clone()),
            flavor: Some(self.flavor),
            decoder: Some(self.decoder),
            noise: Some(self.noise),
            p: (!self.p.is_empty()).then(|| ProbabilityValue::List(self.p.clone())),
            eta: self.eta,
            t: self.t,
            calibration: self.calibration.clone(),
            shots: Some(self.shots),
            arrangements: Some(self.arrangements),
            nmax: Some(self.nmax),
            seed: Some(self.seed),
            tolerance: Some(self.tolerance),
            max_steps: Some(self.max_steps),
            bracket: Some(self.bracket),
            ordering: Some(self.ordering),
            output: self.output.clone(),
            format: Some(self.format),
            report: self.report.clone(),
            threads: Some(self.threads),
            error: self.error.clone(),
            trace: self.trace.clone(),
        }
    }
}

fn config_error(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

/// Parses `start:stop:count` (inclusive), a comma list, or a single value.
pub fn parse_probabilities(text: &str) -> Result<Vec<f64>, CliError> {
    let number = |s: &str| f64::from_str(s.trim()).map_err(|e| config_error(format!("invalid probability {s:?}: {e}")));
    let values = if text.contains(':') {
        let parts: Vec<&str> = text.split(':').collect();
        let [start, stop, count] = parts.as_slice() else {
            return Err(config_error(format!("grid {text:?} must be start:stop:count")));
        };
        let (start, stop) = (number(start)?, number(stop)?);
        let count: usize = count.trim().parse().map_err(|e| config_error(format!("invalid grid count in {text:?}: {e}")))?;
        match count {
            0 => return Err(config_error("grid count must be at least 1")),
            1 => vec![start],
            _ => (0..count).map(|i| start + (stop - start) * i as f64 / (count - 1) as f64).collect(),
        }
    } else {
        text.split(',').map(number).collect::<Result<Vec<_>, _>>()?
    };
    Ok(values)
}

fn parse_bracket(text: &str) -> Result<(f64, f64), CliError> {
    let parts: Vec<&str> = text.split([':', ',']).collect();
    let [lo, hi] = parts.as_slice() else {
        return Err(config_error(format!("bracket {text:?} must be lo:hi")));
    };
    let num = |s: &str| f64::from_str(s.trim()).map_err(|e| config_error(format!("invalid bracket value {s:?}: {e}")));
    Ok((num(lo)?, num(hi)?))
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    toml::from_str(&text).map_err(|e| config_error(format!("{}: {e}", path.display())))
}

/// Merges CLI flags over the optional config file and validates the result.
pub fn resolve(command: Command, cli: Options) -> Result<ExperimentConfig, CliError> {
    let file = match &cli.config {
        Some(path) => load_file_config(path)?,
        None => FileConfig::default(),
    };
    if let Some(c) = file.command {
        if c != command {
            log::info!("config file command {c:?} overridden by {command:?}");
        }
    }

    let p = match (cli.p, file.p) {
        (Some(text), _) => parse_probabilities(&text)?,
        (None, Some(ProbabilityValue::One(v))) => vec![v],
        (None, Some(ProbabilityValue::List(v))) => v,
        (None, Some(ProbabilityValue::Text(text))) => parse_probabilities(&text)?,
        (None, None) => Vec::new(),
    };
    let eta = match cli.eta {
        Some(text) => Some(Bias::from_str(&text).map_err(config_error)?),
        None => file.eta,
    };
    let bracket = match cli.bracket {
        Some(text) => parse_bracket(&text)?,
        None => file.bracket.unwrap_or(DEFAULT_BRACKET),
    };
    let flavor = cli
        .flavor
        .map(|f| match f {
            FlavorArg::Xz => FlavorPair::Xz,
            FlavorArg::Xy => FlavorPair::Xy,
        })
        .or(file.flavor)
        .unwrap_or(FlavorPair::Xz);
    let ordering = cli
        .ordering
        .map(|o| match o {
            OrderingArg::T1 => ExtremeOrdering::T1,
            OrderingArg::T2 => ExtremeOrdering::T2,
        })
        .or(file.ordering)
        .unwrap_or_default();
    let default_noise = if command == Command::Inid { NoiseKind::Inid } else { NoiseKind::Depolarizing };

    let config = ExperimentConfig {
        command,
        distance: cli.distance.or(file.distance).ok_or_else(|| config_error("--distance is required"))?,
        flavor,
        decoder: cli.decoder.or(file.decoder).unwrap_or(DecoderKind::Recmwpm),
        noise: cli.noise.or(file.noise).unwrap_or(default_noise),
        p,
        eta,
        t: cli.t.or(file.t),
        calibration: cli.calibration.or(file.calibration),
        shots: cli.shots.or(file.shots).unwrap_or(DEFAULT_SHOTS),
        arrangements: cli.arrangements.or(file.arrangements).unwrap_or(DEFAULT_ARRANGEMENTS),
        nmax: cli.nmax.or(file.nmax).unwrap_or(DEFAULT_NMAX),
        seed: cli.seed.or(file.seed).unwrap_or_else(rand::random),
        tolerance: cli.tolerance.or(file.tolerance).unwrap_or(DEFAULT_TOLERANCE),
        max_steps: cli.max_steps.or(file.max_steps).unwrap_or(DEFAULT_MAX_STEPS),
        bracket,
        ordering,
        output: cli.output.or(file.output),
        format: cli.format.or(file.format).unwrap_or_default(),
        report: cli.report.or(file.report),
        threads: cli.threads.or(file.threads).unwrap_or(0),
        error: cli.error.or(file.error),
        trace: cli.trace.or(file.trace),
    };
    validate(&config)?;
    Ok(config)
}

pub fn validate(c: &ExperimentConfig) -> Result<(), CliError> {
    if c.distance.is_empty() {
        return Err(config_error("at least one distance is required"));
    }
    if let Some(d) = c.distance.iter().find(|&&d| d < 3 || d % 2 == 0) {
        return Err(config_error(format!("distance {d} must be odd and at least 3")));
    }
    if c.shots == 0 {
        return Err(config_error("--shots must be at least 1"));
    }
    if c.arrangements == 0 {
        return Err(config_error("--arrangements must be at least 1"));
    }
    if let Some(p) = c.p.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(config_error(format!("probability {p} outside [0, 1]")));
    }
    match (c.noise, c.eta) {
        (NoiseKind::Biased, None) => return Err(config_error("--noise biased needs --eta")),
        (NoiseKind::Biased, Some(_)) => {}
        (other, Some(_)) => return Err(config_error(format!("--eta only applies to biased noise, not {}", other.name()))),
        _ => {}
    }
    if c.noise.uses_calibration() {
        let path = c.calibration.as_ref().ok_or_else(|| config_error(format!("--noise {} needs --calibration", c.noise.name())))?;
        if !path.is_file() {
            return Err(config_error(format!("calibration file {} not found", path.display())));
        }
    } else if c.calibration.is_some() {
        return Err(config_error("--calibration only applies to inid or pta noise"));
    }
    if c.command == Command::Inid && c.noise != NoiseKind::Inid {
        return Err(config_error("the inid command needs --noise inid"));
    }
    if !(c.tolerance > 0.0) {
        return Err(config_error("--tolerance must be positive"));
    }
    let (lo, hi) = c.bracket;
    if !(0.0 <= lo && lo < hi && hi <= 1.0) {
        return Err(config_error(format!("bracket ({lo}, {hi}) must satisfy 0 <= lo < hi <= 1")));
    }
    if let Some(t) = c.t {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(config_error(format!("exposure time {t} must be non-negative")));
        }
    }
    if c.error.is_some() && c.command != Command::Decode {
        return Err(config_error("--error only applies to decode"));
    }
    if c.trace.is_some() && c.command != Command::Decode {
        return Err(config_error("--trace only applies to decode"));
    }

    let needs_p = |c: &ExperimentConfig| !(c.noise.uses_calibration() && c.t.is_some());
    match c.command {
        Command::Decode => {
            if c.distance.len() != 1 {
                return Err(config_error("decode takes a single distance"));
            }
            if c.error.is_none() {
                if needs_p(c) && c.p.len() != 1 {
                    return Err(config_error("decode needs exactly one --p (or --t with calibration noise)"));
                }
            } else if c.noise.uses_calibration() && c.p.is_empty() && c.t.is_none() {
                return Err(config_error("decode needs --p or --t to weight calibration noise"));
            } else if !c.noise.uses_calibration() && c.p.len() != 1 {
                return Err(config_error("decode needs exactly one --p"));
            }
        }
        Command::Sweep | Command::Threshold => {
            if c.p.is_empty() {
                return Err(config_error("--p is required"));
            }
            if c.command == Command::Threshold && c.distance.len() < 2 {
                return Err(config_error("threshold needs at least two distances"));
            }
        }
        Command::Pseudothreshold | Command::Inid => {
            if !c.p.is_empty() {
                return Err(config_error("pseudo-threshold searches use --bracket, not --p"));
            }
        }
    }
    Ok(())
}

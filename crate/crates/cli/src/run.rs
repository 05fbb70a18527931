//! Executes a resolved configuration.

use std::io::Write;
use std::time::Instant;

use recmwpm::code::CodeLayout;
use recmwpm::decoder::Decoder;
use recmwpm::experiment::{self, BisectionOptions, CampaignOptions, ExperimentError, ExposureFamily, RateEstimate, SweepPoint};
use recmwpm::noise::{self, CalibrationEntry, NoiseModel};
use recmwpm::pauli::{Pauli, PauliString};
use serde::Serialize;

use crate::config::{Command, ExperimentConfig, NoiseKind};
use crate::output::{ResultRecord, RunReport};
use crate::CliError;

/// A finished run. `failure` is set when the run produced partial results
/// but should still exit non-zero (for example, no threshold crossing).
#[derive(Debug)]
pub struct RunOutcome {
    pub report: RunReport,
    pub decode: Option<DecodeSummary>,
    pub failure: Option<CliError>,
}

/// Single-shot decode result.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecodeSummary {
    pub error: PauliString,
    /// Indices of the fired stabilizers.
    pub syndrome: Vec<usize>,
    pub correction: PauliString,
    pub residual_class: String,
    pub failed: bool,
    pub subgraph_computations: usize,
    pub converged: bool,
    pub fallback_used: bool,
}

fn layout(config: &ExperimentConfig, d: usize) -> Result<CodeLayout, CliError> {
    CodeLayout::rotated_planar(d, config.flavor).map_err(|e| CliError::Config(e.to_string()))
}

fn noise_err(e: noise::NoiseError) -> CliError {
    match e {
        noise::NoiseError::Io(e) => CliError::Io(e.to_string()),
        other => CliError::Config(other.to_string()),
    }
}

/// Noise source for one code size.
struct Source<'a> {
    config: &'a ExperimentConfig,
    n: usize,
    /// Extreme calibration entries for `n` qubits.
    selected: Vec<CalibrationEntry>,
}

impl<'a> Source<'a> {
    fn new(config: &'a ExperimentConfig, n: usize, entries: &[CalibrationEntry]) -> Result<Self, CliError> {
        let selected = if config.noise.uses_calibration() { noise::select_extremes(entries, n, config.ordering).map_err(noise_err)? } else { Vec::new() };
        Ok(Self { config, n, selected })
    }

    fn exposure(&self, p: Option<f64>) -> Result<f64, CliError> {
        match (self.config.t, p) {
            (Some(t), _) => Ok(t),
            (None, Some(p)) => noise::exposure_for_probability(&self.selected, p).map_err(noise_err),
            (None, None) => Err(CliError::Config("calibration noise needs --p or --t".into())),
        }
    }

    /// Model at probability `p` (or at `--t`), with the exposure time used.
    fn model(&self, p: Option<f64>, arrangement: usize) -> Result<(NoiseModel, f64, Option<f64>), CliError> {
        let c = self.config;
        match c.noise {
            NoiseKind::Depolarizing | NoiseKind::Biased => {
                let p = p.expect("validated");
                let channel = match c.eta {
                    Some(eta) => noise::biased(p, eta),
                    None => noise::depolarizing(p),
                }
                .map_err(noise_err)?;
                Ok((NoiseModel::iid(self.n, channel), p, None))
            }
            NoiseKind::Pta | NoiseKind::Inid => {
                let t = self.exposure(p)?;
                let family = if c.noise == NoiseKind::Pta {
                    ExposureFamily::IidMean(self.selected.clone())
                } else {
                    ExposureFamily::Inid(noise::arrange(&self.selected, experiment::arrangement_seed(c.seed, arrangement)))
                };
                let model = family.model(self.n, t).map_err(noise_err)?;
                let p = family.physical_probability(t).map_err(noise_err)?;
                Ok((model, p, Some(t)))
            }
        }
    }
}

fn load_entries(config: &ExperimentConfig) -> Result<Vec<CalibrationEntry>, CliError> {
    match &config.calibration {
        Some(path) if config.noise.uses_calibration() => noise::load_calibration(path).map_err(noise_err),
        _ => Ok(Vec::new()),
    }
}

/// Runs on a dedicated pool when `--threads` is non-zero.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    if config.threads == 0 {
        return run_inner(config);
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(config.threads).build().map_err(|e| CliError::Config(e.to_string()))?;
    pool.install(|| run_inner(config))
}

fn run_inner(config: &ExperimentConfig) -> Result<RunOutcome, CliError> {
    let start = Instant::now();
    let entries = load_entries(config)?;
    let mut report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        wall_clock_seconds: 0.0,
        config: config.clone(),
        records: Vec::new(),
        threshold: None,
        pseudo_thresholds: Vec::new(),
        campaigns: Vec::new(),
    };
    let mut decode = None;
    let mut failure = None;
    match config.command {
        Command::Decode => {
            let (summary, record) = run_decode(config, &entries)?;
            report.records.push(record);
            decode = Some(summary);
        }
        Command::Sweep | Command::Threshold => {
            let points = run_sweep(config, &entries, &mut report.records)?;
            if config.command == Command::Threshold {
                match experiment::threshold_estimate(&points) {
                    Ok(t) => report.threshold = Some(t),
                    Err(e) => failure = Some(e.into()),
                }
            }
        }
        Command::Pseudothreshold | Command::Inid => {
            if let Err(e) = run_pseudo(config, &entries, &mut report) {
                match e {
                    CliError::Numerical(_) => failure = Some(e),
                    other => return Err(other),
                }
            }
        }
    }
    report.wall_clock_seconds = start.elapsed().as_secs_f64();
    Ok(RunOutcome { report, decode, failure })
}

fn run_sweep(config: &ExperimentConfig, entries: &[CalibrationEntry], records: &mut Vec<ResultRecord>) -> Result<Vec<SweepPoint>, CliError> {
    let decoder = config.decoder_config();
    let mut points = Vec::new();
    for &d in &config.distance {
        let code = layout(config, d)?;
        let source = Source::new(config, code.n(), entries)?;
        for (i, &p) in config.p.iter().enumerate() {
            let (model, _, t) = source.model(Some(p), 0)?;
            let seed = experiment::cell_seed(config.seed, d, i);
            let estimate = experiment::logical_error_rate(&code, decoder, &model, config.shots, seed)?;
            log::info!("d={d} p={p:.5} P_L={:.5} ({}/{})", estimate.p_logical, estimate.failures, estimate.shots);
            records.push(ResultRecord::new(config, d, p, t, &estimate, seed));
            points.push(SweepPoint { distance: d, p, seed, estimate });
        }
    }
    Ok(points)
}

fn bisection(config: &ExperimentConfig, t_bracket: (f64, f64)) -> BisectionOptions {
    BisectionOptions { t_bracket, tolerance: config.tolerance, max_steps: config.max_steps }
}

fn run_pseudo(config: &ExperimentConfig, entries: &[CalibrationEntry], report: &mut RunReport) -> Result<(), CliError> {
    let decoder = config.decoder_config();
    let shot_seed = experiment::campaign_shot_seed(config.seed);
    let (lo, hi) = config.bracket;
    for &d in &config.distance {
        let code = layout(config, d)?;
        let source = Source::new(config, code.n(), entries)?;
        match config.noise {
            NoiseKind::Depolarizing | NoiseKind::Biased => {
                // The search variable is p itself.
                let r = experiment::bisect_pseudo_threshold(&bisection(config, (lo, hi)), |p| {
                    let (model, p, _) = source.model(Some(p), 0).map_err(|e| ExperimentError::InvalidInput(e.to_string()))?;
                    Ok((p, experiment::logical_error_rate(&code, decoder, &model, config.shots, shot_seed)?))
                })?;
                report.records.push(ResultRecord::new(config, d, r.p_pth, None, &r.estimate, shot_seed));
                report.pseudo_thresholds.push((d, r));
            }
            NoiseKind::Pta => {
                let family = ExposureFamily::IidMean(source.selected.clone());
                let t_bracket = family.bracket_for(lo, hi).map_err(noise_err)?;
                let r = experiment::pseudo_threshold(&code, decoder, &family, &bisection(config, t_bracket), config.shots, shot_seed)?;
                report.records.push(ResultRecord::new(config, d, r.p_pth, Some(r.t_at_pth), &r.estimate, shot_seed));
                report.pseudo_thresholds.push((d, r));
            }
            NoiseKind::Inid => {
                let t_bracket = ExposureFamily::IidMean(source.selected.clone()).bracket_for(lo, hi).map_err(noise_err)?;
                let opts = CampaignOptions { arrangements: config.arrangements, bisection: bisection(config, t_bracket), shots: config.shots, seed: config.seed, ordering: config.ordering };
                let campaign = experiment::inid_campaign(&code, decoder, entries, &opts)?;
                for (&a, r) in campaign.succeeded.iter().zip(&campaign.per_arrangement) {
                    let mut record = ResultRecord::new(config, d, r.p_pth, Some(r.t_at_pth), &r.estimate, experiment::arrangement_seed(config.seed, a));
                    record.seed = experiment::arrangement_seed(config.seed, a);
                    report.records.push(record);
                }
                eprintln!("d={d}: p_pth = {:.6} ± {:.6} over {}/{} arrangements", campaign.p_pth, campaign.std_error, campaign.successes, campaign.arrangements);
                report.campaigns.push((d, campaign));
            }
        }
    }
    Ok(())
}

fn run_decode(config: &ExperimentConfig, entries: &[CalibrationEntry]) -> Result<(DecodeSummary, ResultRecord), CliError> {
    let d = config.distance[0];
    let code = layout(config, d)?;
    let source = Source::new(config, code.n(), entries)?;
    let (model, p, t) = source.model(config.p.first().copied(), 0)?;
    let error = match &config.error {
        Some(text) => {
            let e: PauliString = text.parse().map_err(|e| CliError::Config(format!("--error: {e}")))?;
            if e.len() != code.n() {
                return Err(CliError::Config(format!("--error has {} qubits, the code has {}", e.len(), code.n())));
            }
            e
        }
        None => model.sample_error(&mut experiment::shot_rng(config.seed, 0)),
    };
    let syndrome = code.syndrome(&error).expect("length checked");
    let mut trace = Vec::new();
    let outcome = Decoder::new(&code)
        .decode(&syndrome, config.decoder_config(), &model, config.trace.is_some().then_some(&mut trace))
        .map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(path) = &config.trace {
        let mut file = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?);
        for event in &trace {
            serde_json::to_writer(&mut file, event).map_err(|e| CliError::Io(e.to_string()))?;
            writeln!(file)?;
        }
        file.flush()?;
    }
    let residual = error.multiply(&outcome.correction).expect("same length");
    let class = code.logical_class_unchecked(&residual);
    let summary = DecodeSummary {
        syndrome: syndrome.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i).collect(),
        error,
        correction: outcome.correction,
        residual_class: class.as_char().to_string(),
        failed: class != Pauli::I,
        subgraph_computations: outcome.subgraph_computations,
        converged: outcome.converged,
        fallback_used: outcome.fallback_used,
    };
    let estimate = RateEstimate::from_counts(u64::from(summary.failed), 1);
    Ok((summary, ResultRecord::new(config, d, p, t, &estimate, config.seed)))
}

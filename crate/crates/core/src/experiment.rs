//! Monte Carlo estimation of logical error rates and the derived threshold
//! and pseudo-threshold searches.
//!
//! Every shot draws from its own ChaCha stream selected by `(seed, shot)`, so
//! failure counts do not depend on how rayon splits the work.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::code::{CodeError, CodeLayout};
use crate::decoder::{DecodeError, Decoder, DecoderConfig};
use crate::noise::{self, Bias, CalibrationEntry, ExtremeOrdering, NoiseError, NoiseModel, QubitChannel};
use crate::pauli::Pauli;

#[derive(Debug, Error)]
pub enum ExperimentError {
    #[error("P_L - p does not change sign on t in [{t_lo}, {t_hi}] (values {f_lo:+.4e}, {f_hi:+.4e})")]
    Bracket { t_lo: f64, t_hi: f64, f_lo: f64, f_hi: f64 },
    #[error("no threshold crossing inside the swept range")]
    NoCrossing,
    #[error("only {successes} of {arrangements} arrangements produced a pseudo-threshold")]
    TooFewSuccesses { successes: usize, arrangements: usize },
    #[error("{0}")]
    InvalidInput(String),
    #[error(transparent)]
    Noise(#[from] NoiseError),
    #[error(transparent)]
    Decode(#[from] DecodeError),
    #[error(transparent)]
    Code(#[from] CodeError),
}

/// SplitMix64 finaliser over `(master, tag)`.
pub fn derive_seed(master: u64, tag: u64) -> u64 {
    let mut z = master ^ tag.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent stream for one shot.
pub fn shot_rng(seed: u64, shot: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(shot);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateEstimate {
    pub p_logical: f64,
    pub shots: u64,
    pub failures: u64,
    pub std_error: f64,
}

impl RateEstimate {
    pub fn from_counts(failures: u64, shots: u64) -> Self {
        assert!(shots > 0 && failures <= shots);
        let p = failures as f64 / shots as f64;
        Self { p_logical: p, shots, failures, std_error: (p * (1.0 - p) / shots as f64).sqrt() }
    }
}

/// Fraction of `shots` sampled errors that the decoder maps to a logical failure.
pub fn logical_error_rate(layout: &CodeLayout, decoder: DecoderConfig, model: &NoiseModel, shots: u64, seed: u64) -> Result<RateEstimate, ExperimentError> {
    if shots == 0 {
        return Err(ExperimentError::InvalidInput("shots must be at least 1".into()));
    }
    if model.n() != layout.n() {
        return Err(DecodeError::ModelSize { expected: layout.n(), got: model.n() }.into());
    }
    let dec = Decoder::new(layout);
    let failures = (0..shots as usize)
        .into_par_iter()
        .with_min_len(64)
        .map(|shot| {
            let mut rng = shot_rng(seed, shot as u64);
            let error = model.sample_error(&mut rng);
            let syndrome = layout.syndrome(&error).expect("sizes checked");
            let out = dec.decode(&syndrome, decoder, model, None).expect("inputs validated");
            let residual = error.multiply(&out.correction).expect("sizes checked");
            debug_assert!(layout.syndrome(&residual).unwrap().iter().all(|&b| !b));
            u64::from(layout.logical_class_unchecked(&residual) != Pauli::I)
        })
        .sum();
    Ok(RateEstimate::from_counts(failures, shots))
}

/// Single-parameter i.i.d. channel families swept over `p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum NoiseFamily {
    Depolarizing,
    Biased { eta: Bias },
}

impl NoiseFamily {
    pub fn channel(&self, p: f64) -> Result<QubitChannel, NoiseError> {
        match *self {
            NoiseFamily::Depolarizing => noise::depolarizing(p),
            NoiseFamily::Biased { eta } => noise::biased(p, eta),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            NoiseFamily::Depolarizing => "depolarizing",
            NoiseFamily::Biased { .. } => "biased",
        }
    }

    pub fn eta(&self) -> Option<Bias> {
        match *self {
            NoiseFamily::Depolarizing => None,
            NoiseFamily::Biased { eta } => Some(eta),
        }
    }
}

/// One cell of a sweep table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub distance: usize,
    pub p: f64,
    pub seed: u64,
    pub estimate: RateEstimate,
}

/// Seed of the sweep cell `(distance, p_index)`.
pub fn cell_seed(seed: u64, distance: usize, p_index: usize) -> u64 {
    derive_seed(derive_seed(seed, distance as u64), p_index as u64)
}

/// Logical error rate on every `(distance, p)` cell, distance-major.
pub fn sweep(
    layouts: &[CodeLayout],
    decoder: DecoderConfig,
    family: NoiseFamily,
    grid: &[f64],
    shots: u64,
    seed: u64,
) -> Result<Vec<SweepPoint>, ExperimentError> {
    let mut table = Vec::with_capacity(layouts.len() * grid.len());
    for layout in layouts {
        for (i, &p) in grid.iter().enumerate() {
            let model = NoiseModel::iid(layout.n(), family.channel(p)?);
            let cell = cell_seed(seed, layout.distance(), i);
            let estimate = logical_error_rate(layout, decoder, &model, shots, cell)?;
            log::info!("d={} p={p:.5} P_L={:.5} ({} / {})", layout.distance(), estimate.p_logical, estimate.failures, estimate.shots);
            table.push(SweepPoint { distance: layout.distance(), p, seed: cell, estimate });
        }
    }
    Ok(table)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub p_th: f64,
    /// `(d1, d2, crossing)` for each adjacent distance pair that crosses.
    pub distance_pairs: Vec<(usize, usize, f64)>,
}

/// Crossing of adjacent-distance curves in `(p, ln P_L)`, located by linear
/// interpolation between grid points.
pub fn threshold_estimate(table: &[SweepPoint]) -> Result<ThresholdResult, ExperimentError> {
    let mut distances: Vec<usize> = table.iter().map(|pt| pt.distance).collect();
    distances.sort_unstable();
    distances.dedup();
    if distances.len() < 2 {
        return Err(ExperimentError::InvalidInput("threshold estimation needs at least two distances".into()));
    }
    let curve = |d: usize| {
        let mut pts: Vec<&SweepPoint> = table.iter().filter(|pt| pt.distance == d).collect();
        pts.sort_by(|a, b| a.p.total_cmp(&b.p));
        pts
    };

    let mut pairs = Vec::new();
    let mut weighted = (0.0, 0.0);
    for w in distances.windows(2) {
        let (small, large) = (curve(w[0]), curve(w[1]));
        // Points present on both curves with non-zero failure counts.
        let mut diffs: Vec<(f64, f64, f64)> = Vec::new();
        for a in &small {
            if let Some(b) = large.iter().find(|b| (b.p - a.p).abs() <= 1e-12 * a.p.abs().max(1.0)) {
                if a.estimate.failures > 0 && b.estimate.failures > 0 {
                    let diff = b.estimate.p_logical.ln() - a.estimate.p_logical.ln();
                    diffs.push((a.p, diff, (a.estimate.failures + b.estimate.failures) as f64));
                }
            }
        }
        let mut crossings = (0.0, 0.0);
        for s in diffs.windows(2) {
            let ((p0, f0, w0), (p1, f1, w1)) = (s[0], s[1]);
            if f0 < 0.0 && f1 >= 0.0 {
                let at = p0 + (p1 - p0) * (-f0) / (f1 - f0);
                crossings.0 += (w0 + w1) * at;
                crossings.1 += w0 + w1;
            }
        }
        if crossings.1 > 0.0 {
            let at = crossings.0 / crossings.1;
            pairs.push((w[0], w[1], at));
            weighted.0 += crossings.0;
            weighted.1 += crossings.1;
        }
    }
    if pairs.is_empty() {
        return Err(ExperimentError::NoCrossing);
    }
    Ok(ThresholdResult { p_th: weighted.0 / weighted.1, distance_pairs: pairs })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PseudoThresholdResult {
    /// Physical error probability where `P_L = p`.
    pub p_pth: f64,
    /// Exposure time at `p_pth`, in microseconds.
    pub t_at_pth: f64,
    /// Final `t` bracket.
    pub bracket: (f64, f64),
    /// Uncertainty of `p_pth` propagated from the final rate estimate.
    pub std_error: f64,
    pub steps: usize,
    pub estimate: RateEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BisectionOptions {
    /// Initial exposure-time bracket, in microseconds.
    pub t_bracket: (f64, f64),
    /// Stop once `|P_L - p|` is at most this.
    pub tolerance: f64,
    pub max_steps: usize,
}

#[derive(Debug, Clone, Copy)]
struct Probe {
    t: f64,
    p: f64,
    estimate: RateEstimate,
}

impl Probe {
    fn gap(&self) -> f64 {
        self.estimate.p_logical - self.p
    }
}

/// Bisection on `t` for the sign change of `P_L(t) - p(t)`.
///
/// `eval(t)` returns the physical probability at `t` and the estimated
/// logical rate. Positive brackets are split geometrically.
pub fn bisect_pseudo_threshold<F>(opts: &BisectionOptions, mut eval: F) -> Result<PseudoThresholdResult, ExperimentError>
where
    F: FnMut(f64) -> Result<(f64, RateEstimate), ExperimentError>,
{
    let (t_lo, t_hi) = opts.t_bracket;
    if !(t_lo.is_finite() && t_hi.is_finite() && 0.0 <= t_lo && t_lo < t_hi) {
        return Err(ExperimentError::InvalidInput(format!("invalid t bracket ({t_lo}, {t_hi})")));
    }
    let mut probe = |t: f64| -> Result<Probe, ExperimentError> {
        let (p, estimate) = eval(t)?;
        Ok(Probe { t, p, estimate })
    };
    let mut lo = probe(t_lo)?;
    let mut hi = probe(t_hi)?;
    let mut history = vec![lo, hi];
    for end in [lo, hi] {
        if end.gap() == 0.0 {
            return Ok(finish(end, (lo.t, hi.t), &history, 0));
        }
    }
    if lo.gap().signum() == hi.gap().signum() {
        return Err(ExperimentError::Bracket { t_lo, t_hi, f_lo: lo.gap(), f_hi: hi.gap() });
    }

    let mut steps = 0;
    while steps < opts.max_steps {
        let mid_t = if lo.t > 0.0 { (lo.t * hi.t).sqrt() } else { 0.5 * (lo.t + hi.t) };
        if mid_t <= lo.t || mid_t >= hi.t {
            break;
        }
        let mid = probe(mid_t)?;
        history.push(mid);
        steps += 1;
        if mid.gap().abs() <= opts.tolerance {
            return Ok(finish(mid, (lo.t, hi.t), &history, steps));
        }
        if mid.gap().signum() == lo.gap().signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // Budget spent: interpolate the zero of the gap between the bracket ends.
    let frac = lo.gap() / (lo.gap() - hi.gap());
    let nearest = if lo.gap().abs() <= hi.gap().abs() { lo } else { hi };
    let at = Probe { t: lo.t + frac * (hi.t - lo.t), p: lo.p + frac * (hi.p - lo.p), estimate: nearest.estimate };
    Ok(finish(at, (lo.t, hi.t), &history, steps))
}

/// `p_pth` with its standard error `se(P_L) / |d(P_L - p)/dp|`. The slope is a
/// least-squares fit over probes within a factor two of the root, so that
/// Monte Carlo noise between nearby probes does not dominate it.
fn finish(at: Probe, bracket: (f64, f64), history: &[Probe], steps: usize) -> PseudoThresholdResult {
    let near: Vec<&Probe> = history.iter().filter(|pr| pr.p >= 0.5 * at.p && pr.p <= 2.0 * at.p).collect();
    let slope = least_squares_slope(&near).or_else(|| least_squares_slope(&history.iter().collect::<Vec<_>>()));
    let std_error = match slope {
        Some(s) if s.abs() > 1e-9 => at.estimate.std_error / s.abs(),
        _ => at.estimate.std_error,
    };
    PseudoThresholdResult { p_pth: at.p, t_at_pth: at.t, bracket, std_error, steps, estimate: at.estimate }
}

fn least_squares_slope(probes: &[&Probe]) -> Option<f64> {
    if probes.len() < 2 {
        return None;
    }
    let n = probes.len() as f64;
    let mean_p = probes.iter().map(|pr| pr.p).sum::<f64>() / n;
    let mean_g = probes.iter().map(|pr| pr.gap()).sum::<f64>() / n;
    let sxx: f64 = probes.iter().map(|pr| (pr.p - mean_p).powi(2)).sum();
    let sxy: f64 = probes.iter().map(|pr| (pr.p - mean_p) * (pr.gap() - mean_g)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Noise models parameterised by exposure time.
#[derive(Debug, Clone, PartialEq)]
pub enum ExposureFamily {
    /// Every qubit at the mean `T1`/`T2` of the entries.
    IidMean(Vec<CalibrationEntry>),
    /// One entry per data qubit, in lattice order.
    Inid(Vec<CalibrationEntry>),
}

impl ExposureFamily {
    pub fn entries(&self) -> &[CalibrationEntry] {
        match self {
            ExposureFamily::IidMean(e) | ExposureFamily::Inid(e) => e,
        }
    }

    pub fn model(&self, n: usize, t: f64) -> Result<NoiseModel, NoiseError> {
        match self {
            ExposureFamily::IidMean(entries) => {
                let (t1, t2) = noise::mean_times(entries);
                Ok(NoiseModel::iid(n, noise::pta_channel(t1, t2, t)?))
            }
            ExposureFamily::Inid(placed) => {
                if placed.len() != n {
                    return Err(NoiseError::CountMismatch { expected: n, got: placed.len() });
                }
                noise::pta_model(placed, t)
            }
        }
    }

    pub fn physical_probability(&self, t: f64) -> Result<f64, NoiseError> {
        noise::mean_physical_probability(self.entries(), t)
    }

    /// Exposure bracket spanning mean physical probabilities `p_lo..p_hi`.
    pub fn bracket_for(&self, p_lo: f64, p_hi: f64) -> Result<(f64, f64), NoiseError> {
        Ok((noise::exposure_for_probability(self.entries(), p_lo)?, noise::exposure_for_probability(self.entries(), p_hi)?))
    }
}

/// Pseudo-threshold of one layout under an exposure-time family. Every
/// bisection step reuses `seed`, so neighbouring probes share random numbers.
pub fn pseudo_threshold(
    layout: &CodeLayout,
    decoder: DecoderConfig,
    family: &ExposureFamily,
    opts: &BisectionOptions,
    shots: u64,
    seed: u64,
) -> Result<PseudoThresholdResult, ExperimentError> {
    bisect_pseudo_threshold(opts, |t| {
        let model = family.model(layout.n(), t)?;
        let p = family.physical_probability(t)?;
        let estimate = logical_error_rate(layout, decoder, &model, shots, seed)?;
        log::debug!("t={t:.4} p={p:.5} P_L={:.5}", estimate.p_logical);
        Ok((p, estimate))
    })
}

/// Inverse-variance weighted mean and its standard error.
pub fn weighted_average(values: &[(f64, f64)]) -> (f64, f64) {
    let weights: Vec<f64> = values.iter().map(|&(_, se)| 1.0 / (se * se)).collect();
    let total: f64 = weights.iter().sum();
    let mean = values.iter().zip(&weights).map(|(&(v, _), w)| v * w).sum::<f64>() / total;
    (mean, total.sqrt().recip())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    /// Inverse-variance weighted pseudo-threshold across arrangements.
    pub p_pth: f64,
    pub std_error: f64,
    /// Sample standard deviation of the per-arrangement values.
    pub spread: f64,
    pub arrangements: usize,
    pub successes: usize,
    /// Indices of the arrangements in `per_arrangement`.
    pub succeeded: Vec<usize>,
    pub per_arrangement: Vec<PseudoThresholdResult>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampaignOptions {
    pub arrangements: usize,
    pub bisection: BisectionOptions,
    pub shots: u64,
    pub seed: u64,
    pub ordering: ExtremeOrdering,
}

/// Seed used to place the calibration entries for arrangement `index`.
pub fn arrangement_seed(master: u64, index: usize) -> u64 {
    derive_seed(master, 2 * index as u64 + 1)
}

/// Seed of the Monte Carlo shots, shared by every arrangement of a campaign.
pub fn campaign_shot_seed(master: u64) -> u64 {
    derive_seed(master, 0)
}

/// Pseudo-thresholds over many random placements of the extreme qubits.
pub fn inid_campaign(layout: &CodeLayout, decoder: DecoderConfig, entries: &[CalibrationEntry], opts: &CampaignOptions) -> Result<CampaignResult, ExperimentError> {
    if opts.arrangements == 0 {
        return Err(ExperimentError::InvalidInput("at least one arrangement is required".into()));
    }
    let selected = noise::select_extremes(entries, layout.n(), opts.ordering)?;
    let shot_seed = campaign_shot_seed(opts.seed);
    let mut results = Vec::with_capacity(opts.arrangements);
    let mut succeeded = Vec::with_capacity(opts.arrangements);
    for a in 0..opts.arrangements {
        let placed = noise::arrange(&selected, arrangement_seed(opts.seed, a));
        match pseudo_threshold(layout, decoder, &ExposureFamily::Inid(placed), &opts.bisection, opts.shots, shot_seed) {
            Ok(r) => {
                results.push(r);
                succeeded.push(a);
            }
            Err(ExperimentError::Bracket { .. }) => log::warn!("arrangement {a}: no sign change in the bracket"),
            Err(e) => return Err(e),
        }
    }
    if results.is_empty() || 2 * results.len() < opts.arrangements {
        return Err(ExperimentError::TooFewSuccesses { successes: results.len(), arrangements: opts.arrangements });
    }
    // One failure in `shots` bounds the resolution of each estimate.
    let floor = 1.0 / opts.shots as f64;
    let values: Vec<(f64, f64)> = results.iter().map(|r| (r.p_pth, r.std_error.max(floor))).collect();
    let (p_pth, std_error) = weighted_average(&values);
    let n = results.len() as f64;
    let mean = values.iter().map(|v| v.0).sum::<f64>() / n;
    let spread = if results.len() > 1 { (values.iter().map(|v| (v.0 - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt() } else { 0.0 };
    Ok(CampaignResult { p_pth, std_error, spread, arrangements: opts.arrangements, successes: results.len(), succeeded, per_arrangement: results })
}

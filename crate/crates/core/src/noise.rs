//! Pauli noise channels and calibration data.
//!
//! Channels are per-qubit `(p_x, p_y, p_z)` triples. Besides the depolarizing
//! and Z-biased families, amplitude/phase damping with relaxation time `T1` and
//! dephasing time `T2` is mapped to a Pauli channel by twirling, which gives
//! the i.ni.d. models built from processor calibration tables.
//!
//! Times are in microseconds throughout.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::pauli::{Pauli, PauliString};

#[derive(Debug, Error)]
pub enum NoiseError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityOutOfRange(f64),
    #[error("invalid channel ({0}, {1}, {2})")]
    InvalidChannel(f64, f64, f64),
    #[error("bias must be non-negative, got {0}")]
    NegativeBias(f64),
    #[error("times must be positive and finite (t1 = {t1}, t2 = {t2}, t = {t})")]
    InvalidTimes { t1: f64, t2: f64, t: f64 },
    #[error("t2 = {t2} exceeds 2·t1 = {} so p_z would be negative", 2.0 * t1)]
    BiasViolation { t1: f64, t2: f64 },
    #[error("expected {expected} calibration entries, got {got}")]
    CountMismatch { expected: usize, got: usize },
    #[error("calibration row {row}: {msg}")]
    MalformedRow { row: usize, msg: String },
    #[error("reading calibration file: {0}")]
    Io(#[from] std::io::Error),
    #[error("parsing calibration JSON: {0}")]
    Json(#[from] serde_json::Error),
}

/// Rounding slack on the total probability of a channel.
const PROB_EPS: f64 = 1e-12;

/// Single-qubit Pauli channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitChannel {
    pub p_x: f64,
    pub p_y: f64,
    pub p_z: f64,
}

impl QubitChannel {
    pub fn new(p_x: f64, p_y: f64, p_z: f64) -> Result<Self, NoiseError> {
        let valid = |p: f64| p.is_finite() && p >= 0.0;
        if !(valid(p_x) && valid(p_y) && valid(p_z)) || p_x + p_y + p_z > 1.0 + PROB_EPS {
            return Err(NoiseError::InvalidChannel(p_x, p_y, p_z));
        }
        Ok(Self { p_x, p_y, p_z })
    }

    pub const NOISELESS: QubitChannel = QubitChannel { p_x: 0.0, p_y: 0.0, p_z: 0.0 };

    pub fn total(&self) -> f64 {
        self.p_x + self.p_y + self.p_z
    }

    pub fn prob(&self, p: Pauli) -> f64 {
        match p {
            Pauli::I => 1.0 - self.total(),
            Pauli::X => self.p_x,
            Pauli::Y => self.p_y,
            Pauli::Z => self.p_z,
        }
    }

    /// Draws one Pauli from a uniform variate in `[0, 1)`.
    #[inline]
    pub fn pick(&self, u: f64) -> Pauli {
        if u < self.p_x {
            Pauli::X
        } else if u < self.p_x + self.p_y {
            Pauli::Y
        } else if u < self.p_x + self.p_y + self.p_z {
            Pauli::Z
        } else {
            Pauli::I
        }
    }
}

fn check_probability(p: f64) -> Result<(), NoiseError> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(NoiseError::ProbabilityOutOfRange(p))
    }
}

pub fn depolarizing(p: f64) -> Result<QubitChannel, NoiseError> {
    check_probability(p)?;
    Ok(QubitChannel { p_x: p / 3.0, p_y: p / 3.0, p_z: p / 3.0 })
}

/// Z-bias ratio `η = p_z / (p_x + p_y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bias {
    Finite(f64),
    Infinite,
}

impl fmt::Display for Bias {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bias::Finite(eta) => write!(f, "{eta}"),
            Bias::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Bias {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "inf" | "infinity" | "infinite" => Ok(Bias::Infinite),
            other => {
                let eta: f64 = other.parse().map_err(|e| format!("invalid bias {s:?}: {e}"))?;
                if eta.is_infinite() {
                    Ok(Bias::Infinite)
                } else if eta.is_nan() || eta < 0.0 {
                    Err(format!("bias must be non-negative, got {s}"))
                } else {
                    Ok(Bias::Finite(eta))
                }
            }
        }
    }
}

impl Serialize for Bias {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Bias::Finite(eta) => serializer.serialize_f64(*eta),
            Bias::Infinite => serializer.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for Bias {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Num(eta) => Bias::from_str(&eta.to_string()).map_err(serde::de::Error::custom),
            Raw::Text(s) => Bias::from_str(&s).map_err(serde::de::Error::custom),
        }
    }
}

/// Z-biased channel with `p_x = p_y`.
pub fn biased(p: f64, bias: Bias) -> Result<QubitChannel, NoiseError> {
    check_probability(p)?;
    match bias {
        Bias::Infinite => Ok(QubitChannel { p_x: 0.0, p_y: 0.0, p_z: p }),
        Bias::Finite(eta) if eta < 0.0 || eta.is_nan() => Err(NoiseError::NegativeBias(eta)),
        Bias::Finite(eta) => {
            let p_xy = p / (2.0 * (1.0 + eta));
            Ok(QubitChannel { p_x: p_xy, p_y: p_xy, p_z: p - 2.0 * p_xy })
        }
    }
}

/// Pauli-twirled amplitude and phase damping over an exposure time `t`.
pub fn pta_channel(t1: f64, t2: f64, t: f64) -> Result<QubitChannel, NoiseError> {
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(t1) || !positive(t2) || !t.is_finite() || t < 0.0 {
        return Err(NoiseError::InvalidTimes { t1, t2, t });
    }
    if t2 > 2.0 * t1 {
        return Err(NoiseError::BiasViolation { t1, t2 });
    }
    let relax = (-t / t1).exp();
    let dephase = (-t / t2).exp();
    let p_xy = (1.0 - relax) / 4.0;
    // At t2 == 2·t1 the expression is zero up to rounding.
    let p_z = ((1.0 + relax - 2.0 * dephase) / 4.0).max(0.0);
    Ok(QubitChannel { p_x: p_xy, p_y: p_xy, p_z })
}

/// Per-qubit channels for a whole code.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    channels: Vec<QubitChannel>,
}

impl NoiseModel {
    pub fn iid(n: usize, channel: QubitChannel) -> Self {
        Self { channels: vec![channel; n] }
    }

    pub fn from_channels(channels: Vec<QubitChannel>) -> Self {
        Self { channels }
    }

    pub fn n(&self) -> usize {
        self.channels.len()
    }

    pub fn channels(&self) -> &[QubitChannel] {
        &self.channels
    }

    pub fn channel(&self, qubit: usize) -> &QubitChannel {
        &self.channels[qubit]
    }

    pub fn is_iid(&self) -> bool {
        self.channels.windows(2).all(|w| w[0] == w[1])
    }

    /// Mean total error probability across qubits.
    pub fn mean_total(&self) -> f64 {
        if self.channels.is_empty() {
            return 0.0;
        }
        self.channels.iter().map(QubitChannel::total).sum::<f64>() / self.channels.len() as f64
    }

    /// Independent per-qubit draw.
    pub fn sample_error<R: Rng + ?Sized>(&self, rng: &mut R) -> PauliString {
        let paulis: Vec<Pauli> = self.channels.iter().map(|ch| ch.pick(rng.gen::<f64>())).collect();
        PauliString::from_paulis(&paulis)
    }
}

/// Measured relaxation and dephasing times of one qubit, in microseconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationEntry {
    #[serde(rename = "qubit")]
    pub qubit_id: String,
    #[serde(rename = "t1_us")]
    pub t1: f64,
    #[serde(rename = "t2_us")]
    pub t2: f64,
}

impl CalibrationEntry {
    pub fn new(qubit_id: impl Into<String>, t1: f64, t2: f64) -> Self {
        Self { qubit_id: qubit_id.into(), t1, t2 }
    }

    fn validate(&self, row: usize) -> Result<(), NoiseError> {
        for (name, v) in [("t1", self.t1), ("t2", self.t2)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(NoiseError::MalformedRow { row, msg: format!("{name} must be positive, got {v}") });
            }
        }
        Ok(())
    }
}

/// Reads a calibration table: CSV `qubit,t1_us,t2_us` (header optional) or a
/// JSON array of objects with the same keys.
pub fn load_calibration(path: impl AsRef<Path>) -> Result<Vec<CalibrationEntry>, NoiseError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().is_some_and(|e| e.eq_ignore_ascii_case("json")) || text.trim_start().starts_with('[');
    let entries = if is_json { parse_calibration_json(&text)? } else { parse_calibration_csv(&text)? };
    if entries.is_empty() {
        log::warn!("calibration file {} contains no entries", path.display());
    }
    Ok(entries)
}

pub fn parse_calibration_json(text: &str) -> Result<Vec<CalibrationEntry>, NoiseError> {
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let entries: Vec<CalibrationEntry> = serde_json::from_str(text)?;
    for (row, e) in entries.iter().enumerate() {
        e.validate(row + 1)?;
    }
    Ok(entries)
}

pub fn parse_calibration_csv(text: &str) -> Result<Vec<CalibrationEntry>, NoiseError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).comment(Some(b'#')).from_reader(text.as_bytes());
    let mut entries = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let row = idx + 1;
        let record = record.map_err(|e| NoiseError::MalformedRow { row, msg: e.to_string() })?;
        if record.iter().all(str::is_empty) {
            continue;
        }
        if record.len() != 3 {
            return Err(NoiseError::MalformedRow { row, msg: format!("expected 3 fields, got {}", record.len()) });
        }
        if idx == 0 && record[0].eq_ignore_ascii_case("qubit") {
            continue;
        }
        let time = |k: usize| {
            record[k].parse::<f64>().map_err(|e| NoiseError::MalformedRow { row, msg: format!("{:?}: {e}", &record[k]) })
        };
        let entry = CalibrationEntry::new(&record[0], time(1)?, time(2)?);
        entry.validate(row)?;
        entries.push(entry);
    }
    Ok(entries)
}

/// Key used to rank qubits when picking the extremes of a calibration set.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExtremeOrdering {
    #[default]
    T1,
    T2,
}

/// Picks the `⌈k/2⌉` longest-lived and `⌊k/2⌋` shortest-lived qubits.
pub fn select_extremes(entries: &[CalibrationEntry], k: usize, ordering: ExtremeOrdering) -> Result<Vec<CalibrationEntry>, NoiseError> {
    if entries.len() < k {
        return Err(NoiseError::CountMismatch { expected: k, got: entries.len() });
    }
    let key = |e: &CalibrationEntry| match ordering {
        ExtremeOrdering::T1 => e.t1,
        ExtremeOrdering::T2 => e.t2,
    };
    let mut order: Vec<usize> = (0..entries.len()).collect();
    // Stable, so equal times keep file order.
    order.sort_by(|&a, &b| key(&entries[b]).total_cmp(&key(&entries[a])));
    let longest = k.div_ceil(2);
    let shortest = k / 2;
    let mut picked: Vec<usize> = order[..longest].to_vec();
    picked.extend(order[order.len() - shortest..].iter().rev());
    Ok(picked.into_iter().map(|i| entries[i].clone()).collect())
}

/// Seeded placement of calibration entries onto data qubits.
pub fn arrange(selected: &[CalibrationEntry], arrangement_seed: u64) -> Vec<CalibrationEntry> {
    let mut placed = selected.to_vec();
    placed.shuffle(&mut ChaCha8Rng::seed_from_u64(arrangement_seed));
    placed
}

/// Per-qubit twirled channels for entries already placed on the lattice.
pub fn pta_model(placed: &[CalibrationEntry], t: f64) -> Result<NoiseModel, NoiseError> {
    placed.iter().map(|e| pta_channel(e.t1, e.t2, t)).collect::<Result<Vec<_>, _>>().map(NoiseModel::from_channels)
}

/// i.ni.d. model: a seeded arrangement of `selected` over `n` data qubits.
pub fn inid_model(selected: &[CalibrationEntry], n: usize, t: f64, arrangement_seed: u64) -> Result<NoiseModel, NoiseError> {
    if selected.len() != n {
        return Err(NoiseError::CountMismatch { expected: n, got: selected.len() });
    }
    pta_model(&arrange(selected, arrangement_seed), t)
}

/// Mean `T1` and `T2` of a set of entries.
pub fn mean_times(entries: &[CalibrationEntry]) -> (f64, f64) {
    let n = entries.len() as f64;
    let t1 = entries.iter().map(|e| e.t1).sum::<f64>() / n;
    let t2 = entries.iter().map(|e| e.t2).sum::<f64>() / n;
    (t1, t2)
}

/// Total error probability of the twirled channel at the mean `T1`/`T2`.
pub fn mean_physical_probability(entries: &[CalibrationEntry], t: f64) -> Result<f64, NoiseError> {
    if entries.is_empty() {
        return Err(NoiseError::CountMismatch { expected: 1, got: 0 });
    }
    let (t1, t2) = mean_times(entries);
    Ok(pta_channel(t1, t2, t)?.total())
}

/// Exposure time at which [`mean_physical_probability`] reaches `p`.
///
/// The total probability is increasing in `t` and saturates below 3/4, so
/// targets at or above the saturation value are rejected.
pub fn exposure_for_probability(entries: &[CalibrationEntry], p: f64) -> Result<f64, NoiseError> {
    check_probability(p)?;
    let (t1, t2) = mean_times(entries);
    let total = |t: f64| pta_channel(t1, t2, t).map(|c| c.total());
    if p == 0.0 {
        return Ok(0.0);
    }
    let mut hi = t1.min(t2);
    let mut steps = 0;
    while total(hi)? < p {
        hi *= 2.0;
        steps += 1;
        if steps > 200 {
            return Err(NoiseError::ProbabilityOutOfRange(p));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid)? < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

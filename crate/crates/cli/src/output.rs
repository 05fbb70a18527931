//! Result rows and their CSV / JSON encodings.

use recmwpm::experiment::{CampaignResult, PseudoThresholdResult, RateEstimate, ThresholdResult};
use serde::{Deserialize, Serialize};

use crate::config::{ExperimentConfig, Format};
use crate::CliError;

pub const CSV_HEADER: &str = "distance,flavor,decoder,noise,p,eta,t,shots,failures,p_logical,std_error,seed";

/// One row of a result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub distance: usize,
    pub flavor: String,
    pub decoder: String,
    pub noise: String,
    pub p: f64,
    /// Bias as written on the command line (`inf` for pure Z noise).
    pub eta: Option<String>,
    /// Exposure time in microseconds, for calibration-based noise.
    pub t: Option<f64>,
    pub shots: u64,
    pub failures: u64,
    pub p_logical: f64,
    pub std_error: f64,
    pub seed: u64,
}

impl ResultRecord {
    pub fn new(config: &ExperimentConfig, distance: usize, p: f64, t: Option<f64>, estimate: &RateEstimate, seed: u64) -> Self {
        Self {
            distance,
            flavor: config.flavor.to_string(),
            decoder: config.decoder_config().name().to_string(),
            noise: config.noise.name().to_string(),
            p,
            eta: config.eta.map(|e| e.to_string()),
            t,
            shots: estimate.shots,
            failures: estimate.failures,
            p_logical: estimate.p_logical,
            std_error: estimate.std_error,
            seed,
        }
    }
}

/// Encodes records as CSV with [`CSV_HEADER`] or as a JSON array.
pub fn emit(records: &[ResultRecord], format: Format) -> Vec<u8> {
    match format {
        Format::Csv => {
            let mut out = Vec::new();
            out.extend_from_slice(CSV_HEADER.as_bytes());
            out.push(b'\n');
            let mut writer = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            for r in records {
                writer.serialize(r).expect("records serialise to CSV");
            }
            writer.into_inner().expect("in-memory writer")
        }
        Format::Json => {
            let mut out = serde_json::to_vec_pretty(records).expect("records serialise to JSON");
            out.push(b'\n');
            out
        }
    }
}

/// Inverse of [`emit`].
pub fn parse(bytes: &[u8], format: Format) -> Result<Vec<ResultRecord>, CliError> {
    match format {
        Format::Csv => {
            let mut reader = csv::Reader::from_reader(bytes);
            let header: Vec<String> = reader.headers().map_err(|e| CliError::Io(e.to_string()))?.iter().map(str::to_string).collect();
            if header.join(",") != CSV_HEADER {
                return Err(CliError::Io(format!("unexpected CSV header {header:?}")));
            }
            reader.deserialize().collect::<Result<_, _>>().map_err(|e| CliError::Io(e.to_string()))
        }
        Format::Json => serde_json::from_slice(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Everything known about a run beyond the table rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub version: String,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
    pub records: Vec<ResultRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<ThresholdResult>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub pseudo_thresholds: Vec<(usize, PseudoThresholdResult)>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub campaigns: Vec<(usize, CampaignResult)>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn record(i: u64) -> ResultRecord {
        ResultRecord {
            distance: 5,
            flavor: "xz".into(),
            decoder: "recmwpm".into(),
            noise: "biased".into(),
            p: 0.1 + i as f64 / 3.0,
            eta: Some(if i % 2 == 0 { "inf".into() } else { "3".into() }),
            t: if i % 2 == 0 { None } else { Some(12.5) },
            shots: 1000,
            failures: 17 + i,
            p_logical: (17 + i) as f64 / 1000.0,
            std_error: 0.1f64.sqrt() / 7.0,
            seed: u64::MAX - i,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        assert_eq!(emit(&[], Format::Csv), format!("{CSV_HEADER}\n").into_bytes());
        assert_eq!(parse(&emit(&[], Format::Csv), Format::Csv).unwrap(), vec![]);
    }

    #[test]
    fn one_record_is_two_lines() {
        let text = String::from_utf8(emit(&[record(1)], Format::Csv)).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[1].starts_with("5,xz,recmwpm,biased,"));
    }

    #[test]
    fn both_formats_round_trip() {
        let records: Vec<ResultRecord> = (0..4).map(record).collect();
        for format in [Format::Csv, Format::Json] {
            assert_eq!(parse(&emit(&records, format), format).unwrap(), records);
        }
    }

    #[test]
    fn json_keys_match_the_csv_header() {
        let value: serde_json::Value = serde_json::from_slice(&emit(&[record(0)], Format::Json)).unwrap();
        let keys: Vec<&str> = value[0].as_object().unwrap().keys().map(String::as_str).collect();
        let mut expected: Vec<&str> = CSV_HEADER.split(',').collect();
        let mut got = keys.clone();
        expected.sort_unstable();
        got.sort_unstable();
        assert_eq!(got, expected);
    }
}

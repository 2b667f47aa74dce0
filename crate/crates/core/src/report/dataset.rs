use serde::Serialize;
use thiserror::Error;

use super::{Parameters, SessionQualityReport, SCHEMA_VERSION};
use crate::num::{ser_opt_sig6, ser_sig6};

/// Metrics summarized across sessions, in report order.
pub const DATASET_METRICS: [&str; 10] = [
    "loss_ratio_total",
    "loss_ratio_blink",
    "loss_ratio_unknown",
    "blink_ratio",
    "mean_validation_avg_error_deg",
    "worst_validation_max_error_deg",
    "word_skip_rate",
    "background_dwell_ratio",
    "multi_line_jump_ratio",
    "reading_speed_wpm",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DatasetError {
    #[error("no session reports to aggregate")]
    EmptyInput,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionEntry {
    pub session_id: String,
    pub digest: String,
    pub num_trials: usize,
    pub num_warnings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionValue {
    pub session_id: String,
    #[serde(serialize_with = "ser_sig6")]
    pub value: f64,
}

/// Distribution of one metric over the sessions that have it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: String,
    pub n: usize,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub mean: Option<f64>,
    /// Sample standard deviation; absent below two sessions.
    #[serde(serialize_with = "ser_opt_sig6")]
    pub sd: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub median: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub min: Option<f64>,
    #[serde(serialize_with = "ser_opt_sig6")]
    pub max: Option<f64>,
    pub values: Vec<SessionValue>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DatasetQualityReport {
    pub schema_version: &'static str,
    pub num_sessions: usize,
    pub sessions: Vec<SessionEntry>,
    pub metrics: Vec<MetricSummary>,
    pub warnings: Vec<String>,
    pub parameters: Option<Parameters>,
}

#[derive(Debug, Clone, PartialEq)]
struct SessionRow {
    entry: SessionEntry,
    values: [Option<f64>; DATASET_METRICS.len()],
    parameters: Parameters,
}

/// Per-session rows that can be merged in any order; [`finish`](Self::finish)
/// sorts by session id before summarizing, so the result does not depend on it.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetAccumulator {
    rows: Vec<SessionRow>,
    warnings: Vec<String>,
}

impl DatasetAccumulator {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, report: &SessionQualityReport) {
        self.rows.push(SessionRow {
            entry: SessionEntry {
                session_id: report.source.path.clone(),
                digest: report.source.digest.clone(),
                num_trials: report.trials.len(),
                num_warnings: report.warning_count(),
            },
            values: session_values(report),
            parameters: report.parameters.clone(),
        });
    }

    /// Records a dataset-level warning, e.g. a session that failed to parse.
    pub fn warn(&mut self, warning: impl Into<String>) {
        self.warnings.push(warning.into());
    }

    pub fn merge(mut self, other: DatasetAccumulator) -> Self {
        self.rows.extend(other.rows);
        self.warnings.extend(other.warnings);
        self
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn finish(mut self) -> Result<DatasetQualityReport, DatasetError> {
        if self.rows.is_empty() {
            return Err(DatasetError::EmptyInput);
        }
        self.rows.sort_by(|a, b| {
            (&a.entry.session_id, &a.entry.digest).cmp(&(&b.entry.session_id, &b.entry.digest))
        });
        self.warnings.sort();
        let parameters = self.rows[0].parameters.clone();
        if self.rows.iter().any(|r| r.parameters != parameters) {
            self.warnings
                .push("sessions were reported with differing parameters".to_string());
        }
        let metrics = DATASET_METRICS
            .iter()
            .enumerate()
            .map(|(i, name)| {
                let values = self
                    .rows
                    .iter()
                    .filter_map(|r| {
                        r.values[i].map(|value| SessionValue {
                            session_id: r.entry.session_id.clone(),
                            value,
                        })
                    })
                    .collect();
                summarize(name, values)
            })
            .collect();
        Ok(DatasetQualityReport {
            schema_version: SCHEMA_VERSION,
            num_sessions: self.rows.len(),
            sessions: self.rows.into_iter().map(|r| r.entry).collect(),
            metrics,
            warnings: self.warnings,
            parameters: Some(parameters),
        })
    }
}

/// Summarizes metric distributions over session reports.
pub fn aggregate_dataset(reports: &[SessionQualityReport]) -> Result<DatasetQualityReport, DatasetError> {
    let mut acc = DatasetAccumulator::new();
    for r in reports {
        acc.add(r);
    }
    acc.finish()
}

fn mean(values: impl IntoIterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.into_iter().fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// One value per metric for a session: trial metrics are averaged over trials
/// (and eyes), validation metrics come from the combined summary.
fn session_values(report: &SessionQualityReport) -> [Option<f64>; DATASET_METRICS.len()] {
    let losses = || report.trials.iter().flat_map(|t| t.data_loss.iter().flatten());
    let stim = || report.trials.iter().filter_map(|t| t.stimulus_metrics.as_ref());
    [
        mean(losses().map(|d| d.loss_ratio_total)),
        mean(losses().map(|d| d.loss_ratio_blink)),
        mean(losses().map(|d| d.loss_ratio_unknown)),
        mean(losses().map(|d| d.blink_ratio)),
        report.calibration.combined.mean_avg_error_deg,
        report.calibration.combined.worst_max_error_deg,
        mean(stim().map(|s| s.word_skip_rate)),
        mean(stim().map(|s| s.background_dwell_ratio)),
        mean(stim().filter_map(|s| s.multi_line_jump_ratio)),
        mean(stim().map(|s| s.reading_speed_wpm)),
    ]
}

fn summarize(metric: &str, values: Vec<SessionValue>) -> MetricSummary {
    let xs: Vec<f64> = values.iter().map(|v| v.value).collect();
    let n = xs.len();
    let m = mean(xs.iter().copied());
    let sd = match (m, n) {
        (Some(m), n) if n >= 2 => {
            Some((xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1) as f64).sqrt())
        }
        _ => None,
    };
    let mut sorted = xs.clone();
    sorted.sort_by(f64::total_cmp);
    let median = match n {
        0 => None,
        n if n % 2 == 1 => Some(sorted[n / 2]),
        n => Some((sorted[n / 2 - 1] + sorted[n / 2]) / 2.0),
    };
    MetricSummary {
        metric: metric.to_string(),
        n,
        mean: m,
        sd,
        median,
        min: sorted.first().copied(),
        max: sorted.last().copied(),
        values,
    }
}

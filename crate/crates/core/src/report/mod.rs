//! Session and dataset reports and their serialization.
//!
//! JSON output is pretty-printed with a fixed key order; derived ratios carry six
//! significant digits, absent values are `null`. Markdown is a readable rendering of
//! the same content.

mod dataset;
mod markdown;
mod session;

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

use crate::asc::TrialMarkers;
use crate::detection::IdtParams;
use crate::stimulus::StimulusBinding;

pub use dataset::{
    aggregate_dataset, DatasetAccumulator, DatasetError, DatasetQualityReport, MetricSummary,
    SessionEntry, SessionValue, DATASET_METRICS,
};
pub use session::{
    build_session_report, session_report_from_bytes, SessionQualityReport, Source,
    TrialQualityReport,
};

pub const SCHEMA_VERSION: &str = "1.0";

/// Everything a report depends on besides the recording itself.
#[derive(Debug, Clone, Default)]
pub struct ReportConfig {
    pub markers: TrialMarkers,
    pub idt: IdtParams,
    pub stimulus: StimulusBinding,
    /// Echoed in the report when the binding came from a stimulus map.
    pub stimulus_map_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AoiSource {
    pub trial_id: Option<String>,
    pub stimulus_id: String,
    pub path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FallbackParameters {
    pub algorithm: &'static str,
    pub dispersion_threshold_px: f64,
    pub min_duration_ms: f64,
}

/// The configuration a report was computed with.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Parameters {
    pub trial_start_marker: String,
    pub trial_end_marker: String,
    pub valid_sample_rule: &'static str,
    pub blink_source: &'static str,
    pub fixation_fallback: FallbackParameters,
    pub stimulus_map: Option<String>,
    pub aoi_layouts: Vec<AoiSource>,
}

impl Parameters {
    pub fn from_config(config: &ReportConfig) -> Self {
        let aoi_layouts = match &config.stimulus {
            StimulusBinding::None => Vec::new(),
            StimulusBinding::Single(b) => vec![AoiSource {
                trial_id: None,
                stimulus_id: b.layout.stimulus_id.clone(),
                path: b.path.clone(),
            }],
            StimulusBinding::PerTrial(map) => map
                .iter()
                .map(|(trial, b)| AoiSource {
                    trial_id: Some(trial.clone()),
                    stimulus_id: b.layout.stimulus_id.clone(),
                    path: b.path.clone(),
                })
                .collect(),
        };
        Parameters {
            trial_start_marker: config.markers.start.clone(),
            trial_end_marker: config.markers.end.clone(),
            valid_sample_rule: "x and y of the eye are both numeric",
            blink_source: "manufacturer EBLINK events",
            fixation_fallback: FallbackParameters {
                algorithm: "I-DT",
                dispersion_threshold_px: config.idt.dispersion_threshold_px,
                min_duration_ms: config.idt.min_duration_ms,
            },
            stimulus_map: config.stimulus_map_path.clone(),
            aoi_layouts,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Json,
    Markdown,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown format {0:?} (expected json or markdown)")]
pub struct UnknownFormat(pub String);

impl FromStr for Format {
    type Err = UnknownFormat;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "markdown" | "md" => Ok(Format::Markdown),
            _ => Err(UnknownFormat(s.to_string())),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Json => "json",
            Format::Markdown => "markdown",
        })
    }
}

/// A report that can be written out.
pub trait Report: Serialize {
    fn to_markdown(&self) -> String;
}

impl Report for SessionQualityReport {
    fn to_markdown(&self) -> String {
        markdown::session(self)
    }
}

impl Report for DatasetQualityReport {
    fn to_markdown(&self) -> String {
        markdown::dataset(self)
    }
}

/// Serializes a report. The output depends only on the report value.
pub fn serialize_report<R: Report>(report: &R, format: Format) -> String {
    match format {
        Format::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        Format::Markdown => report.to_markdown(),
    }
}

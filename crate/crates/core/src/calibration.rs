//! Calibration and validation attempts and their per-session summary.
//!
//! Scores are reported, never judged: there is no pass/fail threshold here.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::asc::{parse_calibration_message, parse_validation_message, Eye, EyeLayout, Recording};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationRecord {
    pub time_ms: f64,
    pub model: String,
    #[serde(skip)]
    pub eyes: EyeLayout,
    pub eye: Eye,
    pub num_points: Option<u32>,
    /// Trailing result token, when the tracker wrote one (e.g. `GOOD`).
    #[serde(skip)]
    pub result: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationRecord {
    pub time_ms: f64,
    pub model: String,
    #[serde(skip)]
    pub eyes: EyeLayout,
    pub eye: Eye,
    pub error_label: String,
    pub avg_error_deg: Option<f64>,
    pub max_error_deg: Option<f64>,
    pub offset_deg: Option<f64>,
    pub offset_pix: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown calibration model {0:?}")]
pub struct UnknownModel(pub String);

/// Number of targets in a calibration model.
pub fn count_points(model: &str) -> Result<u32, UnknownModel> {
    match model {
        "H3" | "HV3" => Ok(3),
        "HV5" => Ok(5),
        "HV9" => Ok(9),
        "HV13" => Ok(13),
        other => Err(UnknownModel(other.to_string())),
    }
}

/// Score statistics over a set of validations.
#[derive(Debug, Clone, PartialEq, Serialize, Default)]
pub struct ValidationStats {
    pub num_validations: usize,
    /// Validations that carried numeric scores.
    pub num_scored: usize,
    #[serde(serialize_with = "crate::num::ser_opt_sig6")]
    pub mean_avg_error_deg: Option<f64>,
    pub worst_max_error_deg: Option<f64>,
    pub label_histogram: BTreeMap<String, usize>,
}

impl ValidationStats {
    fn from_records<'a>(records: impl Iterator<Item = &'a ValidationRecord>) -> Self {
        let mut stats = ValidationStats::default();
        let mut avg_sum = 0.0;
        let mut avg_n = 0usize;
        for v in records {
            stats.num_validations += 1;
            *stats.label_histogram.entry(v.error_label.clone()).or_default() += 1;
            if v.avg_error_deg.is_some() || v.max_error_deg.is_some() {
                stats.num_scored += 1;
            }
            if let Some(avg) = v.avg_error_deg {
                avg_sum += avg;
                avg_n += 1;
            }
            if let Some(max) = v.max_error_deg {
                stats.worst_max_error_deg =
                    Some(stats.worst_max_error_deg.map_or(max, |w: f64| w.max(max)));
            }
        }
        if avg_n > 0 {
            stats.mean_avg_error_deg = Some(avg_sum / avg_n as f64);
        }
        stats
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EyeValidationStats {
    pub eye: Eye,
    #[serde(flatten)]
    pub stats: ValidationStats,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CalibrationSummary {
    pub num_calibrations: usize,
    pub num_validations: usize,
    pub calibration_timestamps: Vec<f64>,
    pub validation_timestamps: Vec<f64>,
    /// Distinct calibration models, in order of first use.
    pub calibration_models: Vec<String>,
    /// Target count per distinct model; absent for unknown models.
    pub num_calibration_points: Vec<Option<u32>>,
    pub tracked_eye: Option<TrackedEye>,
    pub per_eye: Vec<EyeValidationStats>,
    /// Worst case over all eyes.
    pub combined: ValidationStats,
    pub calibrations: Vec<CalibrationRecord>,
    pub validations: Vec<ValidationRecord>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TrackedEye {
    Left,
    Right,
    Binocular,
}

impl TrackedEye {
    pub fn from_layout(layout: EyeLayout) -> Option<TrackedEye> {
        match (layout.left, layout.right) {
            (true, true) => Some(TrackedEye::Binocular),
            (true, false) => Some(TrackedEye::Left),
            (false, true) => Some(TrackedEye::Right),
            (false, false) => None,
        }
    }
}

/// Calibration and validation records in a recording, plus a warning per
/// malformed `!CAL` message.
pub fn extract_records(
    rec: &Recording,
) -> (Vec<CalibrationRecord>, Vec<ValidationRecord>, Vec<String>) {
    let mut cals = Vec::new();
    let mut vals = Vec::new();
    let mut warnings = Vec::new();
    for m in &rec.messages {
        match parse_calibration_message(m) {
            Ok(Some(c)) => {
                cals.push(c);
                continue;
            }
            Ok(None) => {}
            Err(e) => {
                warnings.push(e.to_string());
                continue;
            }
        }
        match parse_validation_message(m) {
            Ok(Some(v)) => vals.push(v),
            Ok(None) => {}
            Err(e) => warnings.push(e.to_string()),
        }
    }
    (cals, vals, warnings)
}

/// Summarizes calibration and validation attempts. Input order does not matter:
/// records are sorted by time before anything is emitted.
pub fn summarize_calibration(
    calibrations: &[CalibrationRecord],
    validations: &[ValidationRecord],
    tracked_eye: Option<TrackedEye>,
) -> CalibrationSummary {
    let mut cals = calibrations.to_vec();
    cals.sort_by(|a, b| {
        a.time_ms
            .total_cmp(&b.time_ms)
            .then(a.eye.cmp(&b.eye))
            .then(a.model.cmp(&b.model))
    });
    let mut vals = validations.to_vec();
    let opt = |v: Option<f64>| v.unwrap_or(f64::NEG_INFINITY);
    vals.sort_by(|a, b| {
        a.time_ms
            .total_cmp(&b.time_ms)
            .then(a.eye.cmp(&b.eye))
            .then(a.error_label.cmp(&b.error_label))
            .then(a.model.cmp(&b.model))
            .then(opt(a.avg_error_deg).total_cmp(&opt(b.avg_error_deg)))
            .then(opt(a.max_error_deg).total_cmp(&opt(b.max_error_deg)))
            .then(opt(a.offset_deg).total_cmp(&opt(b.offset_deg)))
    });

    let mut warnings = Vec::new();
    let mut models: Vec<String> = Vec::new();
    for c in &cals {
        if !models.contains(&c.model) {
            models.push(c.model.clone());
            if c.num_points.is_none() {
                warnings.push(UnknownModel(c.model.clone()).to_string());
            }
        }
    }
    if vals.is_empty() {
        warnings.push("no validation performed".to_string());
    }

    let per_eye = [Eye::Left, Eye::Right]
        .into_iter()
        .filter(|&eye| vals.iter().any(|v| v.eye == eye))
        .map(|eye| EyeValidationStats {
            eye,
            stats: ValidationStats::from_records(vals.iter().filter(|v| v.eye == eye)),
        })
        .collect();

    CalibrationSummary {
        num_calibrations: cals.len(),
        num_validations: vals.len(),
        calibration_timestamps: cals.iter().map(|c| c.time_ms).collect(),
        validation_timestamps: vals.iter().map(|v| v.time_ms).collect(),
        num_calibration_points: models.iter().map(|m| count_points(m).ok()).collect(),
        calibration_models: models,
        tracked_eye,
        per_eye,
        combined: ValidationStats::from_records(vals.iter()),
        calibrations: cals,
        validations: vals,
        warnings,
    }
}

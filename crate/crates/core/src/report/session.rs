use serde::Serialize;
use sha2::{Digest, Sha256};

use super::{Parameters, ReportConfig, SCHEMA_VERSION};
use crate::asc::{
    parse_asc_with_fallback, segment_trials, AscError, Eye, EyeEvent, Recording, Stage, TrialWindow,
};
use crate::calibration::{extract_records, summarize_calibration, CalibrationSummary};
use crate::data_loss::{compute_data_loss, DataLossError, DataLossReport};
use crate::detection::detect_fixations_idt;
use crate::metadata::{extract_metadata, SessionMetadata};
use crate::stimulus::{compute_stimulus_metrics, StimulusBinding, StimulusMetricsReport};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Source {
    pub path: String,
    /// `sha256:<hex>` of the exact input bytes.
    pub digest: String,
}

impl Source {
    pub fn from_bytes(path: impl Into<String>, bytes: &[u8]) -> Self {
        Source {
            path: path.into(),
            digest: format!("sha256:{}", hex::encode(Sha256::digest(bytes))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialQualityReport {
    pub trial_id: String,
    pub window: TrialWindow,
    /// One entry per tracked eye; absent when the sampling rate is unknown.
    pub data_loss: Option<Vec<DataLossReport>>,
    pub stimulus_metrics: Option<StimulusMetricsReport>,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionQualityReport {
    pub schema_version: &'static str,
    pub source: Source,
    pub metadata: SessionMetadata,
    pub calibration: CalibrationSummary,
    pub trials: Vec<TrialQualityReport>,
    pub warnings: Vec<String>,
    pub parameters: Parameters,
}

impl SessionQualityReport {
    /// Count of every warning in the report: session, trial and metadata completeness.
    pub fn warning_count(&self) -> usize {
        self.warnings.len()
            + self.metadata.missing.len()
            + self.trials.iter().map(|t| t.warnings.len()).sum::<usize>()
    }
}

/// Parses `bytes` (with the no-START fallback) and builds the session report.
pub fn session_report_from_bytes(
    path: &str,
    bytes: &[u8],
    config: &ReportConfig,
) -> Result<SessionQualityReport, AscError> {
    let text = String::from_utf8_lossy(bytes);
    let rec = parse_asc_with_fallback(&text)?;
    Ok(build_session_report(&rec, Source::from_bytes(path, bytes), config))
}

/// Assembles every report block for one parsed recording.
///
/// Manufacturer fixations are used whenever a trial has them; otherwise fixations
/// are detected from the trial's samples with the configured I-DT parameters and
/// the stimulus metrics are tagged as fallback. Metric failures become warnings.
pub fn build_session_report(rec: &Recording, source: Source, config: &ReportConfig) -> SessionQualityReport {
    let mut warnings: Vec<String> = rec.warnings.iter().map(|w| w.to_string()).collect();

    let segmentation = segment_trials(rec, &config.markers);
    warnings.extend(segmentation.warnings);

    let metadata = extract_metadata(rec);
    let (cals, vals, cal_warnings) = extract_records(rec);
    warnings.extend(cal_warnings);
    let calibration = summarize_calibration(&cals, &vals, metadata.tracked_eye);
    warnings.extend(calibration.warnings.iter().cloned());

    let eyes: Vec<Eye> = rec.tracked_eyes().eyes().collect();
    if eyes.is_empty() {
        warnings.push("tracked eye unknown; data loss and stimulus metrics not computed".into());
    }
    if config.stimulus.is_none() {
        warnings.push("no AOI layout bound; stimulus metrics not computed".into());
    }

    let mut rate_unknown = false;
    let trials: Vec<TrialQualityReport> = segmentation
        .trials
        .into_iter()
        .map(|window| {
            let (trial, no_rate) = build_trial(rec, window, &eyes, config);
            rate_unknown |= no_rate;
            trial
        })
        .collect();
    if rate_unknown {
        warnings.push("sampling rate unknown; data loss not computed".into());
    }

    SessionQualityReport {
        schema_version: SCHEMA_VERSION,
        source,
        metadata,
        calibration,
        trials,
        warnings,
        parameters: Parameters::from_config(config),
    }
}

fn build_trial(
    rec: &Recording,
    window: TrialWindow,
    eyes: &[Eye],
    config: &ReportConfig,
) -> (TrialQualityReport, bool) {
    let mut warnings = Vec::new();
    let samples = rec.samples_between(window.start_ms, window.end_ms, window.end_exclusive);

    let mut rate_unknown = false;
    let data_loss = if eyes.is_empty() {
        None
    } else {
        let rate = rec.sampling_rate_at(window.start_ms).unwrap_or(0.0);
        let reports: Result<Vec<_>, _> = eyes
            .iter()
            .map(|&eye| compute_data_loss(samples, &rec.events, &window, rate, eye))
            .collect();
        match reports {
            Ok(reports) => {
                for r in &reports {
                    warnings.extend(r.warnings.iter().cloned());
                }
                Some(reports)
            }
            Err(DataLossError::ZeroRate) => {
                rate_unknown = true;
                let repeated = samples
                    .windows(2)
                    .filter(|w| w[0].time_ms == w[1].time_ms && window.contains(w[1].time_ms))
                    .count();
                if repeated > 0 {
                    warnings.push(format!("duplicate samples: {repeated} repeated timestamps"));
                }
                None
            }
            Err(e) => {
                warnings.push(format!("data loss not computed: {e}"));
                None
            }
        }
    };

    let stimulus_metrics = match config.stimulus.layout_for(&window.trial_id) {
        _ if eyes.is_empty() => None,
        None => {
            if let StimulusBinding::PerTrial(_) = config.stimulus {
                warnings.push(format!("no AOI layout bound for trial {:?}", window.trial_id));
            }
            None
        }
        Some(bound) => {
            let (eye, fixations, stage) = trial_fixations(rec, &window, samples, eyes, config);
            match compute_stimulus_metrics(&fixations, &bound.layout, &window, eye, stage) {
                Ok(m) => {
                    warnings.extend(m.warnings.iter().cloned());
                    Some(m)
                }
                Err(e) => {
                    warnings.push(format!("stimulus metrics not computed: {e}"));
                    None
                }
            }
        }
    };

    let trial = TrialQualityReport {
        trial_id: window.trial_id.clone(),
        window,
        data_loss,
        stimulus_metrics,
        warnings,
    };
    (trial, rate_unknown)
}

/// Fixations for the stimulus metrics: manufacturer fixations of the first tracked
/// eye (right before left) that has any in the window, else I-DT on that eye.
fn trial_fixations(
    rec: &Recording,
    window: &TrialWindow,
    samples: &[crate::asc::GazeSample],
    eyes: &[Eye],
    config: &ReportConfig,
) -> (Eye, Vec<EyeEvent>, Stage) {
    let mut preference: Vec<Eye> = eyes.to_vec();
    preference.sort_by_key(|&e| e != Eye::Right);
    for &eye in &preference {
        let fixations: Vec<EyeEvent> = rec
            .events
            .iter()
            .filter(|e| e.is_fixation() && e.eye == eye && window.contains(e.start_ms))
            .cloned()
            .collect();
        if !fixations.is_empty() {
            return (eye, fixations, Stage::Manufacturer);
        }
    }
    let eye = preference[0];
    (eye, detect_fixations_idt(samples, eye, &config.idt), Stage::Fallback)
}

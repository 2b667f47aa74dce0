//! Session metadata: setup facts a re-user needs to judge a recording.
//!
//! Missing facts are data too. Every field that cannot be filled from the recording
//! is listed in [`SessionMetadata::missing`].

use serde::Serialize;

use crate::asc::Recording;
use crate::calibration::{extract_records, TrackedEye};
use crate::num::parse_finite;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SessionMetadata {
    /// The declared rate, when the session uses a single one.
    pub sampling_rate_hz: Option<f64>,
    /// Every distinct declared rate, in order of declaration.
    pub sampling_rates_hz: Vec<f64>,
    pub mixed_rate: bool,
    pub tracked_eye: Option<TrackedEye>,
    pub sample_filter_level: Option<u8>,
    pub event_filter_level: Option<u8>,
    pub tracking_mode: Option<String>,
    /// Verbatim `** DATE:` header.
    pub recording_datetime: Option<String>,
    pub total_recording_duration_ms: f64,
    pub num_recording_blocks: usize,
    pub tracker_model: Option<String>,
    pub tracker_version: Option<String>,
    pub display_width_px: Option<u32>,
    pub display_height_px: Option<u32>,
    pub calibration_model: Option<String>,
    /// Completeness warnings, one per absent field.
    pub missing: Vec<String>,
}

pub fn extract_metadata(rec: &Recording) -> SessionMetadata {
    let mut rates: Vec<f64> = Vec::new();
    for rate in rec.sample_declarations().filter_map(|d| d.rate_hz) {
        if !rates.contains(&rate) {
            rates.push(rate);
        }
    }
    let sample_decl = rec.sample_declarations().next();
    let event_decl = rec.event_declarations().next();

    let (tracker_model, tracker_version) = tracker_identity(rec);
    let display = rec
        .messages
        .iter()
        .find_map(|m| display_coords(&m.text));
    let (cals, _, _) = extract_records(rec);

    let mut meta = SessionMetadata {
        sampling_rate_hz: if rates.len() == 1 { Some(rates[0]) } else { None },
        mixed_rate: rates.len() > 1,
        sampling_rates_hz: rates,
        tracked_eye: TrackedEye::from_layout(rec.tracked_eyes()),
        sample_filter_level: sample_decl.and_then(|d| d.filter),
        event_filter_level: event_decl.and_then(|d| d.filter),
        tracking_mode: sample_decl
            .or(event_decl)
            .and_then(|d| d.tracking.clone()),
        recording_datetime: rec
            .header_value("DATE")
            .filter(|v| !v.is_empty())
            .map(str::to_string),
        total_recording_duration_ms: rec.blocks.iter().map(|b| b.duration_ms()).sum(),
        num_recording_blocks: rec.blocks.len(),
        tracker_model,
        tracker_version,
        display_width_px: display.map(|d| d.0),
        display_height_px: display.map(|d| d.1),
        calibration_model: cals.first().map(|c| c.model.clone()),
        missing: Vec::new(),
    };

    let checks = [
        ("sampling_rate", meta.sampling_rates_hz.is_empty()),
        ("tracked_eye", meta.tracked_eye.is_none()),
        ("sample_filter_level", meta.sample_filter_level.is_none()),
        ("event_filter_level", meta.event_filter_level.is_none()),
        ("tracking_mode", meta.tracking_mode.is_none()),
        ("recording_datetime", meta.recording_datetime.is_none()),
        ("tracker_model", meta.tracker_model.is_none()),
        ("tracker_version", meta.tracker_version.is_none()),
        ("display_resolution", display.is_none()),
        ("calibration_model", meta.calibration_model.is_none()),
    ];
    meta.missing = checks
        .iter()
        .filter(|(_, absent)| *absent)
        .map(|(name, _)| format!("{name} missing"))
        .collect();
    meta
}

/// `DISPLAY_COORDS <left> <top> <right> <bottom>` with inclusive bounds.
fn display_coords(text: &str) -> Option<(u32, u32)> {
    let mut tokens = text.split_ascii_whitespace();
    if tokens.next() != Some("DISPLAY_COORDS") {
        return None;
    }
    let v: Vec<f64> = tokens.take(4).map(parse_finite).collect::<Option<_>>()?;
    let [left, top, right, bottom] = v[..] else {
        return None;
    };
    let width = (right - left + 1.0).round();
    let height = (bottom - top + 1.0).round();
    (width >= 1.0 && height >= 1.0).then_some((width as u32, height as u32))
}

/// Model and version from `** VERSION: EYELINK II 1` and, when present, the
/// firmware line `** EYELINK II CL v6.12 Feb  1 2018 (EyeLink Portable Duo)`.
fn tracker_identity(rec: &Recording) -> (Option<String>, Option<String>) {
    let mut model = None;
    let mut version = None;
    if let Some(v) = rec.header_value("VERSION").filter(|v| !v.is_empty()) {
        match v.rsplit_once(char::is_whitespace) {
            Some((m, ver)) if ver.chars().next().is_some_and(|c| c.is_ascii_digit()) => {
                model = Some(m.trim().to_string());
                version = Some(ver.to_string());
            }
            _ => model = Some(v.to_string()),
        }
    }
    let firmware_line = rec
        .header
        .iter()
        .find(|h| h.value.is_empty() && h.key.to_ascii_uppercase().starts_with("EYELINK"));
    if let Some(line) = firmware_line {
        let firmware = line.key.split_ascii_whitespace().find(|t| {
            let mut c = t.chars();
            c.next() == Some('v') && c.next().is_some_and(|d| d.is_ascii_digit())
        });
        if let Some(fw) = firmware {
            version = Some(fw.to_string());
        }
        if model.is_none() {
            let paren = line
                .key
                .split_once('(')
                .and_then(|(_, rest)| rest.split_once(')'))
                .map(|(inner, _)| inner.trim().to_string());
            model = paren.or_else(|| {
                line.key
                    .split_once(" v")
                    .map(|(m, _)| m.trim().to_string())
            });
        }
    }
    (model, version)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asc::parse_asc;

    const FULL: &str = "\
** DATE: Wed Mar  2 11:11:11 2022
** VERSION: EYELINK II 1
** EYELINK II CL v6.12 Feb  1 2018 (EyeLink Portable Duo)
MSG 0 DISPLAY_COORDS 0 0 1023 767
MSG 5 !CAL CALIBRATION HV9 L LEFT GOOD
START 10 LEFT SAMPLES EVENTS
SAMPLES GAZE LEFT RATE 1000.00 TRACKING CR FILTER 2
EVENTS GAZE LEFT RATE 1000.00 TRACKING CR FILTER 1
10 1 1 1
END 1010 SAMPLES EVENTS
START 2000 LEFT SAMPLES EVENTS
SAMPLES GAZE LEFT RATE 1000.00 TRACKING CR FILTER 2
END 2500 SAMPLES EVENTS
";

    #[test]
    fn full_metadata() {
        let rec = parse_asc(FULL).unwrap();
        let m = extract_metadata(&rec);
        assert_eq!(m.sampling_rate_hz, Some(1000.0));
        assert!(!m.mixed_rate);
        assert_eq!(m.tracked_eye, Some(TrackedEye::Left));
        assert_eq!(m.sample_filter_level, Some(2));
        assert_eq!(m.event_filter_level, Some(1));
        assert_eq!(m.tracking_mode.as_deref(), Some("CR"));
        assert_eq!(m.recording_datetime.as_deref(), Some("Wed Mar  2 11:11:11 2022"));
        assert_eq!(m.total_recording_duration_ms, 1500.0);
        assert_eq!(m.tracker_model.as_deref(), Some("EYELINK II"));
        assert_eq!(m.tracker_version.as_deref(), Some("v6.12"));
        assert_eq!((m.display_width_px, m.display_height_px), (Some(1024), Some(768)));
        assert_eq!(m.calibration_model.as_deref(), Some("HV9"));
        assert!(m.missing.is_empty(), "{:?}", m.missing);
    }

    #[test]
    fn missing_samples_declaration() {
        let rec = parse_asc("START 0 RIGHT SAMPLES\n0 1 1 1\nEND 10\n").unwrap();
        let m = extract_metadata(&rec);
        assert_eq!(m.sampling_rate_hz, None);
        assert!(m.missing.contains(&"sampling_rate missing".to_string()));
        assert_eq!(m.tracked_eye, Some(TrackedEye::Right));
        assert_eq!(m.total_recording_duration_ms, 10.0);
    }

    #[test]
    fn mixed_rates_are_listed() {
        let text = "START 0 LEFT\nSAMPLES GAZE LEFT RATE 500.00\nEND 10\nSTART 20 LEFT\nSAMPLES GAZE LEFT RATE 1000.00\nEND 30\n";
        let m = extract_metadata(&parse_asc(text).unwrap());
        assert!(m.mixed_rate);
        assert_eq!(m.sampling_rate_hz, None);
        assert_eq!(m.sampling_rates_hz, vec![500.0, 1000.0]);
        assert!(!m.missing.contains(&"sampling_rate missing".to_string()));
    }

    #[test]
    fn display_coords_rule() {
        assert_eq!(display_coords("DISPLAY_COORDS 0 0 1023 767"), Some((1024, 768)));
        assert_eq!(display_coords("DISPLAY_COORDS 0 0 1919.00 1079.00"), Some((1920, 1080)));
        assert_eq!(display_coords("DISPLAY_COORDS 0 0 -5 767"), None);
        assert_eq!(display_coords("DISPLAY_COORDS 0 0"), None);
        assert_eq!(display_coords("TRIALID 1"), None);
    }

    #[test]
    fn deterministic() {
        let rec = parse_asc(FULL).unwrap();
        assert_eq!(extract_metadata(&rec), extract_metadata(&rec.clone()));
    }
}

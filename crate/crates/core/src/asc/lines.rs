//! Grammar for single ASC lines: samples, end-of-event lines and declarations.

use thiserror::Error;

use super::types::*;
use crate::num::parse_finite;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LineError {
    #[error("malformed sample: unparseable timestamp {0:?}")]
    SampleTimestamp(String),
    #[error("malformed sample: expected {expected} fields, found {found}")]
    SampleTooShort { expected: usize, found: usize },
    #[error("malformed {kind} event: {reason}")]
    Event { kind: &'static str, reason: String },
    #[error("malformed {0} declaration")]
    Declaration(&'static str),
}

/// Parses `<t> <x> <y> <pupil> [tail]` (one eye) or the six-value binocular form.
///
/// Coordinates that do not parse as numbers (including the `.` marker) are missing,
/// and a missing x or y drops both. A pupil of `0.0` is missing. Columns past the
/// pupil fields (velocity, resolution, `...` flags) are ignored.
pub fn parse_sample_line(line: &str, layout: EyeLayout) -> Result<GazeSample, LineError> {
    let mut tokens = line.split_ascii_whitespace();
    let ts = tokens.next().unwrap_or("");
    let time_ms = parse_finite(ts).ok_or_else(|| LineError::SampleTimestamp(ts.to_string()))?;

    let expected = 1 + 3 * layout.count();
    let mut found = 1;
    let mut channel = || -> Result<EyeChannel, LineError> {
        let mut field = || {
            let tok = tokens.next().ok_or(LineError::SampleTooShort { expected, found })?;
            found += 1;
            Ok::<_, LineError>(tok)
        };
        let x = field()?;
        let y = field()?;
        let p = field()?;
        let gaze = match (parse_finite(x), parse_finite(y)) {
            (Some(x_px), Some(y_px)) => Some(GazePoint { x_px, y_px }),
            _ => None,
        };
        let pupil = parse_finite(p).filter(|&v| v != 0.0);
        Ok(EyeChannel { gaze, pupil })
    };

    let left = if layout.left { Some(channel()?) } else { None };
    let right = if layout.right { Some(channel()?) } else { None };
    Ok(GazeSample {
        time_ms,
        left,
        right,
        outside_block: false,
    })
}

fn opt_num(tok: &str) -> Option<f64> {
    parse_finite(tok)
}

fn opt_point(x: &str, y: &str) -> Option<GazePoint> {
    match (opt_num(x), opt_num(y)) {
        (Some(x_px), Some(y_px)) => Some(GazePoint { x_px, y_px }),
        _ => None,
    }
}

/// Parses `EFIX`, `ESACC` and `EBLINK` lines into manufacturer events.
pub fn parse_event_line(line: &str) -> Result<EyeEvent, LineError> {
    let tokens: Vec<&str> = line.split_ascii_whitespace().collect();
    let (kind, min_fields) = match tokens.first().copied() {
        Some("EFIX") => ("EFIX", 8),
        Some("ESACC") => ("ESACC", 11),
        Some("EBLINK") => ("EBLINK", 5),
        _ => {
            return Err(LineError::Event {
                kind: "unknown",
                reason: "not an end-of-event line".into(),
            })
        }
    };
    let err = |reason: String| LineError::Event { kind, reason };
    if tokens.len() < min_fields {
        return Err(err(format!(
            "expected {min_fields} fields, found {}",
            tokens.len()
        )));
    }
    let eye = Eye::from_token(tokens[1]).ok_or_else(|| err(format!("bad eye {:?}", tokens[1])))?;
    let start_ms =
        parse_finite(tokens[2]).ok_or_else(|| err(format!("bad start time {:?}", tokens[2])))?;
    let end_ms =
        parse_finite(tokens[3]).ok_or_else(|| err(format!("bad end time {:?}", tokens[3])))?;
    if end_ms < start_ms {
        return Err(err(format!("end {end_ms} before start {start_ms}")));
    }
    let payload = match kind {
        "EFIX" => EventPayload::Fixation {
            position: opt_point(tokens[5], tokens[6]),
            pupil: opt_num(tokens[7]).filter(|&p| p != 0.0),
        },
        "ESACC" => EventPayload::Saccade {
            start: opt_point(tokens[5], tokens[6]),
            end: opt_point(tokens[7], tokens[8]),
            amplitude_deg: opt_num(tokens[9]),
            peak_velocity_deg_s: opt_num(tokens[10]),
        },
        _ => EventPayload::Blink,
    };
    Ok(EyeEvent {
        eye,
        start_ms,
        end_ms,
        payload,
        stage: Stage::Manufacturer,
    })
}

/// Parses `SAMPLES GAZE LEFT RATE 1000.00 TRACKING CR FILTER 2 [flags]` and the
/// analogous `EVENTS` line. Unknown tokens are kept as flags.
pub fn parse_declaration(line: &str) -> Result<Declaration, LineError> {
    let mut tokens = line.split_ascii_whitespace();
    let (kind, name) = match tokens.next() {
        Some("SAMPLES") => (DeclarationKind::Samples, "SAMPLES"),
        Some("EVENTS") => (DeclarationKind::Events, "EVENTS"),
        _ => return Err(LineError::Declaration("unknown")),
    };
    let mut decl = Declaration {
        kind,
        data_type: None,
        eyes: EyeLayout::default(),
        rate_hz: None,
        tracking: None,
        filter: None,
        flags: Vec::new(),
        block: None,
    };
    while let Some(tok) = tokens.next() {
        match tok {
            "GAZE" | "HREF" | "PUPIL" if decl.data_type.is_none() => {
                decl.data_type = Some(tok.to_string())
            }
            "LEFT" => decl.eyes.left = true,
            "RIGHT" => decl.eyes.right = true,
            "RATE" => {
                let rate = tokens
                    .next()
                    .and_then(parse_finite)
                    .ok_or(LineError::Declaration(name))?;
                decl.rate_hz = Some(rate);
            }
            "TRACKING" => {
                let mode = tokens.next().ok_or(LineError::Declaration(name))?;
                decl.tracking = Some(mode.to_string());
            }
            "FILTER" => {
                let level = tokens
                    .next()
                    .and_then(|t| t.parse::<u8>().ok())
                    .ok_or(LineError::Declaration(name))?;
                decl.filter = Some(level);
            }
            other => decl.flags.push(other.to_string()),
        }
    }
    Ok(decl)
}

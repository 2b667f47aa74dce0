//! `!CAL CALIBRATION` / `!CAL VALIDATION` message grammar.

use thiserror::Error;

use super::types::{Eye, EyeLayout, Message};
use crate::calibration::{count_points, CalibrationRecord, ValidationRecord};
use crate::num::{fmt_num, parse_finite};

#[derive(Debug, Clone, PartialEq, Error)]
#[error("malformed {kind} message at {time_ms} ms: {reason}")]
pub struct MalformedCalMessage {
    pub kind: &'static str,
    pub time_ms: f64,
    pub reason: String,
}

fn cal_tokens<'a>(text: &'a str, keyword: &str) -> Option<Vec<&'a str>> {
    let mut tokens = text.split_ascii_whitespace();
    if tokens.next() != Some("!CAL") || tokens.next() != Some(keyword) {
        return None;
    }
    Some(tokens.collect())
}

struct Head<'a> {
    model: &'a str,
    eyes: EyeLayout,
    eye: Eye,
}

fn parse_head<'a>(rest: &[&'a str], err: &dyn Fn(String) -> MalformedCalMessage) -> Result<Head<'a>, MalformedCalMessage> {
    let [model, eyes, eye, ..] = rest else {
        return Err(err(format!("expected <model> <eyes> <eye>, found {} fields", rest.len())));
    };
    let eyes = EyeLayout::from_compact(eyes).ok_or_else(|| err(format!("bad eyes token {eyes:?}")))?;
    let eye = Eye::from_token(eye).ok_or_else(|| err(format!("bad eye token {eye:?}")))?;
    Ok(Head { model, eyes, eye })
}

/// Returns `Ok(None)` for messages that are not calibration results.
pub fn parse_calibration_message(msg: &Message) -> Result<Option<CalibrationRecord>, MalformedCalMessage> {
    let Some(rest) = cal_tokens(&msg.text, "CALIBRATION") else {
        return Ok(None);
    };
    let err = |reason: String| MalformedCalMessage {
        kind: "calibration",
        time_ms: msg.time_ms,
        reason,
    };
    let head = parse_head(&rest, &err)?;
    Ok(Some(CalibrationRecord {
        time_ms: msg.time_ms,
        model: head.model.to_string(),
        eyes: head.eyes,
        eye: head.eye,
        num_points: count_points(head.model).ok(),
        result: rest.get(3).map(|s| s.to_string()),
    }))
}

/// Parses `!CAL VALIDATION <model> <eyes> <eye> <label> [ERROR <avg> avg. <max> max
/// [OFFSET <deg> deg. <x>,<y> pix.]]`. Returns `Ok(None)` for other messages.
pub fn parse_validation_message(msg: &Message) -> Result<Option<ValidationRecord>, MalformedCalMessage> {
    let Some(rest) = cal_tokens(&msg.text, "VALIDATION") else {
        return Ok(None);
    };
    let err = |reason: String| MalformedCalMessage {
        kind: "validation",
        time_ms: msg.time_ms,
        reason,
    };
    let head = parse_head(&rest, &err)?;
    let label = rest
        .get(3)
        .ok_or_else(|| err("missing validation label".into()))?;

    let mut record = ValidationRecord {
        time_ms: msg.time_ms,
        model: head.model.to_string(),
        eyes: head.eyes,
        eye: head.eye,
        error_label: label.to_string(),
        avg_error_deg: None,
        max_error_deg: None,
        offset_deg: None,
        offset_pix: None,
    };

    let mut i = 4;
    let num_at = |i: usize, what: &str| {
        rest.get(i)
            .and_then(|t| parse_finite(t))
            .ok_or_else(|| err(format!("unparseable {what}")))
    };
    let expect = |i: usize, word: &str| {
        if rest.get(i).copied() == Some(word) {
            Ok(())
        } else {
            Err(err(format!("expected {word:?}")))
        }
    };
    while i < rest.len() {
        match rest[i] {
            "ERROR" => {
                record.avg_error_deg = Some(num_at(i + 1, "average error")?);
                expect(i + 2, "avg.")?;
                record.max_error_deg = Some(num_at(i + 3, "maximum error")?);
                expect(i + 4, "max")?;
                i += 5;
            }
            "OFFSET" => {
                record.offset_deg = Some(num_at(i + 1, "offset")?);
                expect(i + 2, "deg.")?;
                let pix = rest
                    .get(i + 3)
                    .and_then(|t| t.split_once(','))
                    .and_then(|(x, y)| Some((parse_finite(x)?, parse_finite(y)?)))
                    .ok_or_else(|| err("unparseable pixel offset".into()))?;
                record.offset_pix = Some(pix);
                expect(i + 4, "pix.")?;
                i += 5;
            }
            other => return Err(err(format!("unexpected token {other:?}"))),
        }
    }
    if let (Some(avg), Some(max)) = (record.avg_error_deg, record.max_error_deg) {
        if max < avg - 1e-9 {
            return Err(err(format!("max error {max} below average {avg}")));
        }
    }
    Ok(Some(record))
}

impl ValidationRecord {
    /// Message text in the tracker's layout; parses back to an equal record.
    pub fn to_message_text(&self) -> String {
        let mut s = format!(
            "!CAL VALIDATION {} {} {} {}",
            self.model,
            self.eyes.compact(),
            self.eye.long(),
            self.error_label
        );
        if let (Some(avg), Some(max)) = (self.avg_error_deg, self.max_error_deg) {
            s.push_str(&format!(" ERROR {} avg. {} max", fmt_num(avg, 2), fmt_num(max, 2)));
            if let (Some(deg), Some((x, y))) = (self.offset_deg, self.offset_pix) {
                s.push_str(&format!(
                    " OFFSET {} deg. {},{} pix.",
                    fmt_num(deg, 2),
                    fmt_num(x, 1),
                    fmt_num(y, 1)
                ));
            }
        }
        s
    }
}

impl CalibrationRecord {
    pub fn to_message_text(&self) -> String {
        let mut s = format!(
            "!CAL CALIBRATION {} {} {}",
            self.model,
            self.eyes.compact(),
            self.eye.long()
        );
        if let Some(result) = &self.result {
            s.push(' ');
            s.push_str(result);
        }
        s
    }
}

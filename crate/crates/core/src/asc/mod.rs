//! EyeLink ASC parsing.
//!
//! [`parse_asc`] turns the text export of an EyeLink recording into a [`Recording`].
//! The parser is tolerant: lines it does not recognize, or recognizes but cannot
//! read, are left out of the recording and reported as [`ParseWarning`]s with their
//! line number. Only an input without any content, or without any START block, is
//! an error, and [`parse_asc_with_fallback`] recovers the latter by spanning a
//! synthetic block over the recorded timestamps.

mod cal;
mod lines;
mod trials;
mod types;
mod writer;

use std::collections::HashMap;

use thiserror::Error;

pub use cal::{parse_calibration_message, parse_validation_message, MalformedCalMessage};
pub use lines::{parse_declaration, parse_event_line, parse_sample_line, LineError};
pub use trials::{segment_trials, Segmentation, TrialMarkers, TrialWindow, WindowSource};
pub use types::*;
pub use writer::write_asc;

use crate::num::parse_finite;

#[derive(Debug, Error)]
pub enum AscError {
    #[error("input contains no non-blank lines")]
    EmptyInput,
    #[error("no START line found")]
    NoRecordingBlock { partial: Box<Recording> },
}

/// Parses ASC text. Any line terminator style (`\n`, `\r\n`, `\r`) is accepted.
pub fn parse_asc(text: &str) -> Result<Recording, AscError> {
    let mut parser = Parser::default();
    let mut non_blank = 0usize;
    for (idx, raw) in split_lines(text).enumerate() {
        let line = raw.trim_end();
        if line.trim_start().is_empty() {
            continue;
        }
        non_blank += 1;
        parser.line(idx + 1, line.trim_start());
    }
    if non_blank == 0 {
        return Err(AscError::EmptyInput);
    }
    parser.finish()
}

/// Like [`parse_asc`], but a file without START lines gets one synthetic block from
/// its first to its last timestamp (with a warning). Fails only on empty input or
/// a file with no timestamped line at all.
pub fn parse_asc_with_fallback(text: &str) -> Result<Recording, AscError> {
    match parse_asc(text) {
        Err(AscError::NoRecordingBlock { partial }) => {
            let mut rec = *partial;
            let times = rec
                .samples
                .iter()
                .map(|s| s.time_ms)
                .chain(rec.events.iter().flat_map(|e| [e.start_ms, e.end_ms]))
                .chain(rec.messages.iter().map(|m| m.time_ms));
            let span = times.fold(None, |acc: Option<(f64, f64)>, t| match acc {
                None => Some((t, t)),
                Some((lo, hi)) => Some((lo.min(t), hi.max(t))),
            });
            let Some((start_ms, end_ms)) = span else {
                return Err(AscError::NoRecordingBlock {
                    partial: Box::new(rec),
                });
            };
            let eyes = rec.tracked_eyes();
            rec.blocks.push(Block {
                start_ms,
                end_ms,
                eyes,
                synthetic: true,
            });
            rec.warnings.push(ParseWarning {
                line: 0,
                reason: format!(
                    "no START line; using synthetic recording block [{start_ms}, {end_ms}]"
                ),
            });
            Ok(rec)
        }
        other => other,
    }
}

fn split_lines(text: &str) -> Box<dyn Iterator<Item = &str> + '_> {
    if text.contains('\n') {
        Box::new(text.split('\n').map(|l| l.strip_suffix('\r').unwrap_or(l)))
    } else {
        Box::new(text.split('\r'))
    }
}

struct OpenBlock {
    start_ms: f64,
    eyes: EyeLayout,
    line: usize,
}

#[derive(Default)]
struct Parser {
    rec: Recording,
    open: Option<OpenBlock>,
    layout: Option<EyeLayout>,
    last_time: Option<f64>,
    last_sample_time: Option<f64>,
    /// (first line, count) of consecutive samples seen while no block was open.
    outside_runs: Vec<(usize, usize)>,
    in_outside_run: bool,
    last_event_end: HashMap<(EventKind, Eye), f64>,
}

impl Parser {
    fn warn(&mut self, line: usize, reason: impl Into<String>) {
        self.rec.warnings.push(ParseWarning {
            line,
            reason: reason.into(),
        });
    }

    fn saw_time(&mut self, t: f64) {
        self.last_time = Some(self.last_time.map_or(t, |prev| prev.max(t)));
    }

    fn line(&mut self, no: usize, line: &str) {
        if line.as_bytes()[0].is_ascii_digit() {
            return self.sample(no, line);
        }
        if let Some(rest) = line.strip_prefix("**") {
            return self.header(rest);
        }
        let keyword = line.split_ascii_whitespace().next().unwrap_or("");
        match keyword {
            "MSG" => self.message(no, line),
            "START" => self.start(no, line),
            "END" => self.end(no, line),
            "SAMPLES" | "EVENTS" => match parse_declaration(line) {
                Ok(mut decl) => {
                    // the open block will be pushed at index blocks.len()
                    decl.block = self.open.as_ref().map(|_| self.rec.blocks.len());
                    if decl.kind == DeclarationKind::Samples && !decl.eyes.is_empty() {
                        self.layout = Some(decl.eyes);
                    }
                    self.rec.declarations.push(decl);
                }
                Err(e) => self.warn(no, e.to_string()),
            },
            "EFIX" | "ESACC" | "EBLINK" => self.event(no, line),
            "SFIX" | "SSACC" | "SBLINK" => {
                let mut tokens = line.split_ascii_whitespace().skip(1);
                let eye = tokens.next().and_then(Eye::from_token);
                let t = tokens.next().and_then(parse_finite);
                match (eye, t) {
                    (Some(_), Some(t)) => self.saw_time(t),
                    _ => self.warn(no, format!("malformed {keyword} line")),
                }
            }
            "PRESCALER" | "VPRESCALER" | "PUPIL" | "INPUT" | "BUTTON" | "GAZE_COORDS" => {}
            _ => {
                let shown: String = line.chars().take(60).collect();
                self.warn(no, format!("unrecognized line {shown:?}"));
            }
        }
    }

    fn header(&mut self, rest: &str) {
        let rest = rest.trim();
        let (key, value) = match rest.split_once(':') {
            Some((k, v)) => (k.trim(), v.trim()),
            None => (rest, ""),
        };
        self.rec.header.push(HeaderLine {
            key: key.to_string(),
            value: value.to_string(),
        });
    }

    fn message(&mut self, no: usize, line: &str) {
        let rest = line[3..].trim_start();
        let (ts, text) = rest
            .split_once(|c: char| c.is_ascii_whitespace())
            .unwrap_or((rest, ""));
        match parse_finite(ts) {
            Some(time_ms) => {
                self.saw_time(time_ms);
                self.rec.messages.push(Message {
                    time_ms,
                    text: text.trim_start().to_string(),
                });
            }
            None => self.warn(no, format!("malformed MSG: unparseable timestamp {ts:?}")),
        }
    }

    fn start(&mut self, no: usize, line: &str) {
        let mut tokens = line.split_ascii_whitespace().skip(1);
        let Some(start_ms) = tokens.next().and_then(parse_finite) else {
            return self.warn(no, "malformed START: unparseable timestamp");
        };
        let mut eyes = EyeLayout::default();
        for tok in tokens {
            match tok {
                "LEFT" => eyes.left = true,
                "RIGHT" => eyes.right = true,
                _ => {}
            }
        }
        if let Some(prev) = self.open.take() {
            let end = self.last_time.unwrap_or(prev.start_ms).max(prev.start_ms);
            self.warn(
                prev.line,
                format!("recording block not closed before next START; closed at {end}"),
            );
            self.close(prev, end);
        }
        self.in_outside_run = false;
        self.saw_time(start_ms);
        if !eyes.is_empty() {
            self.layout = Some(eyes);
        }
        self.open = Some(OpenBlock {
            start_ms,
            eyes,
            line: no,
        });
    }

    fn end(&mut self, no: usize, line: &str) {
        let Some(end_ms) = line.split_ascii_whitespace().nth(1).and_then(parse_finite) else {
            return self.warn(no, "malformed END: unparseable timestamp");
        };
        match self.open.take() {
            Some(open) if end_ms >= open.start_ms => {
                self.saw_time(end_ms);
                self.close(open, end_ms);
            }
            Some(open) => {
                self.warn(no, format!("END at {end_ms} precedes START at {}", open.start_ms));
                self.open = Some(open);
            }
            None => self.warn(no, "END without matching START"),
        }
    }

    fn close(&mut self, open: OpenBlock, end_ms: f64) {
        self.rec.blocks.push(Block {
            start_ms: open.start_ms,
            end_ms,
            eyes: open.eyes,
            synthetic: false,
        });
    }

    fn sample(&mut self, no: usize, line: &str) {
        let layout = match self.layout {
            Some(layout) => layout,
            None => {
                let fields = line.split_ascii_whitespace().count();
                let layout = if fields >= 7 { EyeLayout::BOTH } else { EyeLayout::LEFT };
                self.warn(
                    no,
                    format!(
                        "sample layout not declared; assuming {}",
                        if layout == EyeLayout::BOTH { "binocular" } else { "left eye" }
                    ),
                );
                self.layout = Some(layout);
                layout
            }
        };
        let mut sample = match parse_sample_line(line, layout) {
            Ok(s) => s,
            Err(e) => return self.warn(no, e.to_string()),
        };
        if let Some(prev) = self.last_sample_time {
            if sample.time_ms < prev {
                return self.warn(
                    no,
                    format!("sample timestamp {} goes back from {prev}", sample.time_ms),
                );
            }
        }
        self.last_sample_time = Some(sample.time_ms);
        self.saw_time(sample.time_ms);
        match &self.open {
            Some(open) if sample.time_ms >= open.start_ms => self.in_outside_run = false,
            _ => {
                sample.outside_block = true;
                if self.in_outside_run {
                    if let Some(run) = self.outside_runs.last_mut() {
                        run.1 += 1;
                    }
                } else {
                    self.outside_runs.push((no, 1));
                    self.in_outside_run = true;
                }
            }
        }
        self.rec.samples.push(sample);
    }

    fn event(&mut self, no: usize, line: &str) {
        let event = match parse_event_line(line) {
            Ok(e) => e,
            Err(e) => return self.warn(no, e.to_string()),
        };
        let key = (event.kind(), event.eye);
        if let Some(&prev_end) = self.last_event_end.get(&key) {
            if event.start_ms < prev_end {
                return self.warn(
                    no,
                    format!(
                        "{:?} event on {} eye starting at {} overlaps previous one ending at {prev_end}",
                        key.0, key.1, event.start_ms
                    ),
                );
            }
        }
        self.last_event_end.insert(key, event.end_ms);
        self.saw_time(event.end_ms);
        self.rec.events.push(event);
    }

    fn finish(mut self) -> Result<Recording, AscError> {
        if let Some(open) = self.open.take() {
            let end = self.last_time.unwrap_or(open.start_ms).max(open.start_ms);
            self.warn(open.line, format!("recording block not closed; closed at {end}"));
            self.close(open, end);
        }
        if self.rec.blocks.is_empty() {
            for s in &mut self.rec.samples {
                s.outside_block = false;
            }
            return Err(AscError::NoRecordingBlock {
                partial: Box::new(self.rec),
            });
        }
        for (line, count) in std::mem::take(&mut self.outside_runs) {
            self.warn(line, format!("{count} samples outside any recording block"));
        }
        self.rec.warnings.sort_by_key(|w| w.line);
        Ok(self.rec)
    }
}

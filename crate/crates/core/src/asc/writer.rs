use std::fmt::Write;

use super::types::*;
use crate::num::fmt_num;

/// Position of a line among lines sharing a timestamp.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Slot {
    Start,
    Message,
    EventStart,
    Sample,
    EventEnd,
    End,
}

enum Item<'a> {
    Start(usize),
    End(usize),
    Message(&'a Message),
    EventStart(&'a EyeEvent),
    EventEnd(&'a EyeEvent),
    Sample(&'a GazeSample),
}

/// Renders a recording as ASC text in the tracker's layout.
///
/// Samples, events and messages are interleaved by time; events appear as their
/// start line at `start_ms` and their end line at `end_ms`. Parsing the output with
/// [`parse_asc`](super::parse_asc) recovers the same header, declarations, blocks,
/// samples, events and messages. Warnings are not written.
pub fn write_asc(rec: &Recording) -> String {
    let mut items: Vec<(f64, Slot, Item)> = Vec::with_capacity(
        rec.samples.len() + 2 * rec.events.len() + rec.messages.len() + 2 * rec.blocks.len(),
    );
    for (i, b) in rec.blocks.iter().enumerate().filter(|(_, b)| !b.synthetic) {
        items.push((b.start_ms, Slot::Start, Item::Start(i)));
        items.push((b.end_ms, Slot::End, Item::End(i)));
    }
    items.extend(rec.messages.iter().map(|m| (m.time_ms, Slot::Message, Item::Message(m))));
    for e in &rec.events {
        items.push((e.start_ms, Slot::EventStart, Item::EventStart(e)));
        items.push((e.end_ms, Slot::EventEnd, Item::EventEnd(e)));
    }
    items.extend(rec.samples.iter().map(|s| (s.time_ms, Slot::Sample, Item::Sample(s))));
    items.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));

    let mut out = String::with_capacity(rec.samples.len() * 40 + 4096);
    for h in &rec.header {
        if h.value.is_empty() {
            let _ = writeln!(out, "** {}", h.key);
        } else {
            let _ = writeln!(out, "** {}: {}", h.key, h.value);
        }
    }
    for d in rec.declarations.iter().filter(|d| d.block.is_none()) {
        write_declaration(&mut out, d);
    }

    let mut layout = rec.tracked_eyes();
    for (_, _, item) in items {
        match item {
            Item::Start(i) => {
                let b = &rec.blocks[i];
                out.push_str("START\t");
                out.push_str(&fmt_num(b.start_ms, 0));
                out.push_str(" \t");
                for eye in b.eyes.eyes() {
                    out.push_str(eye.long());
                    out.push('\t');
                }
                out.push_str("SAMPLES\tEVENTS\n");
                if !b.eyes.is_empty() {
                    layout = b.eyes;
                }
                for d in rec.declarations.iter().filter(|d| d.block == Some(i)) {
                    write_declaration(&mut out, d);
                    if d.kind == DeclarationKind::Samples && !d.eyes.is_empty() {
                        layout = d.eyes;
                    }
                }
            }
            Item::End(i) => {
                let _ = writeln!(out, "END\t{} \tSAMPLES\tEVENTS", fmt_num(rec.blocks[i].end_ms, 0));
            }
            Item::Message(m) => {
                let _ = writeln!(out, "MSG\t{} {}", fmt_num(m.time_ms, 0), m.text);
            }
            Item::EventStart(e) => {
                let keyword = match e.kind() {
                    EventKind::Fixation => "SFIX",
                    EventKind::Saccade => "SSACC",
                    EventKind::Blink => "SBLINK",
                };
                let _ = writeln!(out, "{keyword} {}   {}", e.eye.short(), fmt_num(e.start_ms, 0));
            }
            Item::EventEnd(e) => write_event_end(&mut out, e),
            Item::Sample(s) => write_sample(&mut out, s, layout),
        }
    }
    out
}

fn write_declaration(out: &mut String, d: &Declaration) {
    out.push_str(match d.kind {
        DeclarationKind::Samples => "SAMPLES",
        DeclarationKind::Events => "EVENTS",
    });
    if let Some(t) = &d.data_type {
        out.push('\t');
        out.push_str(t);
    }
    for eye in d.eyes.eyes() {
        out.push('\t');
        out.push_str(eye.long());
    }
    if let Some(rate) = d.rate_hz {
        let _ = write!(out, "\tRATE\t{}", fmt_num(rate, 2));
    }
    if let Some(t) = &d.tracking {
        let _ = write!(out, "\tTRACKING\t{t}");
    }
    if let Some(f) = d.filter {
        let _ = write!(out, "\tFILTER\t{f}");
    }
    for flag in &d.flags {
        out.push('\t');
        out.push_str(flag);
    }
    out.push('\n');
}

fn coord(v: Option<f64>) -> String {
    v.map_or_else(|| ".".to_string(), |v| fmt_num(v, 1))
}

fn point(p: Option<GazePoint>) -> (String, String) {
    (coord(p.map(|p| p.x_px)), coord(p.map(|p| p.y_px)))
}

fn write_sample(out: &mut String, s: &GazeSample, layout: EyeLayout) {
    out.push_str(&fmt_num(s.time_ms, 0));
    for eye in layout.eyes() {
        let ch = s.channel(eye).copied().unwrap_or(EyeChannel::MISSING);
        let (x, y) = point(ch.gaze);
        let _ = write!(out, "\t{x:>7}\t{y:>7}\t{:>7}", fmt_num(ch.pupil.unwrap_or(0.0), 1));
    }
    out.push_str(if layout.count() == 2 { "\t.....\n" } else { "\t...\n" });
}

fn write_event_end(out: &mut String, e: &EyeEvent) {
    let head = format!(
        "{} {}   {}\t{}\t{}",
        match e.kind() {
            EventKind::Fixation => "EFIX",
            EventKind::Saccade => "ESACC",
            EventKind::Blink => "EBLINK",
        },
        e.eye.short(),
        fmt_num(e.start_ms, 0),
        fmt_num(e.end_ms, 0),
        fmt_num(e.duration_ms(), 0)
    );
    out.push_str(&head);
    match &e.payload {
        EventPayload::Fixation { position, pupil } => {
            let (x, y) = point(*position);
            let _ = write!(out, "\t{x:>7}\t{y:>7}\t{:>7}", fmt_num(pupil.unwrap_or(0.0), 0));
        }
        EventPayload::Saccade {
            start,
            end,
            amplitude_deg,
            peak_velocity_deg_s,
        } => {
            let (sx, sy) = point(*start);
            let (ex, ey) = point(*end);
            let amp = amplitude_deg.map_or_else(|| ".".into(), |v| fmt_num(v, 2));
            let pv = peak_velocity_deg_s.map_or_else(|| ".".into(), |v| fmt_num(v, 0));
            let _ = write!(out, "\t{sx:>7}\t{sy:>7}\t{ex:>7}\t{ey:>7}\t{amp:>5}\t{pv:>6}");
        }
        EventPayload::Blink => {}
    }
    out.push('\n');
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::asc::parse_asc;

    #[test]
    fn writes_and_reparses_a_binocular_block() {
        let rec = Recording {
            header: vec![HeaderLine {
                key: "DATE".into(),
                value: "Tue Jan 1 00:00:00 2030".into(),
            }],
            declarations: vec![Declaration {
                kind: DeclarationKind::Samples,
                data_type: Some("GAZE".into()),
                eyes: EyeLayout::BOTH,
                rate_hz: Some(500.0),
                tracking: Some("CR".into()),
                filter: Some(1),
                flags: vec![],
                block: Some(0),
            }],
            blocks: vec![Block {
                start_ms: 10.0,
                end_ms: 14.0,
                eyes: EyeLayout::BOTH,
                synthetic: false,
            }],
            samples: vec![
                GazeSample {
                    time_ms: 10.0,
                    left: Some(EyeChannel::new(1.5, 2.5, 900.0)),
                    right: Some(EyeChannel::MISSING),
                    outside_block: false,
                },
                GazeSample {
                    time_ms: 12.0,
                    left: Some(EyeChannel::new(1.25, 2.0, 901.0)),
                    right: Some(EyeChannel::new(3.0, 4.0, 800.5)),
                    outside_block: false,
                },
            ],
            events: vec![EyeEvent {
                eye: Eye::Right,
                start_ms: 10.0,
                end_ms: 11.0,
                payload: EventPayload::Blink,
                stage: Stage::Manufacturer,
            }],
            messages: vec![Message {
                time_ms: 10.0,
                text: "TRIALID 1".into(),
            }],
            warnings: vec![],
        };
        let text = write_asc(&rec);
        let parsed = parse_asc(&text).unwrap();
        assert_eq!(parsed, rec, "\n{text}");
    }
}

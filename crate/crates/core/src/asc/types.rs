use std::fmt;

use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Eye {
    Left,
    Right,
}

impl Eye {
    /// Accepts the short (`L`/`R`) and long (`LEFT`/`RIGHT`) spellings.
    pub fn from_token(tok: &str) -> Option<Eye> {
        match tok {
            "L" | "LEFT" => Some(Eye::Left),
            "R" | "RIGHT" => Some(Eye::Right),
            _ => None,
        }
    }

    pub fn short(self) -> &'static str {
        match self {
            Eye::Left => "L",
            Eye::Right => "R",
        }
    }

    pub fn long(self) -> &'static str {
        match self {
            Eye::Left => "LEFT",
            Eye::Right => "RIGHT",
        }
    }
}

impl fmt::Display for Eye {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Eye::Left => "left",
            Eye::Right => "right",
        })
    }
}

/// Which eyes a block, declaration or sample line carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EyeLayout {
    pub left: bool,
    pub right: bool,
}

impl EyeLayout {
    pub const LEFT: EyeLayout = EyeLayout {
        left: true,
        right: false,
    };
    pub const RIGHT: EyeLayout = EyeLayout {
        left: false,
        right: true,
    };
    pub const BOTH: EyeLayout = EyeLayout {
        left: true,
        right: true,
    };

    pub fn is_empty(self) -> bool {
        !self.left && !self.right
    }

    pub fn count(self) -> usize {
        self.left as usize + self.right as usize
    }

    pub fn contains(self, eye: Eye) -> bool {
        match eye {
            Eye::Left => self.left,
            Eye::Right => self.right,
        }
    }

    /// Eyes in column order (left before right).
    pub fn eyes(self) -> impl Iterator<Item = Eye> {
        [(self.left, Eye::Left), (self.right, Eye::Right)]
            .into_iter()
            .filter_map(|(on, eye)| on.then_some(eye))
    }

    pub fn with(mut self, eye: Eye) -> Self {
        match eye {
            Eye::Left => self.left = true,
            Eye::Right => self.right = true,
        }
        self
    }

    /// Parses the compact calibration token (`L`, `R`, `LR`).
    pub fn from_compact(tok: &str) -> Option<EyeLayout> {
        match tok {
            "L" => Some(Self::LEFT),
            "R" => Some(Self::RIGHT),
            "LR" | "RL" => Some(Self::BOTH),
            _ => None,
        }
    }

    pub fn compact(self) -> &'static str {
        match (self.left, self.right) {
            (true, true) => "LR",
            (true, false) => "L",
            (false, true) => "R",
            (false, false) => "",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazePoint {
    pub x_px: f64,
    pub y_px: f64,
}

impl GazePoint {
    pub fn new(x_px: f64, y_px: f64) -> Self {
        GazePoint { x_px, y_px }
    }
}

/// One eye's measurements on a sample line. The position is either complete or missing.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EyeChannel {
    pub gaze: Option<GazePoint>,
    pub pupil: Option<f64>,
}

impl EyeChannel {
    pub const MISSING: EyeChannel = EyeChannel {
        gaze: None,
        pupil: None,
    };

    pub fn new(x_px: f64, y_px: f64, pupil: f64) -> Self {
        EyeChannel {
            gaze: Some(GazePoint { x_px, y_px }),
            pupil: Some(pupil),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GazeSample {
    /// Milliseconds; fractional above 1000 Hz.
    pub time_ms: f64,
    pub left: Option<EyeChannel>,
    pub right: Option<EyeChannel>,
    /// Set when the sample was not inside any START/END block.
    pub outside_block: bool,
}

impl GazeSample {
    pub fn channel(&self, eye: Eye) -> Option<&EyeChannel> {
        match eye {
            Eye::Left => self.left.as_ref(),
            Eye::Right => self.right.as_ref(),
        }
    }

    pub fn gaze(&self, eye: Eye) -> Option<GazePoint> {
        self.channel(eye).and_then(|c| c.gaze)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum EventKind {
    Fixation,
    Saccade,
    Blink,
}

/// Where an event came from: the tracker's own parser, or this crate's fallback detector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Manufacturer,
    Fallback,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EventPayload {
    Fixation {
        position: Option<GazePoint>,
        pupil: Option<f64>,
    },
    Saccade {
        start: Option<GazePoint>,
        end: Option<GazePoint>,
        amplitude_deg: Option<f64>,
        peak_velocity_deg_s: Option<f64>,
    },
    Blink,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EyeEvent {
    pub eye: Eye,
    pub start_ms: f64,
    pub end_ms: f64,
    pub payload: EventPayload,
    pub stage: Stage,
}

impl EyeEvent {
    pub fn kind(&self) -> EventKind {
        match self.payload {
            EventPayload::Fixation { .. } => EventKind::Fixation,
            EventPayload::Saccade { .. } => EventKind::Saccade,
            EventPayload::Blink => EventKind::Blink,
        }
    }

    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }

    /// Mean fixation position; `None` for other kinds.
    pub fn centroid(&self) -> Option<GazePoint> {
        match self.payload {
            EventPayload::Fixation { position, .. } => position,
            _ => None,
        }
    }

    pub fn is_fixation(&self) -> bool {
        self.kind() == EventKind::Fixation
    }

    pub fn is_blink(&self) -> bool {
        self.kind() == EventKind::Blink
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Message {
    pub time_ms: f64,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HeaderLine {
    pub key: String,
    pub value: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeclarationKind {
    Samples,
    Events,
}

/// A `SAMPLES ...` or `EVENTS ...` line.
#[derive(Debug, Clone, PartialEq)]
pub struct Declaration {
    pub kind: DeclarationKind,
    /// `GAZE`, `HREF`, ...
    pub data_type: Option<String>,
    pub eyes: EyeLayout,
    pub rate_hz: Option<f64>,
    pub tracking: Option<String>,
    pub filter: Option<u8>,
    /// Tokens not covered by the fields above, e.g. `INPUT`.
    pub flags: Vec<String>,
    /// Index of the recording block opened most recently before this line.
    pub block: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Block {
    pub start_ms: f64,
    pub end_ms: f64,
    pub eyes: EyeLayout,
    /// Spans first to last timestamp of a file with no START line.
    pub synthetic: bool,
}

impl Block {
    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_ms && t <= self.end_ms
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseWarning {
    /// 1-based line number.
    pub line: usize,
    pub reason: String,
}

impl fmt::Display for ParseWarning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.reason)
    }
}

/// A fully parsed ASC session. Immutable once returned by the parser.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Recording {
    pub header: Vec<HeaderLine>,
    pub declarations: Vec<Declaration>,
    pub blocks: Vec<Block>,
    pub samples: Vec<GazeSample>,
    pub events: Vec<EyeEvent>,
    pub messages: Vec<Message>,
    pub warnings: Vec<ParseWarning>,
}

impl Recording {
    pub fn header_value(&self, key: &str) -> Option<&str> {
        self.header
            .iter()
            .find(|h| h.key.eq_ignore_ascii_case(key))
            .map(|h| h.value.as_str())
    }

    pub fn sample_declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.declarations
            .iter()
            .filter(|d| d.kind == DeclarationKind::Samples)
    }

    pub fn event_declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.declarations
            .iter()
            .filter(|d| d.kind == DeclarationKind::Events)
    }

    /// Union of the eyes declared by SAMPLES lines, falling back to START lines.
    pub fn tracked_eyes(&self) -> EyeLayout {
        let from_decl = self
            .sample_declarations()
            .fold(EyeLayout::default(), |acc, d| EyeLayout {
                left: acc.left || d.eyes.left,
                right: acc.right || d.eyes.right,
            });
        if !from_decl.is_empty() {
            return from_decl;
        }
        self.blocks.iter().fold(EyeLayout::default(), |acc, b| EyeLayout {
            left: acc.left || b.eyes.left,
            right: acc.right || b.eyes.right,
        })
    }

    /// Sampling rate in effect for the block containing `t`: the SAMPLES declaration
    /// belonging to that block, else the first declared rate.
    pub fn sampling_rate_at(&self, t: f64) -> Option<f64> {
        let block = self.blocks.iter().position(|b| b.contains(t));
        block
            .and_then(|idx| {
                self.sample_declarations()
                    .filter(|d| d.block == Some(idx))
                    .find_map(|d| d.rate_hz)
            })
            .or_else(|| self.sample_declarations().find_map(|d| d.rate_hz))
    }

    /// Samples with `start <= t <= end` (or `< end` when `end_exclusive`).
    pub fn samples_between(&self, start: f64, end: f64, end_exclusive: bool) -> &[GazeSample] {
        let lo = self.samples.partition_point(|s| s.time_ms < start);
        let hi = if end_exclusive {
            self.samples.partition_point(|s| s.time_ms < end)
        } else {
            self.samples.partition_point(|s| s.time_ms <= end)
        };
        &self.samples[lo..hi.max(lo)]
    }
}

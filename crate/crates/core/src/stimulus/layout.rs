use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::asc::{EyeEvent, GazePoint};

pub const AOI_COLUMNS: [&str; 7] = [
    "word_index",
    "line_index",
    "text",
    "x_min",
    "y_min",
    "x_max",
    "y_max",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AoiWord {
    pub word_index: u32,
    pub line_index: u32,
    pub text: String,
    pub x_min: f64,
    pub y_min: f64,
    pub x_max: f64,
    pub y_max: f64,
}

impl AoiWord {
    /// Closed-box containment.
    pub fn contains(&self, p: GazePoint) -> bool {
        p.x_px >= self.x_min && p.x_px <= self.x_max && p.y_px >= self.y_min && p.y_px <= self.y_max
    }

    /// Character count, punctuation included.
    pub fn length(&self) -> usize {
        self.text.chars().count()
    }

    fn overlaps(&self, other: &AoiWord) -> bool {
        let w = self.x_max.min(other.x_max) - self.x_min.max(other.x_min);
        let h = self.y_max.min(other.y_max) - self.y_min.max(other.y_min);
        w > 0.0 && h > 0.0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum AoiError {
    #[error("AOI file lacks the header {}", AOI_COLUMNS.join(","))]
    MissingHeader,
    #[error("malformed AOI row at line {line}: {reason}")]
    MalformedRow { line: u64, reason: String },
    #[error("word boxes {0} and {1} overlap")]
    OverlappingBoxes(u32, u32),
    #[error("word {0} has an empty or inverted box")]
    DegenerateBox(u32),
}

/// Word AOIs of one stimulus, sorted by `word_index`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusLayout {
    pub stimulus_id: String,
    pub words: Vec<AoiWord>,
    pub line_count: u32,
}

impl StimulusLayout {
    /// Validates and sorts the words.
    pub fn new(stimulus_id: impl Into<String>, mut words: Vec<AoiWord>) -> Result<Self, AoiError> {
        for w in &words {
            let finite = [w.x_min, w.y_min, w.x_max, w.y_max].iter().all(|v| v.is_finite());
            if !finite || w.x_min >= w.x_max || w.y_min >= w.y_max {
                return Err(AoiError::DegenerateBox(w.word_index));
            }
        }
        words.sort_by_key(|w| w.word_index);
        if let Some(pair) = words.windows(2).find(|p| p[0].word_index == p[1].word_index) {
            return Err(AoiError::MalformedRow {
                line: 0,
                reason: format!("duplicate word_index {}", pair[0].word_index),
            });
        }
        let mut by_x: Vec<&AoiWord> = words.iter().collect();
        by_x.sort_by(|a, b| a.x_min.total_cmp(&b.x_min));
        for (i, a) in by_x.iter().enumerate() {
            for b in &by_x[i + 1..] {
                if b.x_min >= a.x_max {
                    break;
                }
                if a.overlaps(b) {
                    let (lo, hi) = (a.word_index.min(b.word_index), a.word_index.max(b.word_index));
                    return Err(AoiError::OverlappingBoxes(lo, hi));
                }
            }
        }
        let line_count = words.iter().map(|w| w.line_index + 1).max().unwrap_or(0);
        Ok(StimulusLayout {
            stimulus_id: stimulus_id.into(),
            words,
            line_count,
        })
    }

    pub fn word(&self, word_index: u32) -> Option<&AoiWord> {
        self.words
            .binary_search_by_key(&word_index, |w| w.word_index)
            .ok()
            .map(|i| &self.words[i])
    }
}

/// Reads a layout from CSV with the columns in [`AOI_COLUMNS`] (any order).
pub fn load_aoi_csv(stimulus_id: &str, text: &str) -> Result<StimulusLayout, AoiError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|_| AoiError::MissingHeader)?.clone();
    if !AOI_COLUMNS.iter().all(|c| headers.iter().any(|h| h == *c)) {
        return Err(AoiError::MissingHeader);
    }
    let mut words = Vec::new();
    for row in reader.deserialize::<AoiWord>() {
        let word = row.map_err(|e| AoiError::MalformedRow {
            line: e.position().map_or(0, |p| p.line()),
            reason: match e.kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                _ => e.to_string(),
            },
        })?;
        words.push(word);
    }
    StimulusLayout::new(stimulus_id, words)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AoiTarget {
    Word(u32),
    Background,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FixationAssignment {
    /// Index into the fixation list the assignment was made for.
    pub fixation: usize,
    pub target: AoiTarget,
}

/// Uniform-grid lookup over word boxes. Each box is registered in every cell its
/// closed extent touches, so a point on a cell edge still finds it.
#[derive(Debug, Clone)]
pub struct AoiIndex<'a> {
    layout: &'a StimulusLayout,
    origin: (f64, f64),
    cell: (f64, f64),
    dims: (i64, i64),
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> AoiIndex<'a> {
    pub fn new(layout: &'a StimulusLayout) -> Self {
        let words = &layout.words;
        if words.is_empty() {
            return AoiIndex {
                layout,
                origin: (0.0, 0.0),
                cell: (1.0, 1.0),
                dims: (0, 0),
                cells: HashMap::new(),
            };
        }
        let min_x = words.iter().map(|w| w.x_min).fold(f64::INFINITY, f64::min);
        let min_y = words.iter().map(|w| w.y_min).fold(f64::INFINITY, f64::min);
        let max_x = words.iter().map(|w| w.x_max).fold(f64::NEG_INFINITY, f64::max);
        let max_y = words.iter().map(|w| w.y_max).fold(f64::NEG_INFINITY, f64::max);
        let n = words.len() as f64;
        let mean_w = words.iter().map(|w| w.x_max - w.x_min).sum::<f64>() / n;
        let mean_h = words.iter().map(|w| w.y_max - w.y_min).sum::<f64>() / n;
        let cell = (mean_w.max(1e-6), mean_h.max(1e-6));
        let origin = (min_x, min_y);
        let key = |x: f64, y: f64| {
            (
                ((x - origin.0) / cell.0).floor() as i64,
                ((y - origin.1) / cell.1).floor() as i64,
            )
        };
        let dims = key(max_x, max_y);
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, w) in words.iter().enumerate() {
            let (c0, r0) = key(w.x_min, w.y_min);
            let (c1, r1) = key(w.x_max, w.y_max);
            for c in c0..=c1 {
                for r in r0..=r1 {
                    cells.entry((c, r)).or_default().push(i);
                }
            }
        }
        AoiIndex {
            layout,
            origin,
            cell,
            dims,
            cells,
        }
    }

    /// The containing word with the lowest index, or background.
    pub fn lookup(&self, p: GazePoint) -> AoiTarget {
        if !(p.x_px.is_finite() && p.y_px.is_finite()) || self.cells.is_empty() {
            return AoiTarget::Background;
        }
        let c = ((p.x_px - self.origin.0) / self.cell.0).floor() as i64;
        let r = ((p.y_px - self.origin.1) / self.cell.1).floor() as i64;
        if c < 0 || r < 0 || c > self.dims.0 || r > self.dims.1 {
            return AoiTarget::Background;
        }
        self.cells
            .get(&(c, r))
            .into_iter()
            .flatten()
            .map(|&i| &self.layout.words[i])
            .filter(|w| w.contains(p))
            .map(|w| w.word_index)
            .min()
            .map_or(AoiTarget::Background, AoiTarget::Word)
    }
}

/// Assigns one fixation by centroid containment. Fixations without a centroid
/// count as background.
pub fn assign_fixation(fix: &EyeEvent, index: &AoiIndex<'_>) -> AoiTarget {
    fix.centroid()
        .map_or(AoiTarget::Background, |p| index.lookup(p))
}

pub fn assign_fixations(fixations: &[EyeEvent], layout: &StimulusLayout) -> Vec<FixationAssignment> {
    let index = AoiIndex::new(layout);
    fixations
        .iter()
        .enumerate()
        .map(|(i, f)| FixationAssignment {
            fixation: i,
            target: assign_fixation(f, &index),
        })
        .collect()
}

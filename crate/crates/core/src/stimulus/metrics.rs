use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use super::layout::{AoiTarget, FixationAssignment, StimulusLayout};
use crate::asc::{Eye, EyeEvent, Stage, TrialWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum MetricError {
    #[error("layout has no words")]
    EmptyLayout,
    #[error("window has no duration")]
    EmptyWindow,
}

/// Share of words never fixated during the trial.
pub fn word_skip_rate(
    assignments: &[FixationAssignment],
    layout: &StimulusLayout,
) -> Result<f64, MetricError> {
    if layout.words.is_empty() {
        return Err(MetricError::EmptyLayout);
    }
    let fixated = layout
        .words
        .iter()
        .filter(|w| {
            assignments
                .iter()
                .any(|a| a.target == AoiTarget::Word(w.word_index))
        })
        .count();
    Ok((layout.words.len() - fixated) as f64 / layout.words.len() as f64)
}

/// Summed duration of background fixations, and its share of all fixation time.
/// The share is 0 when there is no fixation time at all.
pub fn background_dwell(fixations: &[EyeEvent], assignments: &[FixationAssignment]) -> (f64, f64) {
    let mut background = 0.0;
    let mut total = 0.0;
    for a in assignments {
        let d = fixations[a.fixation].duration_ms();
        total += d;
        if a.target == AoiTarget::Background {
            background += d;
        }
    }
    let ratio = if total > 0.0 { background / total } else { 0.0 };
    (background, ratio)
}

/// Among consecutive line changes, the share that skip at least one line.
/// `None` when the sequence never changes line.
pub fn multi_line_jump_ratio(lines: &[u32]) -> Option<f64> {
    let mut changes = 0usize;
    let mut multi = 0usize;
    for pair in lines.windows(2) {
        let delta = pair[0].abs_diff(pair[1]);
        if delta != 0 {
            changes += 1;
            if delta >= 2 {
                multi += 1;
            }
        }
    }
    (changes > 0).then(|| multi as f64 / changes as f64)
}

/// Average ranks (1-based), ties sharing the mean of their positions.
pub(crate) fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = rank;
        }
        i = j + 1;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks. `None` for fewer than
/// two points or when either variable is constant.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let rx = average_ranks(x);
    let ry = average_ranks(y);
    let n = rx.len() as f64;
    let mx = rx.iter().sum::<f64>() / n;
    let my = ry.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 || syy == 0.0 {
        return None;
    }
    Some((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Rank correlation between word length and total fixation time per fixated word.
/// Needs at least three distinct fixated words.
pub fn word_length_effect(
    fixations: &[EyeEvent],
    assignments: &[FixationAssignment],
    layout: &StimulusLayout,
) -> Option<f64> {
    let mut dwell: BTreeMap<u32, f64> = BTreeMap::new();
    for a in assignments {
        if let AoiTarget::Word(w) = a.target {
            *dwell.entry(w).or_default() += fixations[a.fixation].duration_ms();
        }
    }
    if dwell.len() < 3 {
        return None;
    }
    let (lengths, durations): (Vec<f64>, Vec<f64>) = dwell
        .iter()
        .filter_map(|(&w, &d)| layout.word(w).map(|word| (word.length() as f64, d)))
        .unzip();
    spearman(&lengths, &durations)
}

/// Words per minute over the trial window.
pub fn reading_speed(layout: &StimulusLayout, window: &TrialWindow) -> Result<f64, MetricError> {
    let minutes = window.duration_ms() / 60_000.0;
    if !(minutes > 0.0) {
        return Err(MetricError::EmptyWindow);
    }
    Ok(layout.words.len() as f64 / minutes)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StimulusMetricsReport {
    pub stimulus_id: String,
    pub eye: Eye,
    pub fixation_stage: Stage,
    pub num_fixations: usize,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub word_skip_rate: f64,
    pub background_dwell_ms: f64,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub background_dwell_ratio: f64,
    #[serde(serialize_with = "crate::num::ser_opt_sig6")]
    pub multi_line_jump_ratio: Option<f64>,
    #[serde(serialize_with = "crate::num::ser_opt_sig6")]
    pub word_length_duration_corr: Option<f64>,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub reading_speed_wpm: f64,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// All stimulus metrics for one trial's fixations (already restricted to the trial
/// and to one eye).
pub fn compute_stimulus_metrics(
    fixations: &[EyeEvent],
    layout: &StimulusLayout,
    window: &TrialWindow,
    eye: Eye,
    stage: Stage,
) -> Result<StimulusMetricsReport, MetricError> {
    let assignments = super::assign_fixations(fixations, layout);
    let skip = word_skip_rate(&assignments, layout)?;
    let speed = reading_speed(layout, window)?;
    let (background_dwell_ms, background_dwell_ratio) = background_dwell(fixations, &assignments);
    let lines: Vec<u32> = assignments
        .iter()
        .filter_map(|a| match a.target {
            AoiTarget::Word(w) => layout.word(w).map(|w| w.line_index),
            AoiTarget::Background => None,
        })
        .collect();
    let mut warnings = Vec::new();
    if fixations.is_empty() {
        warnings.push(format!(
            "no fixations on {eye} eye; background dwell ratio set to 0"
        ));
    }
    Ok(StimulusMetricsReport {
        stimulus_id: layout.stimulus_id.clone(),
        eye,
        fixation_stage: stage,
        num_fixations: fixations.len(),
        word_skip_rate: skip,
        background_dwell_ms,
        background_dwell_ratio,
        multi_line_jump_ratio: multi_line_jump_ratio(&lines),
        word_length_duration_corr: word_length_effect(fixations, &assignments, layout),
        reading_speed_wpm: speed,
        warnings,
    })
}

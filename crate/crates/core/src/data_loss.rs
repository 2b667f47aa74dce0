//! Data loss per trial window and eye.
//!
//! Loss is measured against the expected tick grid: a window `[start, end]` sampled
//! at `rate` Hz has `floor((end - start) * rate / 1000) + 1` ticks. The total loss is
//! the share of ticks without a valid sample, the blink loss is the share of ticks
//! covered by manufacturer blinks, and whatever is left is loss of unknown cause.

use serde::Serialize;
use thiserror::Error;

use crate::asc::{Eye, EyeEvent, GazeSample, TrialWindow};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum DataLossError {
    #[error("sampling rate unknown or not positive")]
    ZeroRate,
    #[error("window end does not lie after its start")]
    EmptyWindow,
    #[error("minimum gap must be at least one sample period")]
    GapBelowPeriod,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlinkStat {
    pub eye: Eye,
    /// Clipped to the trial window.
    pub start_ms: f64,
    pub end_ms: f64,
    pub duration_ms: f64,
    /// Expected ticks inside `[start_ms, end_ms]`.
    pub num_samples: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DataLossReport {
    pub eye: Eye,
    pub sampling_rate_hz: f64,
    pub expected_samples: u64,
    /// Sample lines in the window, repeats included.
    pub recorded_samples: u64,
    /// Distinct timestamps with valid gaze; a repeated line counts once.
    pub valid_samples: u64,
    pub blink_samples: u64,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub loss_ratio_total: f64,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub loss_ratio_blink: f64,
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub loss_ratio_unknown: f64,
    pub blink_count: u64,
    /// Blinks per minute.
    #[serde(serialize_with = "crate::num::ser_sig6")]
    pub blink_ratio: f64,
    pub blinks: Vec<BlinkStat>,
    #[serde(skip)]
    pub warnings: Vec<String>,
}

/// The tick grid of a window at a given rate.
#[derive(Debug, Clone, Copy)]
struct Grid {
    start_ms: f64,
    rate_hz: f64,
    ticks: u64,
}

impl Grid {
    fn new(window: &TrialWindow, rate_hz: f64) -> Result<Grid, DataLossError> {
        if !(rate_hz.is_finite() && rate_hz > 0.0) {
            return Err(DataLossError::ZeroRate);
        }
        if !(window.end_ms > window.start_ms) {
            return Err(DataLossError::EmptyWindow);
        }
        let span = window.duration_ms() * rate_hz / 1000.0;
        let eps = 1e-9 * span.max(1.0);
        let mut ticks = (span + eps).floor() as u64 + 1;
        if window.end_exclusive && (span - span.round()).abs() <= eps {
            ticks -= 1;
        }
        Ok(Grid {
            start_ms: window.start_ms,
            rate_hz,
            ticks: ticks.max(1),
        })
    }

    fn period_ms(&self) -> f64 {
        1000.0 / self.rate_hz
    }

    fn tick_time(&self, k: u64) -> f64 {
        self.start_ms + k as f64 * self.period_ms()
    }

    /// Inclusive tick index range covered by `[a, b]`, if any.
    fn ticks_in(&self, a: f64, b: f64) -> Option<(u64, u64)> {
        let pos = |t: f64| (t - self.start_ms) * self.rate_hz / 1000.0;
        let (pa, pb) = (pos(a), pos(b));
        let eps = 1e-9 * pb.abs().max(1.0);
        let lo = (pa - eps).ceil().max(0.0);
        let hi = (pb + eps).floor().min((self.ticks - 1) as f64);
        (hi >= lo).then(|| (lo as u64, hi as u64))
    }
}

/// Clips intervals to `[lo, hi]` and merges overlapping or touching ones.
fn merge_intervals(mut intervals: Vec<(f64, f64)>, lo: f64, hi: f64) -> Vec<(f64, f64)> {
    intervals.retain(|&(a, b)| b >= lo && a <= hi);
    for iv in &mut intervals {
        *iv = (iv.0.max(lo), iv.1.min(hi));
    }
    intervals.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
    for (a, b) in intervals {
        match merged.last_mut() {
            Some(last) if a <= last.1 => last.1 = last.1.max(b),
            _ => merged.push((a, b)),
        }
    }
    merged
}

/// Data loss of one eye inside `window`.
///
/// `samples` may cover more than the window; only samples inside it count. Blinks
/// are taken from `events` (blink events of `eye` only), clipped to the window and
/// merged before their ticks are counted.
pub fn compute_data_loss(
    samples: &[GazeSample],
    events: &[EyeEvent],
    window: &TrialWindow,
    rate_hz: f64,
    eye: Eye,
) -> Result<DataLossReport, DataLossError> {
    let grid = Grid::new(window, rate_hz)?;
    let expected = grid.ticks;
    let mut warnings = Vec::new();

    let mut recorded = 0u64;
    let mut valid = 0u64;
    let mut duplicates = 0u64;
    let mut prev: Option<(f64, bool)> = None;
    for s in samples.iter().filter(|s| window.contains(s.time_ms)) {
        recorded += 1;
        let ok = s.gaze(eye).is_some();
        match prev {
            Some((t, counted)) if t == s.time_ms => {
                duplicates += 1;
                if ok && !counted {
                    valid += 1;
                    prev = Some((t, true));
                }
            }
            _ => {
                valid += ok as u64;
                prev = Some((s.time_ms, ok));
            }
        }
    }

    let window_end = window.end_ms;
    let raw_blinks: Vec<&EyeEvent> = events
        .iter()
        .filter(|e| e.is_blink() && e.eye == eye)
        .filter(|e| e.end_ms >= window.start_ms && e.start_ms <= window_end)
        .collect();
    let mut blinks: Vec<BlinkStat> = raw_blinks
        .iter()
        .map(|e| {
            let start_ms = e.start_ms.max(window.start_ms);
            let end_ms = e.end_ms.min(window_end);
            BlinkStat {
                eye,
                start_ms,
                end_ms,
                duration_ms: end_ms - start_ms,
                num_samples: grid.ticks_in(start_ms, end_ms).map_or(0, |(lo, hi)| hi - lo + 1),
            }
        })
        .collect();
    blinks.sort_by(|a, b| a.start_ms.total_cmp(&b.start_ms).then(a.end_ms.total_cmp(&b.end_ms)));

    let merged = merge_intervals(
        raw_blinks.iter().map(|e| (e.start_ms, e.end_ms)).collect(),
        window.start_ms,
        window_end,
    );
    let mut blink_samples = 0u64;
    let mut next_free = 0u64;
    for (a, b) in merged {
        if let Some((lo, hi)) = grid.ticks_in(a, b) {
            let lo = lo.max(next_free);
            if hi >= lo {
                blink_samples += hi - lo + 1;
                next_free = hi + 1;
            }
        }
    }

    let expected_f = expected as f64;
    let raw_total = 1.0 - valid as f64 / expected_f;
    if duplicates > 0 || raw_total < 0.0 {
        let mut w = format!(
            "duplicate samples: {duplicates} repeated timestamps, {valid} valid of {expected} expected for {eye} eye; repeats counted once"
        );
        if raw_total < 0.0 {
            w.push_str(", loss_ratio_total clamped");
        }
        warnings.push(w);
    }
    let loss_ratio_total = raw_total.clamp(0.0, 1.0);
    let loss_ratio_blink = (blink_samples as f64 / expected_f).min(1.0);
    let diff = loss_ratio_total - loss_ratio_blink;
    if diff < -1e-12 {
        warnings.push(format!(
            "blink intervals cover {} valid samples on {eye} eye; unknown-cause loss floored at 0",
            ((-diff) * expected_f).round()
        ));
    }

    let minutes = window.duration_ms() / 60_000.0;
    Ok(DataLossReport {
        eye,
        sampling_rate_hz: rate_hz,
        expected_samples: expected,
        recorded_samples: recorded,
        valid_samples: valid,
        blink_samples,
        loss_ratio_total,
        loss_ratio_blink,
        loss_ratio_unknown: diff.max(0.0),
        blink_count: blinks.len() as u64,
        blink_ratio: blinks.len() as f64 / minutes,
        blinks,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Gap {
    pub start_ms: f64,
    pub end_ms: f64,
    pub num_missing: u64,
}

/// Maximal runs of ticks with no valid sample of `eye` within half a period, lasting
/// at least `min_gap_ms` (run length times the period).
pub fn detect_gaps(
    samples: &[GazeSample],
    window: &TrialWindow,
    rate_hz: f64,
    min_gap_ms: f64,
    eye: Eye,
) -> Result<Vec<Gap>, DataLossError> {
    let grid = Grid::new(window, rate_hz)?;
    let period = grid.period_ms();
    if !(min_gap_ms >= period - 1e-9) {
        return Err(DataLossError::GapBelowPeriod);
    }
    let half = period / 2.0;
    let valid: Vec<f64> = samples
        .iter()
        .filter(|s| s.gaze(eye).is_some())
        .map(|s| s.time_ms)
        .collect();

    let mut gaps = Vec::new();
    let mut run: Option<(u64, u64)> = None;
    let mut p = 0usize;
    let close = |run: (u64, u64), gaps: &mut Vec<Gap>| {
        let n = run.1 - run.0 + 1;
        if n as f64 * period >= min_gap_ms - 1e-9 {
            gaps.push(Gap {
                start_ms: grid.tick_time(run.0),
                end_ms: grid.tick_time(run.1),
                num_missing: n,
            });
        }
    };
    for k in 0..grid.ticks {
        let t = grid.tick_time(k);
        while p < valid.len() && valid[p] < t - half {
            p += 1;
        }
        let present = p < valid.len() && valid[p] <= t + half;
        match (present, run) {
            (false, None) => run = Some((k, k)),
            (false, Some((a, _))) => run = Some((a, k)),
            (true, Some(r)) => {
                close(r, &mut gaps);
                run = None;
            }
            (true, None) => {}
        }
    }
    if let Some(r) = run {
        close(r, &mut gaps);
    }
    Ok(gaps)
}

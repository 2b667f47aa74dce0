use serde::Serialize;

use super::types::Recording;

/// Literal message prefixes that open and close a trial.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialMarkers {
    pub start: String,
    pub end: String,
}

impl Default for TrialMarkers {
    fn default() -> Self {
        TrialMarkers {
            start: "TRIALID".to_string(),
            end: "TRIAL_RESULT".to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowSource {
    Markers,
    WholeSession,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialWindow {
    pub trial_id: String,
    pub start_ms: f64,
    pub end_ms: f64,
    /// True when the trial was closed by the next start marker, which belongs to
    /// the following trial.
    pub end_exclusive: bool,
    pub source: WindowSource,
}

impl TrialWindow {
    pub fn whole(trial_id: &str, start_ms: f64, end_ms: f64) -> Self {
        TrialWindow {
            trial_id: trial_id.to_string(),
            start_ms,
            end_ms,
            end_exclusive: false,
            source: WindowSource::Markers,
        }
    }

    pub fn duration_ms(&self) -> f64 {
        self.end_ms - self.start_ms
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.start_ms && (t < self.end_ms || (!self.end_exclusive && t == self.end_ms))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Segmentation {
    pub trials: Vec<TrialWindow>,
    pub warnings: Vec<String>,
}

/// Splits a recording into trials.
///
/// Each start marker opens a trial that ends at whichever comes first: the next end
/// marker, the next start marker (exclusive), or the end of the block it started in.
/// Without any start marker the whole session (first block start to last block end)
/// is a single trial.
pub fn segment_trials(rec: &Recording, markers: &TrialMarkers) -> Segmentation {
    let mut out = Segmentation::default();

    let mut order: Vec<usize> = (0..rec.messages.len()).collect();
    order.sort_by(|&a, &b| rec.messages[a].time_ms.total_cmp(&rec.messages[b].time_ms));
    let is_start = |i: usize| rec.messages[i].text.starts_with(markers.start.as_str());
    let is_end = |i: usize| !is_start(i) && rec.messages[i].text.starts_with(markers.end.as_str());

    let mut ordinal = 0usize;
    for (pos, &i) in order.iter().enumerate() {
        if !is_start(i) {
            continue;
        }
        ordinal += 1;
        let msg = &rec.messages[i];
        let start_ms = msg.time_ms;
        let label = msg.text[markers.start.len()..].trim();
        let trial_id = if label.is_empty() {
            ordinal.to_string()
        } else {
            label.to_string()
        };

        let Some(block) = rec.blocks.iter().find(|b| b.contains(start_ms)) else {
            out.warnings.push(format!(
                "trial {trial_id:?} starts at {start_ms} outside any recording block; skipped"
            ));
            continue;
        };

        let next_marker = order[pos + 1..]
            .iter()
            .copied()
            .find(|&j| is_start(j) || is_end(j));
        let (end_ms, end_exclusive) = match next_marker {
            Some(j) if rec.messages[j].time_ms <= block.end_ms => {
                (rec.messages[j].time_ms, is_start(j))
            }
            _ => (block.end_ms, false),
        };
        if end_ms <= start_ms {
            out.warnings.push(format!(
                "trial {trial_id:?} at {start_ms} has zero duration; skipped"
            ));
            continue;
        }
        out.trials.push(TrialWindow {
            trial_id,
            start_ms,
            end_ms,
            end_exclusive,
            source: WindowSource::Markers,
        });
    }

    if ordinal == 0 {
        out.warnings.push(format!(
            "no trial start markers ({:?}); the whole session is one trial",
            markers.start
        ));
        let start = rec.blocks.iter().map(|b| b.start_ms).reduce(f64::min);
        let end = rec.blocks.iter().map(|b| b.end_ms).reduce(f64::max);
        match (start, end) {
            (Some(start_ms), Some(end_ms)) if end_ms > start_ms => out.trials.push(TrialWindow {
                trial_id: "session".to_string(),
                start_ms,
                end_ms,
                end_exclusive: false,
                source: WindowSource::WholeSession,
            }),
            _ => out
                .warnings
                .push("recording blocks span no time; no trial windows".to_string()),
        }
    }
    out
}

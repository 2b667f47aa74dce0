use std::fmt::Write;

use super::{DatasetQualityReport, SessionQualityReport};
use crate::num::round_sig;

fn opt<T: ToString>(v: &Option<T>) -> String {
    v.as_ref().map_or_else(|| "n/a".to_string(), T::to_string)
}

fn ratio(v: f64) -> String {
    round_sig(v, 6).to_string()
}

fn opt_ratio(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), ratio)
}

fn list<T: ToString>(items: &[T]) -> String {
    if items.is_empty() {
        "none".to_string()
    } else {
        items.iter().map(T::to_string).collect::<Vec<_>>().join(", ")
    }
}

fn warnings(out: &mut String, items: &[String]) {
    if items.is_empty() {
        out.push_str("None.\n");
    }
    for w in items {
        let _ = writeln!(out, "- {w}");
    }
}

pub(super) fn session(r: &SessionQualityReport) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# Data quality report: {}\n", r.source.path);
    let _ = writeln!(out, "- Schema version: {}", r.schema_version);
    let _ = writeln!(out, "- Digest: `{}`\n", r.source.digest);

    let m = &r.metadata;
    out.push_str("## Metadata\n\n| Field | Value |\n|---|---|\n");
    let rows: [(&str, String); 14] = [
        ("Sampling rate (Hz)", opt(&m.sampling_rate_hz)),
        ("Declared rates (Hz)", list(&m.sampling_rates_hz)),
        ("Tracked eye", opt(&m.tracked_eye.map(|e| format!("{e:?}").to_lowercase()))),
        ("Sample filter level", opt(&m.sample_filter_level)),
        ("Event filter level", opt(&m.event_filter_level)),
        ("Tracking mode", opt(&m.tracking_mode)),
        ("Recording date", opt(&m.recording_datetime)),
        ("Recording duration (ms)", m.total_recording_duration_ms.to_string()),
        ("Recording blocks", m.num_recording_blocks.to_string()),
        ("Tracker model", opt(&m.tracker_model)),
        ("Tracker version", opt(&m.tracker_version)),
        ("Display width (px)", opt(&m.display_width_px)),
        ("Display height (px)", opt(&m.display_height_px)),
        ("Calibration model", opt(&m.calibration_model)),
    ];
    for (k, v) in rows {
        let _ = writeln!(out, "| {k} | {v} |");
    }
    let _ = writeln!(out, "\nMissing: {}\n", list(&m.missing));

    let c = &r.calibration;
    out.push_str("## Calibration and validation\n\n");
    let _ = writeln!(out, "- Calibrations: {} at {} ms", c.num_calibrations, list(&c.calibration_timestamps));
    let _ = writeln!(out, "- Validations: {} at {} ms", c.num_validations, list(&c.validation_timestamps));
    let _ = writeln!(out, "- Models: {}", list(&c.calibration_models));
    let _ = writeln!(out, "- Mean average error (deg): {}", opt_ratio(c.combined.mean_avg_error_deg));
    let _ = writeln!(out, "- Worst maximum error (deg): {}", opt(&c.combined.worst_max_error_deg));
    let labels: Vec<String> = c.combined.label_histogram.iter().map(|(k, v)| format!("{k} x{v}")).collect();
    let _ = writeln!(out, "- Labels: {}\n", list(&labels));

    out.push_str("## Data loss\n\n");
    out.push_str("| Trial | Eye | Expected | Valid | Total | Blink | Unknown | Blinks | Blinks/min |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|\n");
    for t in &r.trials {
        match &t.data_loss {
            None => {
                let _ = writeln!(out, "| {} | n/a | | | | | | | |", t.trial_id);
            }
            Some(reports) => {
                for d in reports {
                    let _ = writeln!(
                        out,
                        "| {} | {} | {} | {} | {} | {} | {} | {} | {} |",
                        t.trial_id,
                        d.eye,
                        d.expected_samples,
                        d.valid_samples,
                        ratio(d.loss_ratio_total),
                        ratio(d.loss_ratio_blink),
                        ratio(d.loss_ratio_unknown),
                        d.blink_count,
                        ratio(d.blink_ratio)
                    );
                }
            }
        }
    }

    out.push_str("\n## Stimulus metrics\n\n");
    out.push_str("| Trial | Stimulus | Eye | Fixations | Stage | Skip rate | Background dwell | Multi-line jumps | Length/duration rho | WPM |\n");
    out.push_str("|---|---|---|---|---|---|---|---|---|---|\n");
    for t in &r.trials {
        if let Some(s) = &t.stimulus_metrics {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} | {:?} | {} | {} | {} | {} | {} |",
                t.trial_id,
                s.stimulus_id,
                s.eye,
                s.num_fixations,
                s.fixation_stage,
                ratio(s.word_skip_rate),
                ratio(s.background_dwell_ratio),
                opt_ratio(s.multi_line_jump_ratio),
                opt_ratio(s.word_length_duration_corr),
                ratio(s.reading_speed_wpm)
            );
        }
    }

    out.push_str("\n## Warnings\n\n");
    warnings(&mut out, &r.warnings);
    for t in &r.trials {
        if !t.warnings.is_empty() {
            let _ = writeln!(out, "\nTrial {}:\n", t.trial_id);
            warnings(&mut out, &t.warnings);
        }
    }

    let p = &r.parameters;
    out.push_str("\n## Parameters\n\n");
    let _ = writeln!(out, "- Trial markers: `{}` / `{}`", p.trial_start_marker, p.trial_end_marker);
    let _ = writeln!(
        out,
        "- Fixation fallback: {} ({} px, {} ms)",
        p.fixation_fallback.algorithm,
        p.fixation_fallback.dispersion_threshold_px,
        p.fixation_fallback.min_duration_ms
    );
    let layouts: Vec<String> = p.aoi_layouts.iter().map(|a| format!("{} ({})", a.stimulus_id, a.path)).collect();
    let _ = writeln!(out, "- AOI layouts: {}", list(&layouts));
    out
}

pub(super) fn dataset(r: &DatasetQualityReport) -> String {
    let mut out = String::new();
    out.push_str("# Dataset quality report\n\n");
    let _ = writeln!(out, "- Schema version: {}", r.schema_version);
    let _ = writeln!(out, "- Sessions: {}\n", r.num_sessions);
    out.push_str("## Metrics\n\n| Metric | n | Mean | SD | Median | Min | Max |\n|---|---|---|---|---|---|---|\n");
    for m in &r.metrics {
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {} | {} |",
            m.metric,
            m.n,
            opt_ratio(m.mean),
            opt_ratio(m.sd),
            opt_ratio(m.median),
            opt_ratio(m.min),
            opt_ratio(m.max)
        );
    }
    out.push_str("\n## Sessions\n\n| Session | Trials | Warnings | Digest |\n|---|---|---|---|\n");
    for s in &r.sessions {
        let _ = writeln!(out, "| {} | {} | {} | `{}` |", s.session_id, s.num_trials, s.num_warnings, s.digest);
    }
    out.push_str("\n## Warnings\n\n");
    warnings(&mut out, &r.warnings);
    out
}

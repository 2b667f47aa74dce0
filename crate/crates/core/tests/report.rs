mod common;

use common::{generate, grid_layout_csv, GenSpec};
use gazeqc::asc::{parse_asc, Eye, EyeLayout};
use gazeqc::calibration::{summarize_calibration, TrackedEye, ValidationRecord};
use gazeqc::metadata::extract_metadata;
use gazeqc::report::{
    session_report_from_bytes, DatasetAccumulator, ReportConfig, Source, UnknownFormat,
};
use gazeqc::stimulus::{load_aoi_csv, BoundLayout, StimulusBinding};
use gazeqc::{aggregate_dataset, build_session_report, serialize_report, Format, SessionQualityReport};
use proptest::prelude::*;
use serde_json::Value;

fn validation(t: f64, eye: Eye, label: &str, scores: Option<(f64, f64)>) -> ValidationRecord {
    ValidationRecord {
        time_ms: t,
        model: "HV9".into(),
        eyes: EyeLayout::BOTH,
        eye,
        error_label: label.into(),
        avg_error_deg: scores.map(|s| s.0),
        max_error_deg: scores.map(|s| s.1),
        offset_deg: None,
        offset_pix: None,
    }
}

#[test]
fn validation_summary_examples() {
    let s = summarize_calibration(
        &[],
        &[
            validation(10.0, Eye::Right, "GOOD", Some((0.34, 0.67))),
            validation(20.0, Eye::Right, "GOOD", Some((0.51, 0.80))),
        ],
        Some(TrackedEye::Right),
    );
    assert_eq!(s.num_validations, 2);
    assert!((s.combined.mean_avg_error_deg.unwrap() - 0.425).abs() < 1e-12);
    assert_eq!(s.combined.worst_max_error_deg, Some(0.80));
    assert_eq!(s.combined.label_histogram.get("GOOD"), Some(&2));

    let s = summarize_calibration(&[], &[], Some(TrackedEye::Right));
    assert_eq!(s.num_validations, 0);
    assert!(!s.warnings.is_empty());

    let s = summarize_calibration(
        &[],
        &[
            validation(10.0, Eye::Right, "GOOD", Some((0.34, 0.67))),
            validation(20.0, Eye::Right, "ABORTED", None),
        ],
        Some(TrackedEye::Right),
    );
    assert_eq!(s.num_validations, 2);
    assert_eq!(s.combined.mean_avg_error_deg, Some(0.34));
    assert_eq!(s.combined.label_histogram.len(), 2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn validation_summary_ignores_order(
        recs in prop::collection::vec((0u32..100_000, any::<bool>(), 0usize..3, prop::option::of((0u32..300, 0u32..300))), 0..12),
        seed in any::<u64>(),
    ) {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let labels = ["GOOD", "FAIR", "POOR"];
        let vals: Vec<ValidationRecord> = recs
            .iter()
            .map(|&(t, left, l, s)| {
                let scores = s.map(|(a, b)| (a as f64 / 100.0, (a + b) as f64 / 100.0));
                validation(t as f64, if left { Eye::Left } else { Eye::Right }, labels[l], scores)
            })
            .collect();
        let mut shuffled = vals.clone();
        shuffled.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        let a = summarize_calibration(&[], &vals, Some(TrackedEye::Binocular));
        let b = summarize_calibration(&[], &shuffled, Some(TrackedEye::Binocular));
        prop_assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
        prop_assert_eq!(a.num_validations, vals.len());
        prop_assert_eq!(a.validation_timestamps.len(), vals.len());
        prop_assert!(a.validation_timestamps.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(a.combined.label_histogram.values().sum::<usize>(), vals.len());
        let avgs: Vec<f64> = vals.iter().filter_map(|v| v.avg_error_deg).collect();
        if let Some(m) = a.combined.mean_avg_error_deg {
            let lo = avgs.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = avgs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(m >= lo - 1e-12 && m <= hi + 1e-12);
        } else {
            prop_assert!(avgs.is_empty());
        }
    }
}

#[test]
fn metadata_from_header_and_messages() {
    let text = "\
** DATE: Tue Jun 10 09:41:12 2025
** VERSION: EYELINK II 1
** EYELINK II CL v6.12 Feb  1 2018 (EyeLink Portable Duo)
MSG\t100 DISPLAY_COORDS 0 0 1023 767
START\t200 \tLEFT\tSAMPLES\tEVENTS
SAMPLES\tGAZE\tLEFT\tRATE\t500.00\tTRACKING\tCR\tFILTER\t2
EVENTS\tGAZE\tLEFT\tRATE\t500.00\tTRACKING\tCR\tFILTER\t1
MSG\t202 !CAL CALIBRATION HV13 L LEFT GOOD
200\t1.0\t2.0\t3.0\t...
210\t1.0\t2.0\t3.0\t...
END\t210 \tSAMPLES\tEVENTS
START\t300 \tLEFT\tSAMPLES\tEVENTS
SAMPLES\tGAZE\tLEFT\tRATE\t1000.00\tTRACKING\tCR\tFILTER\t2
300\t1.0\t2.0\t3.0\t...
END\t320 \tSAMPLES\tEVENTS
";
    let rec = parse_asc(text).unwrap();
    let m = extract_metadata(&rec);
    assert_eq!((m.display_width_px, m.display_height_px), (Some(1024), Some(768)));
    assert_eq!(m.recording_datetime.as_deref(), Some("Tue Jun 10 09:41:12 2025"));
    assert_eq!(m.tracker_version.as_deref(), Some("v6.12"));
    assert_eq!(m.sampling_rate_hz, None);
    assert_eq!(m.sampling_rates_hz, vec![500.0, 1000.0]);
    assert!(m.mixed_rate);
    assert_eq!(m.total_recording_duration_ms, 30.0);
    assert_eq!((m.sample_filter_level, m.event_filter_level), (Some(2), Some(1)));
    assert_eq!(m.calibration_model.as_deref(), Some("HV13"));
    assert_eq!(m.tracked_eye, Some(TrackedEye::Left));
    assert!(m.missing.is_empty(), "{:?}", m.missing);
    assert_eq!(m, extract_metadata(&parse_asc(text).unwrap()));
}

#[test]
fn session_json_layout() {
    let g = generate(&GenSpec {
        duration_ms: 6_000.0,
        trials: 2,
        blinks: 2,
        dropped: 5,
        ..GenSpec::default()
    });
    let report = session_report_from_bytes("s1.asc", g.text.as_bytes(), &ReportConfig::default()).unwrap();
    let json = serialize_report(&report, Format::Json);
    let v: Value = serde_json::from_str(&json).unwrap();
    let top: Vec<usize> = ["schema_version", "source", "metadata", "calibration", "trials", "warnings", "parameters"]
        .iter()
        .map(|k| json.find(&format!("\n  \"{k}\":")).unwrap())
        .collect();
    assert!(top.windows(2).all(|w| w[0] < w[1]));
    assert_eq!(v.as_object().unwrap().len(), 7);
    assert_eq!(v["schema_version"], "1.0");
    assert!(v["source"]["digest"].as_str().unwrap().starts_with("sha256:"));
    assert_eq!(v["metadata"]["sampling_rate_hz"], 1000.0);
    assert_eq!(v["trials"].as_array().unwrap().len(), 2);
    assert_eq!(v["trials"][0]["data_loss"][0]["eye"], "right");
    assert_eq!(v["trials"][0]["stimulus_metrics"], Value::Null);
    assert_eq!(v["parameters"]["fixation_fallback"]["dispersion_threshold_px"], 25.0);
    assert_eq!(v["parameters"]["trial_start_marker"], "TRIALID");
    assert_eq!(json, serialize_report(&report, Format::Json));

    let md = serialize_report(&report, Format::Markdown);
    let order: Vec<usize> = ["## Metadata", "## Calibration", "## Data loss", "## Stimulus metrics"]
        .iter()
        .map(|h| md.find(h).unwrap())
        .collect();
    assert!(order.windows(2).all(|w| w[0] < w[1]));

    assert_eq!("xml".parse::<Format>(), Err(UnknownFormat("xml".into())));
}

#[test]
fn absent_rate_serializes_as_null() {
    let g = generate(&GenSpec {
        duration_ms: 4_000.0,
        trials: 1,
        blinks: 0,
        ..GenSpec::default()
    });
    let mut rec = parse_asc(&g.text).unwrap();
    rec.declarations.clear();
    let report = build_session_report(&rec, Source::from_bytes("x", b""), &ReportConfig::default());
    let v: Value = serde_json::from_str(&serialize_report(&report, Format::Json)).unwrap();
    assert_eq!(v["metadata"]["sampling_rate_hz"], Value::Null);
    assert_eq!(v["trials"][0]["data_loss"], Value::Null);
    assert!(report.warnings.iter().any(|w| w.contains("sampling rate unknown")));
}

#[test]
fn fallback_fixations_are_tagged() {
    let g = generate(&GenSpec {
        duration_ms: 6_000.0,
        trials: 1,
        blinks: 0,
        ..GenSpec::default()
    });
    let mut rec = parse_asc(&g.text).unwrap();
    let layout = load_aoi_csv("page", &grid_layout_csv(8, 9, 3)).unwrap();
    let config = ReportConfig {
        stimulus: StimulusBinding::Single(BoundLayout {
            path: "page.csv".into(),
            layout,
        }),
        ..ReportConfig::default()
    };
    let with = build_session_report(&rec, Source::from_bytes("x", b""), &config);
    let m = with.trials[0].stimulus_metrics.as_ref().unwrap();
    assert_eq!(format!("{:?}", m.fixation_stage), "Manufacturer");

    rec.events.retain(|e| !e.is_fixation());
    let without = build_session_report(&rec, Source::from_bytes("x", b""), &config);
    let m = without.trials[0].stimulus_metrics.as_ref().unwrap();
    assert_eq!(format!("{:?}", m.fixation_stage), "Fallback");
    assert!(m.num_fixations > 0);
    let v: Value = serde_json::to_value(&without).unwrap();
    assert_eq!(v["trials"][0]["stimulus_metrics"]["fixation_stage"], "fallback");
}

#[test]
fn unmapped_trials_warn_individually() {
    let g = generate(&GenSpec {
        duration_ms: 8_000.0,
        trials: 3,
        blinks: 0,
        ..GenSpec::default()
    });
    let layout = load_aoi_csv("page", &grid_layout_csv(4, 5, 3)).unwrap();
    let map = [("2".to_string(), BoundLayout { path: "a.csv".into(), layout })].into_iter().collect();
    let config = ReportConfig {
        stimulus: StimulusBinding::PerTrial(map),
        ..ReportConfig::default()
    };
    let r = session_report_from_bytes("s", g.text.as_bytes(), &config).unwrap();
    assert!(r.trials[1].stimulus_metrics.is_some());
    for i in [0, 2] {
        assert!(r.trials[i].stimulus_metrics.is_none());
        assert_eq!(r.trials[i].warnings.len(), 1);
    }
}

fn sessions(n: u64) -> Vec<SessionQualityReport> {
    let layout = load_aoi_csv("page", &grid_layout_csv(8, 9, 3)).unwrap();
    let config = ReportConfig {
        stimulus: StimulusBinding::Single(BoundLayout {
            path: "page.csv".into(),
            layout,
        }),
        ..ReportConfig::default()
    };
    (0..n)
        .map(|s| {
            let g = generate(&GenSpec {
                duration_ms: 6_000.0,
                trials: 2,
                blinks: (s % 3) as usize,
                validations: (s % 3) as usize,
                dropped: (s * 5 % 17) as usize,
                seed: 40 + s,
                ..GenSpec::default()
            });
            session_report_from_bytes(&format!("sub{s:02}.asc"), g.text.as_bytes(), &config).unwrap()
        })
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn aggregation_ignores_order_and_batching(perm in Just((0..8usize).collect::<Vec<_>>()).prop_shuffle(), cut in 0usize..8) {
        let reports = sessions(8);
        let reference = serialize_report(&aggregate_dataset(&reports).unwrap(), Format::Json);
        let shuffled: Vec<SessionQualityReport> = perm.iter().map(|&i| reports[i].clone()).collect();
        prop_assert_eq!(&serialize_report(&aggregate_dataset(&shuffled).unwrap(), Format::Json), &reference);

        let (a, b) = shuffled.split_at(cut);
        let mut left = DatasetAccumulator::new();
        a.iter().for_each(|r| left.add(r));
        let mut right = DatasetAccumulator::new();
        b.iter().for_each(|r| right.add(r));
        let merged = right.merge(left).finish().unwrap();
        prop_assert_eq!(&serialize_report(&merged, Format::Json), &reference);
    }
}

#[test]
fn dataset_summary_shape() {
    let reports = sessions(5);
    let d = aggregate_dataset(&reports).unwrap();
    assert_eq!(d.num_sessions, 5);
    for m in &d.metrics {
        assert_eq!(m.n, m.values.len());
        assert!(m.values.windows(2).all(|w| w[0].session_id < w[1].session_id));
        if m.n > 0 {
            let (lo, med, hi) = (m.min.unwrap(), m.median.unwrap(), m.max.unwrap());
            assert!(lo <= med && med <= hi);
        }
        if m.n >= 2 {
            let xs: Vec<f64> = m.values.iter().map(|v| v.value).collect();
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (xs.len() - 1) as f64;
            assert!((m.sd.unwrap() - var.sqrt()).abs() < 1e-12);
        }
    }
    let loss = d.metrics.iter().find(|m| m.metric == "loss_ratio_total").unwrap();
    assert_eq!(loss.n, 5);
    let validated = d.metrics.iter().find(|m| m.metric == "mean_validation_avg_error_deg").unwrap();
    assert_eq!(validated.n, 3);

    let one = aggregate_dataset(&reports[..1]).unwrap();
    assert!(one.metrics.iter().all(|m| m.sd.is_none()));
    assert!(aggregate_dataset(&[]).is_err());
}

#[test]
fn ratios_carry_six_significant_digits() {
    let g = generate(&GenSpec {
        duration_ms: 4_000.0,
        trials: 1,
        blinks: 0,
        dropped: 7,
        ..GenSpec::default()
    });
    let r = session_report_from_bytes("s", g.text.as_bytes(), &ReportConfig::default()).unwrap();
    let v: Value = serde_json::from_str(&serialize_report(&r, Format::Json)).unwrap();
    let total = v["trials"][0]["data_loss"][0]["loss_ratio_total"].as_f64().unwrap();
    let exact = r.trials[0].data_loss.as_ref().unwrap()[0].loss_ratio_total;
    assert_eq!(total, format!("{exact:.5e}").parse::<f64>().unwrap());
}

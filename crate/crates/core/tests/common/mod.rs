//! Synthetic recordings with known ground truth.
#![allow(dead_code)]

use std::collections::BTreeSet;

use gazeqc::asc::{
    write_asc, Block, Declaration, DeclarationKind, EventPayload, Eye, EyeChannel, EyeEvent,
    EyeLayout, GazePoint, GazeSample, HeaderLine, Message, Recording, Stage,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const T0: f64 = 1_000_000.0;
const SLOT_MS: f64 = 400.0;

#[derive(Debug, Clone)]
pub struct GenSpec {
    pub rate_hz: f64,
    pub duration_ms: f64,
    pub trials: usize,
    pub blinks: usize,
    pub validations: usize,
    /// Sample lines omitted inside trials.
    pub dropped: usize,
    /// Samples written with missing gaze inside trials, outside blinks.
    pub missing: usize,
    pub seed: u64,
}

impl Default for GenSpec {
    fn default() -> Self {
        GenSpec {
            rate_hz: 1000.0,
            duration_ms: 60_000.0,
            trials: 5,
            blinks: 12,
            validations: 2,
            dropped: 0,
            missing: 0,
            seed: 1,
        }
    }
}

/// What was planted in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct PlantedTrial {
    pub trial_id: String,
    pub start_ms: f64,
    pub end_ms: f64,
    pub expected: u64,
    /// Ticks without a valid sample: blinks, dropped lines and missing gaze.
    pub lost: u64,
    pub blink_ticks: u64,
    pub blinks: u64,
}

pub struct Generated {
    pub rec: Recording,
    pub text: String,
    pub trials: Vec<PlantedTrial>,
}

fn q(v: f64, scale: f64) -> f64 {
    (v * scale).round() / scale
}

/// A monocular (right eye) recording in one block. The block is cut into 400 ms
/// slots: a lead slot with calibration messages, then per trial a run of slots
/// followed by one gap slot. Trial slots hold a fixation and a saccade, or a blink.
pub fn generate(plan: &GenSpec) -> Generated {
    let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
    let period = 1000.0 / plan.rate_hz;
    let slot = (SLOT_MS * plan.rate_hz / 1000.0) as u64;
    let total_slots = (plan.duration_ms / SLOT_MS) as u64;
    let per_trial = (total_slots - 1) / plan.trials as u64 - 1;
    assert!(per_trial >= 1, "duration too short for the trial count");
    let ticks = total_slots * slot;
    let time = |k: u64| T0 + k as f64 * period;

    let trial_slots: Vec<Vec<u64>> = (0..plan.trials as u64)
        .map(|i| {
            let first = 1 + i * (per_trial + 1);
            (first..first + per_trial).collect()
        })
        .collect();
    let all_trial_slots: Vec<u64> = trial_slots.iter().flatten().copied().collect();
    assert!(plan.blinks <= all_trial_slots.len());
    let mut blink_slots = BTreeSet::new();
    while blink_slots.len() < plan.blinks {
        blink_slots.insert(all_trial_slots[rng.gen_range(0..all_trial_slots.len())]);
    }

    let mut gaze: Vec<Option<GazePoint>> = vec![None; ticks as usize];
    let mut in_blink = vec![false; ticks as usize];
    let mut events = Vec::new();
    let mut pos = GazePoint::new(640.0, 512.0);
    let random_point = |rng: &mut ChaCha8Rng| {
        GazePoint::new(
            rng.gen_range(1000..11800) as f64 / 10.0,
            rng.gen_range(1000..9000) as f64 / 10.0,
        )
    };
    let trial_slot_set: BTreeSet<u64> = all_trial_slots.iter().copied().collect();
    for s in 0..total_slots {
        let base = s * slot;
        if blink_slots.contains(&s) {
            let off = slot / 10;
            let len = rng.gen_range(slot / 8..=slot / 2);
            for k in base + off..base + off + len {
                in_blink[k as usize] = true;
            }
            for k in base..base + slot {
                if !in_blink[k as usize] {
                    gaze[k as usize] = Some(pos);
                }
            }
            events.push(EyeEvent {
                eye: Eye::Right,
                start_ms: time(base + off),
                end_ms: time(base + off + len - 1),
                payload: EventPayload::Blink,
                stage: Stage::Manufacturer,
            });
            continue;
        }
        let fix_end = base + slot * 3 / 4 - 1;
        let sacc_len = slot / 10;
        let next = random_point(&mut rng);
        for k in base..=fix_end {
            gaze[k as usize] = Some(pos);
        }
        for (i, k) in (fix_end + 1..fix_end + 1 + sacc_len).enumerate() {
            let f = (i + 1) as f64 / sacc_len as f64;
            gaze[k as usize] = Some(GazePoint::new(
                q(pos.x_px + (next.x_px - pos.x_px) * f, 10.0),
                q(pos.y_px + (next.y_px - pos.y_px) * f, 10.0),
            ));
        }
        for k in fix_end + 1 + sacc_len..base + slot {
            gaze[k as usize] = Some(next);
        }
        if trial_slot_set.contains(&s) {
            events.push(EyeEvent {
                eye: Eye::Right,
                start_ms: time(base),
                end_ms: time(fix_end),
                payload: EventPayload::Fixation {
                    position: Some(pos),
                    pupil: Some(rng.gen_range(800..1500) as f64),
                },
                stage: Stage::Manufacturer,
            });
            events.push(EyeEvent {
                eye: Eye::Right,
                start_ms: time(fix_end + 1),
                end_ms: time(fix_end + sacc_len),
                payload: EventPayload::Saccade {
                    start: Some(pos),
                    end: Some(next),
                    amplitude_deg: Some(rng.gen_range(50..1500) as f64 / 100.0),
                    peak_velocity_deg_s: Some(rng.gen_range(100..600) as f64),
                },
                stage: Stage::Manufacturer,
            });
        }
        pos = next;
    }
    events.sort_by(|a, b| a.end_ms.total_cmp(&b.end_ms));

    // dropped lines and missing gaze, inside trials and outside blinks
    let trial_ticks: Vec<u64> = all_trial_slots
        .iter()
        .flat_map(|&s| s * slot..(s + 1) * slot)
        .filter(|&k| !in_blink[k as usize])
        .collect();
    let mut dropped = BTreeSet::new();
    let mut missing = BTreeSet::new();
    assert!(plan.dropped + plan.missing <= trial_ticks.len());
    while dropped.len() < plan.dropped {
        dropped.insert(trial_ticks[rng.gen_range(0..trial_ticks.len())]);
    }
    while missing.len() < plan.missing {
        let k = trial_ticks[rng.gen_range(0..trial_ticks.len())];
        if !dropped.contains(&k) {
            missing.insert(k);
        }
    }

    let mut samples = Vec::with_capacity(ticks as usize);
    for k in 0..ticks {
        if dropped.contains(&k) {
            continue;
        }
        let ch = match gaze[k as usize] {
            Some(g) if !missing.contains(&k) && !in_blink[k as usize] => {
                EyeChannel::new(g.x_px, g.y_px, 1000.0 + (k % 7) as f64)
            }
            _ => EyeChannel::MISSING,
        };
        samples.push(GazeSample {
            time_ms: time(k),
            left: None,
            right: Some(ch),
            outside_block: false,
        });
    }

    let mut messages = vec![Message {
        time_ms: time(0),
        text: "DISPLAY_COORDS 0 0 1279 1023".into(),
    }];
    messages.push(Message {
        time_ms: time(1),
        text: "!CAL CALIBRATION HV9 R RIGHT GOOD".into(),
    });
    for v in 0..plan.validations as u64 {
        let avg = rng.gen_range(10..80) as f64 / 100.0;
        let max = avg + rng.gen_range(0..100) as f64 / 100.0;
        messages.push(Message {
            time_ms: time(2 + v),
            text: format!(
                "!CAL VALIDATION HV9 R RIGHT {} ERROR {avg:.2} avg. {max:.2} max OFFSET {:.2} deg. {:.1},{:.1} pix.",
                if avg < 0.5 { "GOOD" } else { "FAIR" },
                rng.gen_range(5..60) as f64 / 100.0,
                rng.gen_range(-300..300) as f64 / 10.0,
                rng.gen_range(-300..300) as f64 / 10.0,
            ),
        });
    }

    let mut planted = Vec::new();
    for (i, slots) in trial_slots.iter().enumerate() {
        let first = slots[0] * slot;
        let last = (slots[slots.len() - 1] + 1) * slot - 1;
        let id = (i + 1).to_string();
        messages.push(Message {
            time_ms: time(first),
            text: format!("TRIALID {id}"),
        });
        messages.push(Message {
            time_ms: time(last),
            text: "TRIAL_RESULT 0".into(),
        });
        let range = first..=last;
        let blink_ticks = range.clone().filter(|&k| in_blink[k as usize]).count() as u64;
        let lost = blink_ticks
            + dropped.iter().filter(|k| range.contains(k)).count() as u64
            + missing.iter().filter(|k| range.contains(k)).count() as u64;
        planted.push(PlantedTrial {
            trial_id: id,
            start_ms: time(first),
            end_ms: time(last),
            expected: last - first + 1,
            lost,
            blink_ticks,
            blinks: slots.iter().filter(|s| blink_slots.contains(s)).count() as u64,
        });
    }
    messages.sort_by(|a, b| a.time_ms.total_cmp(&b.time_ms));

    let decl = |kind| Declaration {
        kind,
        data_type: Some("GAZE".into()),
        eyes: EyeLayout::RIGHT,
        rate_hz: Some(plan.rate_hz),
        tracking: Some("CR".into()),
        filter: Some(2),
        flags: Vec::new(),
        block: Some(0),
    };
    let rec = Recording {
        header: vec![
            HeaderLine {
                key: "DATE".into(),
                value: "Wed Mar  4 10:15:02 2026".into(),
            },
            HeaderLine {
                key: "VERSION".into(),
                value: "EYELINK II 1".into(),
            },
        ],
        declarations: vec![decl(DeclarationKind::Samples), decl(DeclarationKind::Events)],
        blocks: vec![Block {
            start_ms: time(0),
            end_ms: time(ticks - 1),
            eyes: EyeLayout::RIGHT,
            synthetic: false,
        }],
        samples,
        events,
        messages,
        warnings: Vec::new(),
    };
    let text = write_asc(&rec);
    Generated {
        rec,
        text,
        trials: planted,
    }
}

/// A word layout on a grid: `lines` lines of `per_line` boxes, 20 px gaps.
pub fn grid_layout_csv(lines: u32, per_line: u32, seed: u64) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut csv = String::from("word_index,line_index,text,x_min,y_min,x_max,y_max\n");
    let mut idx = 0;
    for line in 0..lines {
        let y = 100.0 + line as f64 * 80.0;
        let mut x = 100.0;
        for _ in 0..per_line {
            let len = rng.gen_range(1..=12);
            let w = len as f64 * 9.0;
            let word: String = (0..len).map(|_| rng.gen_range(b'a'..=b'z') as char).collect();
            csv.push_str(&format!("{idx},{line},{word},{x},{y},{},{}\n", x + w, y + 40.0));
            x += w + 20.0;
            idx += 1;
        }
    }
    csv
}

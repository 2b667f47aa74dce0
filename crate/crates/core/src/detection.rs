//! Dispersion-threshold (I-DT) fixation detection, used when a recording carries
//! no manufacturer fixations. Every event produced here is tagged [`Stage::Fallback`].

use serde::Serialize;
use thiserror::Error;

use crate::asc::{EventPayload, Eye, EyeEvent, GazePoint, GazeSample, Stage};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct IdtParams {
    pub dispersion_threshold_px: f64,
    pub min_duration_ms: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Error)]
#[error("I-DT parameters must be strictly positive (dispersion {dispersion_threshold_px} px, duration {min_duration_ms} ms)")]
pub struct InvalidIdtParams {
    pub dispersion_threshold_px: f64,
    pub min_duration_ms: f64,
}

impl IdtParams {
    pub fn new(dispersion_threshold_px: f64, min_duration_ms: f64) -> Result<Self, InvalidIdtParams> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if ok(dispersion_threshold_px) && ok(min_duration_ms) {
            Ok(IdtParams {
                dispersion_threshold_px,
                min_duration_ms,
            })
        } else {
            Err(InvalidIdtParams {
                dispersion_threshold_px,
                min_duration_ms,
            })
        }
    }
}

impl Default for IdtParams {
    fn default() -> Self {
        IdtParams {
            dispersion_threshold_px: 25.0,
            min_duration_ms: 50.0,
        }
    }
}

#[derive(Clone, Copy)]
struct Point {
    t: f64,
    x: f64,
    y: f64,
    pupil: Option<f64>,
}

/// Running bounding box of a window.
#[derive(Clone, Copy)]
struct Bounds {
    min_x: f64,
    max_x: f64,
    min_y: f64,
    max_y: f64,
}

impl Bounds {
    fn of(p: &Point) -> Self {
        Bounds {
            min_x: p.x,
            max_x: p.x,
            min_y: p.y,
            max_y: p.y,
        }
    }

    fn extend(self, p: &Point) -> Self {
        Bounds {
            min_x: self.min_x.min(p.x),
            max_x: self.max_x.max(p.x),
            min_y: self.min_y.min(p.y),
            max_y: self.max_y.max(p.y),
        }
    }

    fn dispersion(&self) -> f64 {
        (self.max_x - self.min_x) + (self.max_y - self.min_y)
    }
}

/// Detects fixations of one eye with the dispersion-threshold rule.
///
/// Within each run of consecutive valid samples, a window starting at the first
/// unassigned sample is opened to cover `min_duration_ms`. If its dispersion
/// `(max x - min x) + (max y - min y)` is within the threshold it is grown sample by
/// sample while that still holds and emitted as one fixation at the window centroid;
/// otherwise the window start moves on by one sample. A sample with missing gaze
/// ends the run, so no window spans data loss.
pub fn detect_fixations_idt(samples: &[GazeSample], eye: Eye, params: &IdtParams) -> Vec<EyeEvent> {
    let mut fixations = Vec::new();
    let mut run: Vec<Point> = Vec::new();
    for s in samples {
        match s.channel(eye).and_then(|c| c.gaze.map(|g| (g, c.pupil))) {
            Some((g, pupil)) => run.push(Point {
                t: s.time_ms,
                x: g.x_px,
                y: g.y_px,
                pupil,
            }),
            None => {
                detect_in_run(&run, eye, params, &mut fixations);
                run.clear();
            }
        }
    }
    detect_in_run(&run, eye, params, &mut fixations);
    fixations
}

fn detect_in_run(run: &[Point], eye: Eye, params: &IdtParams, out: &mut Vec<EyeEvent>) {
    let n = run.len();
    let mut i = 0;
    // first index whose time reaches run[i].t + min duration; monotone in i
    let mut j = 0;
    while i < n {
        j = j.max(i);
        while j < n && run[j].t - run[i].t < params.min_duration_ms {
            j += 1;
        }
        if j >= n {
            break;
        }
        let bounds = run[i + 1..=j].iter().fold(Bounds::of(&run[i]), |b, p| b.extend(p));
        if bounds.dispersion() > params.dispersion_threshold_px {
            i += 1;
            continue;
        }
        let mut bounds = bounds;
        let mut end = j;
        while end + 1 < n {
            let grown = bounds.extend(&run[end + 1]);
            if grown.dispersion() > params.dispersion_threshold_px {
                break;
            }
            bounds = grown;
            end += 1;
        }
        out.push(fixation(&run[i..=end], eye));
        i = end + 1;
    }
}

fn fixation(points: &[Point], eye: Eye) -> EyeEvent {
    let n = points.len() as f64;
    let x = points.iter().map(|p| p.x).sum::<f64>() / n;
    let y = points.iter().map(|p| p.y).sum::<f64>() / n;
    let pupils: Vec<f64> = points.iter().filter_map(|p| p.pupil).collect();
    let pupil = (!pupils.is_empty()).then(|| pupils.iter().sum::<f64>() / pupils.len() as f64);
    EyeEvent {
        eye,
        start_ms: points[0].t,
        end_ms: points[points.len() - 1].t,
        payload: EventPayload::Fixation {
            position: Some(GazePoint::new(x, y)),
            pupil,
        },
        stage: Stage::Fallback,
    }
}

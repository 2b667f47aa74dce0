//! Word-level AOIs and the reading-quality metrics computed from them.
//!
//! Fixations are mapped to words by centroid containment only. There is no snapping
//! to the nearest word, so calibration offsets show up in the metrics instead of
//! being silently repaired.

mod layout;
mod metrics;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

pub use layout::{
    assign_fixation, assign_fixations, load_aoi_csv, AoiError, AoiIndex, AoiTarget, AoiWord,
    FixationAssignment, StimulusLayout, AOI_COLUMNS,
};
pub use metrics::{
    background_dwell, compute_stimulus_metrics, multi_line_jump_ratio, reading_speed, spearman,
    word_length_effect, word_skip_rate, MetricError, StimulusMetricsReport,
};

#[derive(Debug, Error)]
pub enum BindingError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Aoi { path: PathBuf, source: AoiError },
    #[error("stimulus map {path}: {reason}")]
    Map { path: PathBuf, reason: String },
}

/// A layout together with the file it came from.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundLayout {
    pub path: String,
    pub layout: StimulusLayout,
}

/// How trials find their AOI layout.
#[derive(Debug, Clone, PartialEq, Default)]
pub enum StimulusBinding {
    #[default]
    None,
    /// One layout for every trial.
    Single(BoundLayout),
    /// Layouts keyed by trial id.
    PerTrial(BTreeMap<String, BoundLayout>),
}

impl StimulusBinding {
    pub fn layout_for(&self, trial_id: &str) -> Option<&BoundLayout> {
        match self {
            StimulusBinding::None => None,
            StimulusBinding::Single(l) => Some(l),
            StimulusBinding::PerTrial(map) => map.get(trial_id),
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self, StimulusBinding::None)
    }

    /// Loads one AOI CSV; the stimulus id is the file stem.
    pub fn single(path: &Path) -> Result<Self, BindingError> {
        Ok(StimulusBinding::Single(load_layout_file(path, None)?))
    }

    /// Loads a `trial_id,stimulus_id,aoi_path` map. Relative AOI paths resolve
    /// against the map's directory.
    pub fn from_map(path: &Path) -> Result<Self, BindingError> {
        #[derive(Deserialize)]
        struct Row {
            trial_id: String,
            stimulus_id: String,
            aoi_path: String,
        }
        let map_err = |reason: String| BindingError::Map {
            path: path.to_path_buf(),
            reason,
        };
        let text = std::fs::read_to_string(path).map_err(|source| BindingError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        let base = path.parent().unwrap_or(Path::new(""));
        let mut reader = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(text.as_bytes());
        let mut loaded: BTreeMap<String, BoundLayout> = BTreeMap::new();
        let mut map = BTreeMap::new();
        for row in reader.deserialize::<Row>() {
            let row = row.map_err(|e| map_err(e.to_string()))?;
            let aoi = base.join(&row.aoi_path);
            let key = aoi.display().to_string();
            let bound = match loaded.get(&key) {
                Some(b) => b.clone(),
                None => {
                    let b = load_layout_file(&aoi, Some(&row.stimulus_id))?;
                    loaded.insert(key, b.clone());
                    b
                }
            };
            if map.insert(row.trial_id.clone(), bound).is_some() {
                return Err(map_err(format!("trial {:?} mapped twice", row.trial_id)));
            }
        }
        Ok(StimulusBinding::PerTrial(map))
    }
}

fn load_layout_file(path: &Path, stimulus_id: Option<&str>) -> Result<BoundLayout, BindingError> {
    let text = std::fs::read_to_string(path).map_err(|source| BindingError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = stimulus_id.map(str::to_string).unwrap_or_else(|| {
        path.file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default()
    });
    let layout = load_aoi_csv(&id, &text).map_err(|source| BindingError::Aoi {
        path: path.to_path_buf(),
        source,
    })?;
    Ok(BoundLayout {
        path: path.display().to_string(),
        layout,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn map_binding() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(
            dir.path().join("a.csv"),
            "word_index,line_index,text,x_min,y_min,x_max,y_max\n0,0,hi,0,0,10,10\n",
        )
        .unwrap();
        let map = dir.path().join("map.csv");
        std::fs::write(&map, "trial_id,stimulus_id,aoi_path\n1,textA,a.csv\n2,textA,a.csv\n").unwrap();
        let b = StimulusBinding::from_map(&map).unwrap();
        assert_eq!(b.layout_for("1").unwrap().layout.stimulus_id, "textA");
        assert!(b.layout_for("2").is_some());
        assert!(b.layout_for("3").is_none());

        std::fs::write(&map, "trial_id,stimulus_id,aoi_path\n1,t,missing.csv\n").unwrap();
        assert!(matches!(StimulusBinding::from_map(&map), Err(BindingError::Io { .. })));
        std::fs::write(&map, "trial_id,stimulus_id,aoi_path\n1,t,a.csv\n1,t,a.csv\n").unwrap();
        assert!(matches!(StimulusBinding::from_map(&map), Err(BindingError::Map { .. })));
    }

    #[test]
    fn single_binding_uses_file_stem() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("story.csv");
        std::fs::write(&p, "word_index,line_index,text,x_min,y_min,x_max,y_max\n0,0,hi,0,0,10,10\n").unwrap();
        let b = StimulusBinding::single(&p).unwrap();
        assert_eq!(b.layout_for("anything").unwrap().layout.stimulus_id, "story");
    }
}

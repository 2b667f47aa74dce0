//! File-level entry points shared by the binary and the tests.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use thiserror::Error;
use walkdir::WalkDir;

use crate::asc::{AscError, TrialMarkers};
use crate::detection::{IdtParams, InvalidIdtParams};
use crate::report::{
    session_report_from_bytes, DatasetAccumulator, DatasetError, DatasetQualityReport,
    ReportConfig, SessionQualityReport,
};
use crate::stimulus::{load_aoi_csv, AoiError, BindingError, StimulusBinding, StimulusLayout};

#[derive(Debug, Error)]
pub enum RunError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Parse { path: PathBuf, source: AscError },
    #[error("{0}")]
    Dataset(#[from] DatasetError),
    #[error("invalid pattern {pattern:?}: {reason}")]
    Pattern { pattern: String, reason: String },
    #[error(transparent)]
    Binding(#[from] BindingError),
    #[error("{path}: {source}")]
    Aoi { path: PathBuf, source: AoiError },
    #[error(transparent)]
    Params(#[from] InvalidIdtParams),
    #[error("{0}")]
    Config(String),
    #[error("strict mode: {0} warning(s) reported")]
    Strict(usize),
}

impl RunError {
    /// Process exit code: 1 for input and parse failures, 2 for stimulus and
    /// configuration errors, 3 for warnings under `--strict`.
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Io { .. }
            | RunError::Parse { .. }
            | RunError::Dataset(_)
            | RunError::Pattern { .. } => 1,
            RunError::Binding(_) | RunError::Aoi { .. } | RunError::Params(_) | RunError::Config(_) => 2,
            RunError::Strict(_) => 3,
        }
    }
}

/// Command-line style options, resolved into a [`ReportConfig`] by [`build_config`].
#[derive(Debug, Clone, Default)]
pub struct Options {
    pub trial_start: Option<String>,
    pub trial_end: Option<String>,
    pub dispersion_px: Option<f64>,
    pub min_fix_ms: Option<f64>,
    pub stimulus: Option<PathBuf>,
    pub stimulus_map: Option<PathBuf>,
}

pub fn build_config(opts: &Options) -> Result<ReportConfig, RunError> {
    let defaults = TrialMarkers::default();
    let markers = TrialMarkers {
        start: opts.trial_start.clone().unwrap_or(defaults.start),
        end: opts.trial_end.clone().unwrap_or(defaults.end),
    };
    if markers.start.is_empty() || markers.end.is_empty() {
        return Err(RunError::Config("trial markers must not be empty".into()));
    }
    let d = IdtParams::default();
    let idt = IdtParams::new(
        opts.dispersion_px.unwrap_or(d.dispersion_threshold_px),
        opts.min_fix_ms.unwrap_or(d.min_duration_ms),
    )?;
    let stimulus = match (&opts.stimulus, &opts.stimulus_map) {
        (Some(_), Some(_)) => {
            return Err(RunError::Config(
                "--stimulus and --stimulus-map are mutually exclusive".into(),
            ))
        }
        (Some(p), None) => StimulusBinding::single(p)?,
        (None, Some(p)) => StimulusBinding::from_map(p)?,
        (None, None) => StimulusBinding::None,
    };
    Ok(ReportConfig {
        markers,
        idt,
        stimulus,
        stimulus_map_path: opts.stimulus_map.as_ref().map(|p| p.display().to_string()),
    })
}

pub fn run_session(path: &Path, config: &ReportConfig) -> Result<SessionQualityReport, RunError> {
    let bytes = std::fs::read(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    session_report_from_bytes(&path.display().to_string(), &bytes, config).map_err(|source| {
        RunError::Parse {
            path: path.to_path_buf(),
            source,
        }
    })
}

/// Files under `dir` whose path relative to `dir` matches `pattern`, sorted.
pub fn find_sessions(dir: &Path, pattern: &str) -> Result<Vec<PathBuf>, RunError> {
    let pat = glob::Pattern::new(pattern).map_err(|e| RunError::Pattern {
        pattern: pattern.to_string(),
        reason: e.to_string(),
    })?;
    if !dir.is_dir() {
        return Err(RunError::Io {
            path: dir.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, "not a directory"),
        });
    }
    let mut files: Vec<PathBuf> = WalkDir::new(dir)
        .into_iter()
        .filter_map(Result::ok)
        .filter(|e| e.file_type().is_file())
        .filter(|e| {
            let rel = e.path().strip_prefix(dir).unwrap_or(e.path());
            pat.matches_path(rel) || e.file_name().to_str().is_some_and(|n| pat.matches(n))
        })
        .map(|e| e.into_path())
        .collect();
    files.sort();
    Ok(files)
}

/// Reports every matching session and aggregates them. Sessions that fail to
/// read or parse are listed as dataset warnings; with none left the run fails.
/// Returns the session reports alongside the dataset report.
pub fn run_dataset(
    dir: &Path,
    pattern: &str,
    config: &ReportConfig,
    jobs: usize,
) -> Result<(Vec<SessionQualityReport>, DatasetQualityReport), RunError> {
    let files = find_sessions(dir, pattern)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| RunError::Config(e.to_string()))?;
    let results: Vec<Result<SessionQualityReport, RunError>> =
        pool.install(|| files.par_iter().map(|f| run_session(f, config)).collect());
    let mut acc = DatasetAccumulator::new();
    let mut sessions = Vec::new();
    for r in results {
        match r {
            Ok(report) => {
                acc.add(&report);
                sessions.push(report);
            }
            Err(e) => acc.warn(format!("session skipped: {e}")),
        }
    }
    Ok((sessions, acc.finish()?))
}

pub fn validate_aoi(path: &Path) -> Result<StimulusLayout, RunError> {
    let text = std::fs::read_to_string(path).map_err(|source| RunError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let id = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    load_aoi_csv(&id, &text).map_err(|source| RunError::Aoi {
        path: path.to_path_buf(),
        source,
    })
}

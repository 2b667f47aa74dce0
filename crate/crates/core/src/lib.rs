//! Data-quality reporting for EyeLink ASC eye-tracking recordings.
//!
//! The pipeline is split along the stages of the data:
//!
//! - [`asc`] parses the raw text export into a [`asc::Recording`] and segments it into trials.
//! - [`metadata`], [`calibration`] and [`data_loss`] derive the stimulus-independent
//!   session and trial reports.
//! - [`detection`] provides a dispersion-based fixation fallback for recordings
//!   published without manufacturer events.
//! - [`stimulus`] maps fixations onto word AOIs and computes reading-quality metrics.
//! - [`report`] assembles session and dataset reports and serializes them.
//! - [`run`] binds files and configuration together; the `gazeqc` binary is a thin
//!   wrapper around it.

pub mod asc;
pub mod calibration;
pub mod data_loss;
pub mod detection;
pub mod metadata;
pub mod report;
pub mod run;
pub mod stimulus;

mod num;

pub use asc::{parse_asc, parse_asc_with_fallback, AscError, Recording};
pub use report::{
    aggregate_dataset, build_session_report, serialize_report, DatasetQualityReport, Format,
    ReportConfig, SessionQualityReport,
};

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gazeqc::report::Report;
use gazeqc::run::{build_config, run_dataset, run_session, validate_aoi, Options, RunError};
use gazeqc::{serialize_report, Format};

/// Data-quality reports for EyeLink ASC recordings.
#[derive(Parser)]
#[command(name = "gazeqc", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Report on a single ASC file.
    Report {
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Report on every matching ASC file under a directory and aggregate.
    Dataset {
        dir: PathBuf,
        /// Pattern matched against paths relative to DIR, or file names.
        #[arg(long, default_value = "*.asc")]
        glob: String,
        /// Worker threads (defaults to the number of CPUs).
        #[arg(long)]
        jobs: Option<usize>,
        #[command(flatten)]
        common: Common,
    },
    /// Check an AOI layout CSV.
    ValidateAoi { csv: PathBuf },
}

#[derive(Args)]
struct Common {
    /// Message prefix that opens a trial.
    #[arg(long)]
    trial_start: Option<String>,
    /// Message prefix that closes a trial.
    #[arg(long)]
    trial_end: Option<String>,
    /// I-DT dispersion threshold in pixels.
    #[arg(long)]
    dispersion_px: Option<f64>,
    /// I-DT minimum fixation duration in ms.
    #[arg(long)]
    min_fix_ms: Option<f64>,
    /// AOI layout used for every trial.
    #[arg(long)]
    stimulus: Option<PathBuf>,
    /// CSV mapping trial_id,stimulus_id,aoi_path.
    #[arg(long)]
    stimulus_map: Option<PathBuf>,
    /// json or markdown.
    #[arg(long, default_value = "json")]
    format: String,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit with code 3 if any warning was reported.
    #[arg(long)]
    strict: bool,
}

impl Common {
    fn options(&self) -> Options {
        Options {
            trial_start: self.trial_start.clone(),
            trial_end: self.trial_end.clone(),
            dispersion_px: self.dispersion_px,
            min_fix_ms: self.min_fix_ms,
            stimulus: self.stimulus.clone(),
            stimulus_map: self.stimulus_map.clone(),
        }
    }

    fn format(&self) -> Result<Format, RunError> {
        self.format.parse().map_err(|e: gazeqc::report::UnknownFormat| RunError::Config(e.to_string()))
    }
}

fn emit<R: Report>(report: &R, format: Format, out: Option<&Path>) -> Result<(), RunError> {
    let text = serialize_report(report, format);
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| RunError::Io {
            path: path.to_path_buf(),
            source,
        }),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn strict_check(strict: bool, warnings: usize) -> Result<(), RunError> {
    if strict && warnings > 0 {
        Err(RunError::Strict(warnings))
    } else {
        Ok(())
    }
}

fn run(cli: Cli) -> Result<(), RunError> {
    match cli.command {
        Command::Report { input, common } => {
            let format = common.format()?;
            let config = build_config(&common.options())?;
            let report = run_session(&input, &config)?;
            let n = report.warning_count();
            if n > 0 {
                eprintln!("{}: {n} warning(s)", input.display());
            }
            emit(&report, format, common.out.as_deref())?;
            strict_check(common.strict, n)
        }
        Command::Dataset {
            dir,
            glob,
            jobs,
            common,
        } => {
            let format = common.format()?;
            let config = build_config(&common.options())?;
            let jobs = jobs.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()));
            let (sessions, report) = run_dataset(&dir, &glob, &config, jobs)?;
            for w in &report.warnings {
                eprintln!("{w}");
            }
            let n = report.warnings.len() + sessions.iter().map(|s| s.warning_count()).sum::<usize>();
            eprintln!("{} session(s), {n} warning(s)", report.num_sessions);
            emit(&report, format, common.out.as_deref())?;
            strict_check(common.strict, n)
        }
        Command::ValidateAoi { csv } => {
            let layout = validate_aoi(&csv)?;
            println!(
                "{}: {} words on {} lines",
                csv.display(),
                layout.words.len(),
                layout.line_count
            );
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

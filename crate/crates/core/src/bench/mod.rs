//! Monte-Carlo benchmark harness: scenario configuration, single trials,
//! parameter sweeps, CSV/SVG output and seed-exact replay.

use std::path::PathBuf;

use thiserror::Error;

mod config;
mod experiment;
mod replay;
mod report;
mod stats;
mod trial;

pub use config::{ConfigFile, Experiment, Placement, ScenarioConfig, Strategy, SweepConfig};
pub use experiment::{
    read_summary, run_experiment, trial_record, CellResult, ExperimentOutput, RunOptions,
    SummaryRow, DECISIONS_HEADER, TRAJECTORY_HEADER, TRIALS_HEADER,
};
pub use replay::{replay, ReplayReport, RowDiff};
pub use report::{metric_chart, report, write_charts};
pub use stats::SummaryStats;
pub use trial::{
    initial_world, run_trial, run_trial_seeded, splitmix64, trial_seed, DecisionRecord,
    TrajectoryRow, TrialOptions, TrialResult,
};

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Gut(#[from] crate::gut::GutError),
}

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ConfigFile, Experiment, ScenarioConfig, Strategy, SweepConfig};
use super::report::write_charts;
use super::stats::SummaryStats;
use super::trial::{run_trial, TrajectoryRow, TrialOptions, TrialResult};
use super::BenchError;

pub const TRIALS_HEADER: [&str; 8] = [
    "trial_index",
    "strategy",
    "pursuers",
    "speed_ratio",
    "captured",
    "capture_time_s",
    "avg_energy",
    "seed",
];

pub const DECISIONS_HEADER: [&str; 13] = [
    "strategy",
    "pursuers",
    "speed_ratio",
    "trial_index",
    "time_s",
    "formation",
    "tactic",
    "level1_pair",
    "level2_pair",
    "level1_gap",
    "level2_gap",
    "level1_payoff_a",
    "level2_payoff_a",
];

pub const TRAJECTORY_HEADER: [&str; 7] = ["time_s", "agent", "x", "y", "vx", "vy", "energy"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: Strategy,
    pub pursuers: usize,
    pub speed_ratio: f64,
    pub trials: usize,
    pub captures: usize,
    pub capture_rate: f64,
    /// Timeouts count at `max_time`.
    pub capture_time: SummaryStats,
    pub avg_energy: SummaryStats,
}

impl SummaryRow {
    pub fn from_trials(trials: &[TrialResult]) -> Self {
        let first = &trials[0];
        let captures = trials.iter().filter(|t| t.captured).count();
        let times: Vec<f64> = trials.iter().map(|t| t.capture_time).collect();
        let energies: Vec<f64> = trials.iter().map(|t| t.avg_energy).collect();
        Self {
            strategy: first.strategy,
            pursuers: first.pursuers,
            speed_ratio: first.speed_ratio,
            trials: trials.len(),
            captures,
            capture_rate: captures as f64 / trials.len() as f64,
            capture_time: SummaryStats::from_values(&times),
            avg_energy: SummaryStats::from_values(&energies),
        }
    }

    pub const HEADER: [&'static str; 14] = [
        "strategy",
        "pursuers",
        "speed_ratio",
        "trials",
        "captures",
        "capture_rate",
        "capture_time_mean",
        "capture_time_std",
        "capture_time_min",
        "capture_time_max",
        "avg_energy_mean",
        "avg_energy_std",
        "avg_energy_min",
        "avg_energy_max",
    ];

    fn record(&self) -> Vec<String> {
        let t = &self.capture_time;
        let e = &self.avg_energy;
        vec![
            self.strategy.to_string(),
            self.pursuers.to_string(),
            self.speed_ratio.to_string(),
            self.trials.to_string(),
            self.captures.to_string(),
            self.capture_rate.to_string(),
            t.mean.to_string(),
            t.std.to_string(),
            t.min.to_string(),
            t.max.to_string(),
            e.mean.to_string(),
            e.std.to_string(),
            e.min.to_string(),
            e.max.to_string(),
        ]
    }

    fn parse(rec: &csv::StringRecord) -> Result<Self, BenchError> {
        let bad = || BenchError::Config(format!("malformed summary row: {rec:?}"));
        if rec.len() != Self::HEADER.len() {
            return Err(bad());
        }
        let f = |i: usize| rec[i].parse::<f64>().map_err(|_| bad());
        let u = |i: usize| rec[i].parse::<usize>().map_err(|_| bad());
        let trials = u(3)?;
        Ok(Self {
            strategy: rec[0].parse()?,
            pursuers: u(1)?,
            speed_ratio: f(2)?,
            trials,
            captures: u(4)?,
            capture_rate: f(5)?,
            capture_time: SummaryStats {
                n: trials,
                mean: f(6)?,
                std: f(7)?,
                min: f(8)?,
                max: f(9)?,
            },
            avg_energy: SummaryStats {
                n: trials,
                mean: f(10)?,
                std: f(11)?,
                min: f(12)?,
                max: f(13)?,
            },
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub config: ScenarioConfig,
    pub trials: Vec<TrialResult>,
    pub summary: SummaryRow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunOptions {
    pub trajectories: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub cells: Vec<CellResult>,
    pub files: Vec<PathBuf>,
}

impl ExperimentOutput {
    pub fn summary(&self) -> Vec<SummaryRow> {
        self.cells.iter().map(|c| c.summary.clone()).collect()
    }

    pub fn cell(
        &self,
        strategy: Strategy,
        pursuers: usize,
        speed_ratio: f64,
    ) -> Option<&CellResult> {
        self.cells.iter().find(|c| {
            c.config.strategy == strategy
                && c.config.pursuer_count == pursuers
                && c.config.speed_ratio == speed_ratio
        })
    }
}

/// Runs every trial of every cell, in parallel, and writes the result files
/// into `out_dir` when given.
pub fn run_experiment(
    experiment: &Experiment,
    out_dir: Option<&Path>,
    options: RunOptions,
) -> Result<ExperimentOutput, BenchError> {
    experiment.validate()?;
    let cells = experiment.cells();
    let jobs: Vec<(usize, usize)> = cells
        .iter()
        .enumerate()
        .flat_map(|(c, cfg)| (0..cfg.trials).map(move |t| (c, t)))
        .collect();
    let trial_opts = TrialOptions {
        record_trajectory: options.trajectories && out_dir.is_some(),
        record_decisions: out_dir.is_some(),
    };
    let results: Vec<TrialResult> = jobs
        .par_iter()
        .map(|&(c, t)| run_trial(&cells[c], t, trial_opts))
        .collect::<Result<_, _>>()?;

    let mut grouped: Vec<Vec<TrialResult>> = vec![Vec::new(); cells.len()];
    for ((c, _), r) in jobs.iter().zip(results) {
        grouped[*c].push(r);
    }
    let cells: Vec<CellResult> = cells
        .into_iter()
        .zip(grouped)
        .map(|(config, trials)| CellResult {
            summary: SummaryRow::from_trials(&trials),
            config,
            trials,
        })
        .collect();

    let files = match out_dir {
        Some(dir) => write_outputs(experiment, &cells, dir)?,
        None => Vec::new(),
    };
    Ok(ExperimentOutput { cells, files })
}

fn io_err(path: &Path) -> impl FnOnce(std::io::Error) -> BenchError + '_ {
    move |source| BenchError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn generated_line() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    format!("# generated_unix={secs}\n")
}

/// Writes a CSV file with a leading metadata comment.
pub(crate) fn write_csv<I>(path: &Path, header: &[&str], rows: I) -> Result<(), BenchError>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file = fs::File::create(path).map_err(io_err(path))?;
    file.write_all(generated_line().as_bytes())
        .map_err(io_err(path))?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush().map_err(io_err(path))?;
    Ok(())
}

/// Reads CSV records, skipping `#` comment lines.
pub(crate) fn read_csv(path: &Path) -> Result<Vec<csv::StringRecord>, BenchError> {
    let file = fs::File::open(path).map_err(io_err(path))?;
    let mut r = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .from_reader(file);
    r.records()
        .map(|rec| rec.map_err(BenchError::from))
        .collect()
}

pub fn trial_record(t: &TrialResult) -> Vec<String> {
    vec![
        t.trial_index.to_string(),
        t.strategy.to_string(),
        t.pursuers.to_string(),
        t.speed_ratio.to_string(),
        t.captured.to_string(),
        t.capture_time.to_string(),
        t.avg_energy.to_string(),
        t.seed.to_string(),
    ]
}

fn decision_records(t: &TrialResult) -> impl Iterator<Item = Vec<String>> + '_ {
    let join = |v: &[f64; 4]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(" ");
    let l1 = |p: (usize, usize)| {
        format!(
            "{}/{}",
            crate::payoff::LEVEL1_ROWS[p.0],
            crate::payoff::LEVEL1_COLS[p.1]
        )
    };
    let l2 = |p: (usize, usize)| {
        format!(
            "{}/{}",
            crate::payoff::LEVEL2_ROWS[p.0],
            crate::payoff::LEVEL2_COLS[p.1]
        )
    };
    t.decision_log.iter().map(move |d| {
        vec![
            t.strategy.to_string(),
            t.pursuers.to_string(),
            t.speed_ratio.to_string(),
            t.trial_index.to_string(),
            d.time.to_string(),
            d.formation.label().to_string(),
            d.tactic.label().to_string(),
            l1(d.level1_pair),
            l2(d.level2_pair),
            d.level1_gap.to_string(),
            d.level2_gap.to_string(),
            join(&d.level1_payoff_a),
            join(&d.level2_payoff_a),
        ]
    })
}

pub fn trajectory_records(rows: &[TrajectoryRow]) -> impl Iterator<Item = Vec<String>> + '_ {
    rows.iter().map(|r| {
        vec![
            r.time.to_string(),
            r.agent.clone(),
            r.position.x.to_string(),
            r.position.y.to_string(),
            r.velocity.x.to_string(),
            r.velocity.y.to_string(),
            r.energy.to_string(),
        ]
    })
}

pub fn trajectory_file_name(t: &TrialResult) -> String {
    format!(
        "{}_{}p_{}_{}.csv",
        t.strategy, t.pursuers, t.speed_ratio, t.trial_index
    )
}

fn write_outputs(
    experiment: &Experiment,
    cells: &[CellResult],
    dir: &Path,
) -> Result<Vec<PathBuf>, BenchError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut files = Vec::new();

    let config_path = dir.join("config.toml");
    let file = ConfigFile {
        scenario: experiment.base.clone(),
        sweep: SweepConfig {
            strategies: experiment.strategies.clone(),
            pursuer_counts: experiment.pursuer_counts.clone(),
            speed_ratios: experiment.speed_ratios.clone(),
        },
    };
    fs::write(&config_path, file.to_toml()).map_err(io_err(&config_path))?;
    files.push(config_path);

    let trials = || cells.iter().flat_map(|c| c.trials.iter());
    let path = dir.join("trials.csv");
    write_csv(&path, &TRIALS_HEADER, trials().map(trial_record))?;
    files.push(path);

    let path = dir.join("summary.csv");
    write_csv(
        &path,
        &SummaryRow::HEADER,
        cells.iter().map(|c| c.summary.record()),
    )?;
    files.push(path);

    let path = dir.join("decisions.csv");
    write_csv(
        &path,
        &DECISIONS_HEADER,
        trials().flat_map(decision_records),
    )?;
    files.push(path);

    if trials().any(|t| t.trajectory.is_some()) {
        let tdir = dir.join("trajectories");
        fs::create_dir_all(&tdir).map_err(io_err(&tdir))?;
        for t in trials() {
            if let Some(rows) = &t.trajectory {
                let path = tdir.join(trajectory_file_name(t));
                write_csv(&path, &TRAJECTORY_HEADER, trajectory_records(rows))?;
                files.push(path);
            }
        }
    }

    let summary: Vec<SummaryRow> = cells.iter().map(|c| c.summary.clone()).collect();
    files.extend(write_charts(&summary, &dir.join("charts"))?);
    Ok(files)
}

/// Loads `summary.csv` written by [`run_experiment`].
pub fn read_summary(path: &Path) -> Result<Vec<SummaryRow>, BenchError> {
    read_csv(path)?.iter().map(SummaryRow::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> Experiment {
        let base = ScenarioConfig {
            trials: 4,
            max_time: 30.0,
            ..ScenarioConfig::default()
        };
        Experiment {
            base,
            strategies: Strategy::ALL.to_vec(),
            pursuer_counts: vec![3],
            speed_ratios: vec![1.5],
        }
    }

    #[test]
    fn grouping_preserves_trial_order() {
        let out = run_experiment(&small(), None, RunOptions::default()).unwrap();
        assert_eq!(out.cells.len(), 3);
        for c in &out.cells {
            let idx: Vec<usize> = c.trials.iter().map(|t| t.trial_index).collect();
            assert_eq!(idx, vec![0, 1, 2, 3]);
            assert!(c.trials.iter().all(|t| t.strategy == c.config.strategy));
            assert_eq!(c.summary.trials, 4);
        }
        assert!(out.files.is_empty());
    }

    #[test]
    fn parallel_run_matches_sequential_trials() {
        let e = small();
        let out = run_experiment(&e, None, RunOptions::default()).unwrap();
        for c in &out.cells {
            for t in &c.trials {
                let again = run_trial(&c.config, t.trial_index, TrialOptions::default()).unwrap();
                assert_eq!(trial_record(&again), trial_record(t));
            }
        }
    }

    #[test]
    fn summary_round_trips_through_csv() {
        let dir = tempfile::tempdir().unwrap();
        let out = run_experiment(&small(), Some(dir.path()), RunOptions::default()).unwrap();
        let back = read_summary(&dir.path().join("summary.csv")).unwrap();
        assert_eq!(back, out.summary());
    }
}

use std::fs;
use std::path::Path;

use rayon::prelude::*;

use super::config::{ConfigFile, Experiment, Strategy};
use super::experiment::{
    read_csv, trajectory_file_name, trajectory_records, trial_record, TRIALS_HEADER,
};
use super::trial::{run_trial_seeded, TrialOptions};
use super::BenchError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowDiff {
    pub row: usize,
    pub expected: Vec<String>,
    pub actual: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ReplayReport {
    pub rows_checked: usize,
    pub row_diffs: Vec<RowDiff>,
    pub trajectories_checked: usize,
    /// File names of trajectories that did not reproduce.
    pub trajectory_diffs: Vec<String>,
}

impl ReplayReport {
    pub fn is_identical(&self) -> bool {
        self.row_diffs.is_empty() && self.trajectory_diffs.is_empty()
    }
}

/// Strips the metadata comment so files written at different times compare equal.
fn body(text: &str) -> &str {
    match text.strip_prefix('#') {
        Some(rest) => rest.split_once('\n').map_or("", |(_, b)| b),
        None => text,
    }
}

/// Re-runs every trial listed in a run directory's `trials.csv` from its
/// recorded seed and compares the regenerated rows with the stored ones.
pub fn replay(run_dir: &Path) -> Result<ReplayReport, BenchError> {
    let cfg = ConfigFile::load(&run_dir.join("config.toml"))?;
    let experiment = Experiment::grid(cfg.scenario, &cfg.sweep);
    let records = read_csv(&run_dir.join("trials.csv"))?;
    let traj_dir = run_dir.join("trajectories");
    let with_traj = traj_dir.is_dir();

    let outcomes: Vec<(Option<RowDiff>, Option<(String, bool)>)> = records
        .par_iter()
        .enumerate()
        .map(|(row, rec)| {
            let bad = || BenchError::Config(format!("malformed trials.csv row {row}"));
            if rec.len() != TRIALS_HEADER.len() {
                return Err(bad());
            }
            let index: usize = rec[0].parse().map_err(|_| bad())?;
            let strategy: Strategy = rec[1].parse()?;
            let pursuers: usize = rec[2].parse().map_err(|_| bad())?;
            let ratio: f64 = rec[3].parse().map_err(|_| bad())?;
            let seed: u64 = rec[7].parse().map_err(|_| bad())?;
            let config = experiment.base.with_cell(strategy, pursuers, ratio);
            let opts = TrialOptions {
                record_trajectory: with_traj,
                record_decisions: false,
            };
            let result = run_trial_seeded(&config, index, seed, opts)?;
            let expected: Vec<String> = rec.iter().map(str::to_string).collect();
            let actual = trial_record(&result);
            let diff = (expected != actual).then(|| RowDiff {
                row,
                expected,
                actual,
            });

            let traj = match &result.trajectory {
                Some(rows) => {
                    let name = trajectory_file_name(&result);
                    let path = traj_dir.join(&name);
                    match fs::read_to_string(&path) {
                        Ok(stored) => {
                            let mut w = csv::Writer::from_writer(Vec::new());
                            w.write_record(super::experiment::TRAJECTORY_HEADER)?;
                            for r in trajectory_records(rows) {
                                w.write_record(&r)?;
                            }
                            let fresh = w
                                .into_inner()
                                .map_err(|e| BenchError::Config(e.to_string()))?;
                            Some((name, body(&stored).as_bytes() == fresh.as_slice()))
                        }
                        Err(_) => None,
                    }
                }
                None => None,
            };
            Ok((diff, traj))
        })
        .collect::<Result<_, BenchError>>()?;

    let mut report = ReplayReport {
        rows_checked: records.len(),
        ..ReplayReport::default()
    };
    for (diff, traj) in outcomes {
        report.row_diffs.extend(diff);
        if let Some((name, same)) = traj {
            report.trajectories_checked += 1;
            if !same {
                report.trajectory_diffs.push(name);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::config::ScenarioConfig;
    use crate::bench::experiment::{run_experiment, RunOptions};

    fn run(dir: &Path, trajectories: bool) {
        let base = ScenarioConfig {
            trials: 2,
            max_time: 20.0,
            ..ScenarioConfig::default()
        };
        let e = Experiment {
            base,
            strategies: vec![Strategy::Gut, Strategy::Cb],
            pursuer_counts: vec![2],
            speed_ratios: vec![1.5],
        };
        run_experiment(&e, Some(dir), RunOptions { trajectories }).unwrap();
    }

    #[test]
    fn fresh_run_replays_identically() {
        let dir = tempfile::tempdir().unwrap();
        run(dir.path(), true);
        let r = replay(dir.path()).unwrap();
        assert_eq!(r.rows_checked, 4);
        assert_eq!(r.trajectories_checked, 4);
        assert!(r.is_identical(), "{r:?}");
    }

    #[test]
    fn edited_row_is_reported() {
        let dir = tempfile::tempdir().unwrap();
        run(dir.path(), false);
        let path = dir.path().join("trials.csv");
        let text = fs::read_to_string(&path).unwrap();
        let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
        let last = lines.len() - 1;
        let mut fields: Vec<String> = lines[last].split(',').map(str::to_string).collect();
        fields[6] = "123.5".into();
        lines[last] = fields.join(",");
        fs::write(&path, lines.join("\n") + "\n").unwrap();
        let r = replay(dir.path()).unwrap();
        assert_eq!(r.row_diffs.len(), 1);
        assert_eq!(r.row_diffs[0].row, 3);
        assert_eq!(r.trajectories_checked, 0);
    }
}

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use gut_core::bench::{
    replay, report, run_experiment, BenchError, ConfigFile, Experiment, ExperimentOutput,
    RunOptions, Strategy,
};
use gut_core::CaptureRule;

#[derive(Parser)]
#[command(
    name = "gut-pursuit",
    version,
    about = "Multi-pursuer pursuit-evasion benchmark"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the trials of one scenario.
    Run(RunArgs),
    /// Run the strategy x pursuer count x speed ratio grid.
    Sweep(RunArgs),
    /// Re-simulate a run directory from its logged seeds and diff the results.
    Replay {
        /// Run directory written by `run` or `sweep`.
        #[arg(long = "out", value_name = "DIR")]
        out: PathBuf,
    },
    /// Regenerate charts from a run directory's summary.csv.
    Report {
        #[arg(long = "out", value_name = "DIR")]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Cb,
    Pp,
    Gut,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Cb => Strategy::Cb,
            StrategyArg::Pp => Strategy::Pp,
            StrategyArg::Gut => Strategy::Gut,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum RuleArg {
    Max,
    Sum,
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file; built-in defaults when omitted.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long, value_name = "DIR", default_value = "out")]
    out: PathBuf,
    #[arg(long, value_name = "U64")]
    seed: Option<u64>,
    #[arg(long, value_name = "N")]
    trials: Option<usize>,
    /// Comma-separated for `sweep`.
    #[arg(long, value_enum, value_delimiter = ',')]
    strategy: Vec<StrategyArg>,
    /// Comma-separated for `sweep`.
    #[arg(long, value_name = "N", value_delimiter = ',')]
    pursuers: Vec<usize>,
    /// Comma-separated for `sweep`.
    #[arg(long = "speed-ratio", value_name = "R", value_delimiter = ',')]
    speed_ratio: Vec<f64>,
    #[arg(long = "capture-rule", value_enum)]
    capture_rule: Option<RuleArg>,
    /// Re-solve the formation game every this many seconds.
    #[arg(long = "replan-level1", value_name = "SECONDS")]
    replan_level1: Option<f64>,
    /// Also write per-trial trajectory CSVs.
    #[arg(long)]
    trajectories: bool,
}

fn single<T: Copy>(values: &[T], flag: &str) -> Result<Option<T>, BenchError> {
    match values {
        [] => Ok(None),
        [v] => Ok(Some(*v)),
        _ => Err(BenchError::Config(format!(
            "`run` takes a single value for --{flag}; use `sweep` for lists"
        ))),
    }
}

fn build_experiment(args: &RunArgs, sweep: bool) -> Result<Experiment, BenchError> {
    let file = match &args.config {
        Some(path) => ConfigFile::load(path)?,
        None => ConfigFile::default(),
    };
    let mut base = file.scenario;
    if let Some(seed) = args.seed {
        base.base_seed = seed;
    }
    if let Some(trials) = args.trials {
        base.trials = trials;
    }
    if let Some(rule) = args.capture_rule {
        base.capture_rule = match rule {
            RuleArg::Max => CaptureRule::Max,
            RuleArg::Sum => CaptureRule::Sum,
        };
    }
    if let Some(period) = args.replan_level1 {
        base.replan.level1_period = Some(period);
    }
    let strategies: Vec<Strategy> = args.strategy.iter().map(|&s| s.into()).collect();
    if sweep {
        let mut axes = file.sweep;
        if !strategies.is_empty() {
            axes.strategies = strategies;
        }
        if !args.pursuers.is_empty() {
            axes.pursuer_counts = args.pursuers.clone();
        }
        if !args.speed_ratio.is_empty() {
            axes.speed_ratios = args.speed_ratio.clone();
        }
        Ok(Experiment::grid(base, &axes))
    } else {
        if let Some(s) = single(&strategies, "strategy")? {
            base.strategy = s;
        }
        if let Some(n) = single(&args.pursuers, "pursuers")? {
            base.pursuer_count = n;
        }
        if let Some(r) = single(&args.speed_ratio, "speed-ratio")? {
            base.speed_ratio = r;
        }
        Ok(Experiment::single(base))
    }
}

fn print_summary(out: &ExperimentOutput, dir: &Path) {
    println!(
        "{:<4} {:>3} {:>6} {:>6} {:>10} {:>8} {:>10}",
        "", "n", "ratio", "rate", "time_s", "±", "energy"
    );
    for s in out.summary() {
        println!(
            "{:<4} {:>3} {:>6} {:>6.2} {:>10.3} {:>8.3} {:>10.5}",
            s.strategy.label(),
            s.pursuers,
            s.speed_ratio,
            s.capture_rate,
            s.capture_time.mean,
            s.capture_time.std,
            s.avg_energy.mean
        );
    }
    println!("wrote {} files to {}", out.files.len(), dir.display());
}

fn exit_code(err: &BenchError) -> u8 {
    match err {
        BenchError::Config(_) | BenchError::Gut(_) => 1,
        BenchError::Io { .. } | BenchError::Csv(_) => 2,
    }
}

fn execute(cli: Cli) -> Result<u8, BenchError> {
    match cli.command {
        Command::Run(args) => {
            let e = build_experiment(&args, false)?;
            let out = run_experiment(
                &e,
                Some(&args.out),
                RunOptions {
                    trajectories: args.trajectories,
                },
            )?;
            print_summary(&out, &args.out);
            Ok(0)
        }
        Command::Sweep(args) => {
            let e = build_experiment(&args, true)?;
            let out = run_experiment(
                &e,
                Some(&args.out),
                RunOptions {
                    trajectories: args.trajectories,
                },
            )?;
            print_summary(&out, &args.out);
            Ok(0)
        }
        Command::Replay { out } => {
            let r = replay(&out)?;
            for d in &r.row_diffs {
                eprintln!(
                    "row {}: logged {} != replayed {}",
                    d.row,
                    d.expected.join(","),
                    d.actual.join(",")
                );
            }
            for name in &r.trajectory_diffs {
                eprintln!("trajectory {name} differs");
            }
            println!(
                "replayed {} rows, {} trajectories: {} row diffs, {} trajectory diffs",
                r.rows_checked,
                r.trajectories_checked,
                r.row_diffs.len(),
                r.trajectory_diffs.len()
            );
            Ok(if r.is_identical() { 0 } else { 3 })
        }
        Command::Report { out } => {
            for f in report(&out)? {
                println!("{}", f.display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

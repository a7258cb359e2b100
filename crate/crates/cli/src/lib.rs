//! Command-line front end for the evacuation model.
//!
//! Each subcommand resolves its flags into an [`InitConfig`], runs the
//! corresponding experiment on a bounded rayon pool and writes one CSV file
//! after aggregation.

pub mod csv;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};

use clap::{Args, Parser, Subcommand};
use evac_core::experiment::{self, linear_grid, SweepOptions, DEFAULT_RUNS, DEFAULT_WINDOW};
use evac_core::scenario::MAX_SWEEP_DENSITY;
use evac_core::{Error as CoreError, InitConfig, Params, ScenarioKind, SweepAxis};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_IO: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] CoreError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => EXIT_CONFIG,
            CliError::Io { .. } => EXIT_IO,
            CliError::Core(CoreError::Invariant(_)) => EXIT_INTERNAL,
            CliError::Core(_) => EXIT_CONFIG,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "evac",
    version,
    about = "Monte-Carlo evacuation of 1x2 evacuees in a square room"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Independent runs of one configuration, one row per seed.
    Run {
        #[arg(long, default_value = "turn")]
        scenario: ScenarioKind,
        #[command(flatten)]
        common: Common,
    },
    /// Mean escape time against sideways speed v for each scenario.
    SweepV {
        /// Comma-separated scenarios.
        #[arg(long, value_delimiter = ',', default_value = "forward,sideways,turn")]
        scenarios: Vec<ScenarioKind>,
        /// v grid as start:stop:step.
        #[arg(long, default_value = "0.01:1:0.01")]
        v_grid: GridSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Mean escape time against turning probability r.
    SweepR {
        /// r grid as start:stop:step.
        #[arg(long, default_value = "0:0.99:0.01")]
        r_grid: GridSpec,
        #[command(flatten)]
        common: Common,
    },
    /// Heatmap over r and v with the optimal-r line.
    HeatmapRv {
        #[arg(long, default_value = "0:0.99:0.01")]
        r_grid: GridSpec,
        #[arg(long, default_value = "0.01:1:0.01")]
        v_grid: GridSpec,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Heatmap over r and density with the optimal-r line.
    HeatmapRrho {
        #[arg(long, default_value = "0:0.99:0.01")]
        r_grid: GridSpec,
        #[arg(long, default_value = "0.01:0.8:0.01")]
        rho_grid: GridSpec,
        #[arg(long, default_value_t = DEFAULT_WINDOW)]
        window: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Room side length in cells.
    #[arg(long, default_value_t = 50)]
    pub size: i32,
    #[arg(long, default_value_t = 4)]
    pub exit_width: i32,
    /// Fraction of interior cells occupied.
    #[arg(long, default_value_t = 0.5)]
    pub rho: f64,
    /// Softmax temperature.
    #[arg(long, default_value_t = 0.1)]
    pub k: f64,
    /// Sideways speed.
    #[arg(long, default_value_t = 0.33)]
    pub v: f64,
    /// Turning probability.
    #[arg(long, default_value_t = 0.5)]
    pub r: f64,
    #[arg(long, default_value_t = DEFAULT_RUNS)]
    pub runs: usize,
    #[arg(long, default_value_t = 1_000_000)]
    pub max_steps: u64,
    /// Base seed; run i uses base + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Worker threads (0 uses all cores).
    #[arg(long, default_value_t = 0)]
    pub jobs: usize,
    /// Suppress progress output.
    #[arg(long)]
    pub quiet: bool,
    /// Output CSV path (defaults to `<subcommand>.csv`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
}

/// Inclusive grid given on the command line as `start:stop:step`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl GridSpec {
    pub fn values(&self) -> Result<Vec<f64>, CoreError> {
        linear_grid(self.start, self.stop, self.step)
    }
}

impl std::str::FromStr for GridSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [start, stop, step] = parts[..] else {
            return Err(format!("expected start:stop:step, got '{s}'"));
        };
        let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("'{x}': {e}"));
        Ok(GridSpec {
            start: num(start)?,
            stop: num(stop)?,
            step: num(step)?,
        })
    }
}

impl std::fmt::Display for GridSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.step)
    }
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Run { .. } => "run",
            Command::SweepV { .. } => "sweep-v",
            Command::SweepR { .. } => "sweep-r",
            Command::HeatmapRv { .. } => "heatmap-rv",
            Command::HeatmapRrho { .. } => "heatmap-rrho",
        }
    }

    fn common(&self) -> &Common {
        match self {
            Command::Run { common, .. }
            | Command::SweepV { common, .. }
            | Command::SweepR { common, .. }
            | Command::HeatmapRv { common, .. }
            | Command::HeatmapRrho { common, .. } => common,
        }
    }
}

impl Common {
    fn config(&self, scenario: ScenarioKind) -> Result<InitConfig, CliError> {
        if self.runs == 0 {
            return Err(CliError::Config("--runs must be at least 1".into()));
        }
        let cfg = InitConfig {
            size: self.size,
            exit_width: self.exit_width,
            rho: self.rho,
            scenario,
            params: Params::new(self.r, self.v, self.k, self.max_steps)?,
            seed: self.seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn describe(&self) -> String {
        format!(
            "size={} exit_width={} rho={} k={} v={} r={} runs={} max_steps={} base_seed={}",
            self.size,
            self.exit_width,
            self.rho,
            self.k,
            self.v,
            self.r,
            self.runs,
            self.max_steps,
            self.seed
        )
    }
}

/// Files produced by one invocation, as (path, contents).
type Outputs = Vec<(PathBuf, String)>;

/// Parses `argv` (including the program name), runs the requested
/// experiment and returns the process exit status.
pub fn parse_and_dispatch<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
        }
    };
    match dispatch(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("evac: error: {e}");
            e.exit_code()
        }
    }
}

pub fn dispatch(command: &Command) -> Result<(), CliError> {
    let common = command.common();
    let output = common
        .output
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("{}.csv", command.name())));
    check_writable(&output)?;
    if common.rho > MAX_SWEEP_DENSITY {
        eprintln!(
            "evac: warning: rho={} exceeds {MAX_SWEEP_DENSITY}; placement may be infeasible",
            common.rho
        );
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(common.jobs)
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    let outputs = pool.install(|| execute(command, &output))?;
    for (path, contents) in outputs {
        std::fs::write(&path, contents).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        })?;
        if !common.quiet {
            println!("wrote {}", path.display());
        }
    }
    Ok(())
}

fn check_writable(path: &Path) -> Result<(), CliError> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    if !parent.is_dir() {
        return Err(CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::NotFound,
                "output directory does not exist",
            ),
        });
    }
    if path.is_dir() {
        return Err(CliError::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(
                std::io::ErrorKind::IsADirectory,
                "output path is a directory",
            ),
        });
    }
    Ok(())
}

/// `foo/bar.csv` -> `foo/bar_optimal.csv`.
pub fn optimal_path(output: &Path) -> PathBuf {
    let stem = output
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    let name = match output.extension() {
        Some(ext) => format!("{stem}_optimal.{}", ext.to_string_lossy()),
        None => format!("{stem}_optimal"),
    };
    output.with_file_name(name)
}

struct Reporter {
    quiet: bool,
    done: AtomicUsize,
}

impl Reporter {
    fn new(quiet: bool) -> Self {
        Self {
            quiet,
            done: AtomicUsize::new(0),
        }
    }

    /// Prints at most about a hundred lines per batch.
    fn tick(&self, finished: usize, total: usize) {
        if self.quiet {
            return;
        }
        let stride = (total / 100).max(1);
        if finished.is_multiple_of(stride) || finished == total {
            let pct = 100 * finished / total.max(1);
            if self.done.fetch_max(pct, Ordering::Relaxed) < pct || finished == total {
                let mut out = std::io::stdout().lock();
                let _ = writeln!(out, "progress {finished}/{total} ({pct}%)");
            }
        }
    }

    fn reset(&self) {
        self.done.store(0, Ordering::Relaxed);
    }
}

fn execute(command: &Command, output: &Path) -> Result<Outputs, CliError> {
    let common = command.common();
    let reporter = Reporter::new(common.quiet);
    let progress = |finished: usize, total: usize| reporter.tick(finished, total);
    let opts = SweepOptions::with_runs(common.runs).progress(&progress);
    let mut header = format!("evac {} {}", command.name(), common.describe());

    match command {
        Command::Run { scenario, .. } => {
            let cfg = common.config(*scenario)?;
            write!(header, " scenario={scenario}").unwrap();
            let rows = experiment::run_seeds(&cfg, common.runs)?;
            Ok(vec![(output.to_path_buf(), csv::run_csv(&header, &rows))])
        }
        Command::SweepV {
            scenarios, v_grid, ..
        } => {
            if scenarios.is_empty() {
                return Err(CliError::Config(
                    "--scenarios must name at least one scenario".into(),
                ));
            }
            let cfg = common.config(ScenarioKind::Turn)?;
            let names: Vec<&str> = scenarios.iter().map(|s| s.name()).collect();
            write!(header, " scenarios={} v_grid={v_grid}", names.join(",")).unwrap();
            let grid = v_grid.values()?;
            let mut sweeps = Vec::with_capacity(scenarios.len());
            for &s in scenarios {
                reporter.reset();
                sweeps.extend(experiment::sweep_v(&[s], &grid, &cfg, &opts)?);
            }
            Ok(vec![(
                output.to_path_buf(),
                csv::sweep_v_csv(&header, &sweeps),
            )])
        }
        Command::SweepR { r_grid, .. } => {
            let cfg = common.config(ScenarioKind::Turn)?;
            write!(header, " scenario=turn r_grid={r_grid}").unwrap();
            let result = experiment::sweep_r(&r_grid.values()?, &cfg, &opts)?;
            Ok(vec![(
                output.to_path_buf(),
                csv::sweep_1d_csv(&header, &result),
            )])
        }
        Command::HeatmapRv {
            r_grid,
            v_grid,
            window,
            ..
        } => heatmap(
            common,
            &header,
            output,
            r_grid,
            SweepAxis::V,
            v_grid,
            *window,
            &opts,
        ),
        Command::HeatmapRrho {
            r_grid,
            rho_grid,
            window,
            ..
        } => {
            if rho_grid.stop > MAX_SWEEP_DENSITY {
                eprintln!("evac: warning: rho grid exceeds {MAX_SWEEP_DENSITY}; placement may be infeasible");
            }
            heatmap(
                common,
                &header,
                output,
                r_grid,
                SweepAxis::Rho,
                rho_grid,
                *window,
                &opts,
            )
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn heatmap(
    common: &Common,
    header: &str,
    output: &Path,
    r_grid: &GridSpec,
    axis: SweepAxis,
    col_grid: &GridSpec,
    window: usize,
    opts: &SweepOptions<'_>,
) -> Result<Outputs, CliError> {
    if window == 0 {
        return Err(CliError::Config("--window must be at least 1".into()));
    }
    let cfg = common.config(ScenarioKind::Turn)?;
    let header = format!(
        "{header} scenario=turn r_grid={r_grid} {}_grid={col_grid} window={window}",
        axis.name()
    );
    let opts = SweepOptions { window, ..*opts };
    let result = experiment::heatmap(&r_grid.values()?, axis, &col_grid.values()?, &cfg, &opts)?;
    let line = result.optimal_line.clone().unwrap_or_default();
    Ok(vec![
        (output.to_path_buf(), csv::heatmap_csv(&header, &result)),
        (
            optimal_path(output),
            csv::optimal_csv(&header, &result, &line),
        ),
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_spec_parses() {
        let g: GridSpec = "0:0.99:0.01".parse().unwrap();
        assert_eq!(g.values().unwrap().len(), 100);
        assert!("0:1".parse::<GridSpec>().is_err());
        assert!("a:1:0.1".parse::<GridSpec>().is_err());
    }

    #[test]
    fn optimal_companion_name() {
        assert_eq!(
            optimal_path(Path::new("out/h.csv")),
            PathBuf::from("out/h_optimal.csv")
        );
        assert_eq!(optimal_path(Path::new("h")), PathBuf::from("h_optimal"));
    }

    #[test]
    fn defaults_match_reference_setup() {
        let cli = Cli::try_parse_from(["evac", "run"]).unwrap();
        let Command::Run { scenario, common } = cli.command else {
            panic!("expected run");
        };
        assert_eq!(scenario, ScenarioKind::Turn);
        assert_eq!((common.size, common.exit_width, common.runs), (50, 4, 100));
        assert_eq!(
            (common.rho, common.k, common.v, common.r),
            (0.5, 0.1, 0.33, 0.5)
        );
        assert_eq!(common.max_steps, 1_000_000);
    }

    #[test]
    fn bad_parameters_are_config_errors() {
        let cli = Cli::try_parse_from(["evac", "run", "--k", "0"]).unwrap();
        let err = dispatch(&cli.command).unwrap_err();
        assert_eq!(err.exit_code(), EXIT_CONFIG);
    }
}

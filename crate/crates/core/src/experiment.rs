//! Monte-Carlo aggregation and parameter sweeps.
//!
//! Run `i` of every grid point is seeded with `base_seed + i`, so all grid
//! points see the same family of initial layouts and random streams. Results
//! are collected in job order and aggregated with exact integer sums, which
//! keeps every statistic bit-identical regardless of scheduling.

use std::sync::atomic::{AtomicUsize, Ordering};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dynamics::{Engine, EscapeResult};
use crate::error::{Error, Result};
use crate::grid::RoomGeometry;
use crate::scenario::{place_evacuees, InitConfig, ScenarioKind};

pub const DEFAULT_RUNS: usize = 100;
pub const DEFAULT_WINDOW: usize = 5;

pub fn run_seed(base_seed: u64, run: usize) -> u64 {
    base_seed.wrapping_add(run as u64)
}

/// Summary of `runs` simulations at one parameter point. Mean and standard
/// deviation cover completed runs only; `NaN` when every run was censored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunStats {
    pub mean_escape_time: f64,
    /// Sample standard deviation (zero for a single completed run).
    pub std: f64,
    pub runs: usize,
    pub censored: usize,
}

impl RunStats {
    pub fn from_results(results: &[EscapeResult]) -> Self {
        let mut n: u128 = 0;
        let mut sum: u128 = 0;
        let mut sum_sq: u128 = 0;
        for r in results.iter().filter(|r| r.completed) {
            let t = r.escape_time as u128;
            n += 1;
            sum += t;
            sum_sq += t * t;
        }
        let (mean, std) = match n {
            0 => (f64::NAN, f64::NAN),
            1 => (sum as f64, 0.0),
            _ => {
                let spread = n * sum_sq - sum * sum;
                (
                    sum as f64 / n as f64,
                    (spread as f64 / (n * (n - 1)) as f64).sqrt(),
                )
            }
        };
        Self {
            mean_escape_time: mean,
            std,
            runs: results.len(),
            censored: results.len() - n as usize,
        }
    }

    pub fn mean(&self) -> Option<f64> {
        (!self.mean_escape_time.is_nan()).then_some(self.mean_escape_time)
    }

    pub fn all_censored(&self) -> bool {
        self.runs > 0 && self.censored == self.runs
    }
}

/// Builds the engine shared by all runs of `cfg`'s room.
pub fn engine_for(cfg: &InitConfig) -> Result<Engine> {
    cfg.validate()?;
    Engine::new(RoomGeometry::new(cfg.size, cfg.exit_width)?, cfg.params.k)
}

/// One full evacuation with the given seed.
pub fn simulate(engine: &Engine, cfg: &InitConfig, seed: u64) -> Result<EscapeResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut state = place_evacuees(cfg, engine.geometry(), &mut rng)?;
    engine.run_until_empty(&mut state, &cfg.effective_params(), &mut rng)
}

/// Per-seed results for `runs` simulations of `cfg`.
pub fn run_seeds(cfg: &InitConfig, runs: usize) -> Result<Vec<(u64, EscapeResult)>> {
    let engine = engine_for(cfg)?;
    (0..runs)
        .into_par_iter()
        .map(|i| {
            let seed = run_seed(cfg.seed, i);
            simulate(&engine, cfg, seed).map(|r| (seed, r))
        })
        .collect()
}

pub fn mean_escape_time(cfg: &InitConfig, runs: usize) -> Result<RunStats> {
    let opts = SweepOptions::with_runs(runs);
    Ok(run_points(std::slice::from_ref(cfg), &opts)?[0])
}

pub type Progress<'a> = &'a (dyn Fn(usize, usize) + Sync);

#[derive(Clone, Copy)]
pub struct SweepOptions<'a> {
    pub runs: usize,
    /// Moving-average width for optimal-line smoothing.
    pub window: usize,
    /// Called with `(finished, total)` after each simulation.
    pub progress: Option<Progress<'a>>,
}

impl std::fmt::Debug for SweepOptions<'_> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SweepOptions")
            .field("runs", &self.runs)
            .field("window", &self.window)
            .finish_non_exhaustive()
    }
}

impl Default for SweepOptions<'_> {
    fn default() -> Self {
        Self::with_runs(DEFAULT_RUNS)
    }
}

impl<'a> SweepOptions<'a> {
    pub fn with_runs(runs: usize) -> Self {
        Self {
            runs,
            window: DEFAULT_WINDOW,
            progress: None,
        }
    }

    pub fn progress(self, progress: Progress<'a>) -> Self {
        Self {
            progress: Some(progress),
            ..self
        }
    }
}

/// Runs every point `opts.runs` times. All points must share room size,
/// exit width and `k`, so one engine serves the whole batch.
pub fn run_points(points: &[InitConfig], opts: &SweepOptions<'_>) -> Result<Vec<RunStats>> {
    if opts.runs == 0 {
        return Err(Error::Config("runs must be at least 1".into()));
    }
    let Some(first) = points.first() else {
        return Ok(Vec::new());
    };
    for p in points {
        p.validate()?;
        if (p.size, p.exit_width, p.params.k) != (first.size, first.exit_width, first.params.k) {
            return Err(Error::Config("sweep points must share room and k".into()));
        }
    }
    let engine = engine_for(first)?;
    let total = points.len() * opts.runs;
    let done = AtomicUsize::new(0);
    let results: Vec<EscapeResult> = (0..total)
        .into_par_iter()
        .map(|job| {
            let (point, run) = (job / opts.runs, job % opts.runs);
            let cfg = &points[point];
            let out = simulate(&engine, cfg, run_seed(cfg.seed, run));
            if let Some(progress) = opts.progress {
                progress(done.fetch_add(1, Ordering::Relaxed) + 1, total);
            }
            out
        })
        .collect::<Result<_>>()?;
    Ok(results
        .chunks(opts.runs)
        .map(RunStats::from_results)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SweepAxis {
    R,
    V,
    Rho,
}

impl SweepAxis {
    pub fn name(self) -> &'static str {
        match self {
            SweepAxis::R => "r",
            SweepAxis::V => "v",
            SweepAxis::Rho => "rho",
        }
    }

    fn apply(self, cfg: &InitConfig, value: f64) -> InitConfig {
        let mut out = *cfg;
        match self {
            SweepAxis::R => out.params.r = value,
            SweepAxis::V => out.params.v = value,
            SweepAxis::Rho => out.rho = value,
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimalPoint {
    pub col: f64,
    /// Row value with the smallest mean escape time in this column.
    pub r_raw: Option<f64>,
    pub r_smoothed: Option<f64>,
}

/// Escape-time statistics over a one- or two-dimensional grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub row_axis: SweepAxis,
    pub rows: Vec<f64>,
    /// `None` for one-dimensional sweeps, which have a single implicit column.
    pub col_axis: Option<SweepAxis>,
    pub cols: Vec<f64>,
    /// Row-major: `cells[row * ncols + col]`.
    pub cells: Vec<RunStats>,
    pub optimal_line: Option<Vec<OptimalPoint>>,
}

impl SweepResult {
    pub fn ncols(&self) -> usize {
        self.cols.len().max(1)
    }

    pub fn get(&self, row: usize, col: usize) -> &RunStats {
        &self.cells[row * self.ncols() + col]
    }

    pub fn column_means(&self, col: usize) -> Vec<Option<f64>> {
        (0..self.rows.len())
            .map(|row| self.get(row, col).mean())
            .collect()
    }

    /// Index of the smallest mean in a column; ties go to the smaller row.
    pub fn argmin_row(&self, col: usize) -> Option<usize> {
        argmin(&self.column_means(col))
    }

    /// Row value minimizing the moving-averaged escape-time curve of a
    /// column (centered window, truncated symmetrically at the ends).
    pub fn smoothed_argmin(&self, col: usize, window: usize) -> Option<f64> {
        argmin(&moving_average(&self.column_means(col), window)).map(|i| self.rows[i])
    }
}

fn argmin(values: &[Option<f64>]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = *v {
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((i, v));
            }
        }
    }
    best.map(|(i, _)| i)
}

/// Centered moving average of width `window`. Near the ends the window
/// shrinks symmetrically so it stays centered; undefined entries are skipped
/// and stay undefined.
pub fn moving_average(values: &[Option<f64>], window: usize) -> Vec<Option<f64>> {
    let half = window / 2;
    let n = values.len();
    (0..n)
        .map(|i| {
            values[i]?;
            let h = half.min(i).min(n - 1 - i);
            let defined: Vec<f64> = values[i - h..=i + h].iter().flatten().copied().collect();
            Some(defined.iter().sum::<f64>() / defined.len() as f64)
        })
        .collect()
}

/// Per-column argmin over rows, smoothed across columns.
pub fn optimal_line(result: &SweepResult, window: usize) -> Vec<OptimalPoint> {
    let raw: Vec<Option<f64>> = (0..result.ncols())
        .map(|c| result.argmin_row(c).map(|i| result.rows[i]))
        .collect();
    let smoothed = moving_average(&raw, window);
    let cols: Vec<f64> = if result.cols.is_empty() {
        vec![f64::NAN]
    } else {
        result.cols.clone()
    };
    cols.into_iter()
        .zip(raw)
        .zip(smoothed)
        .map(|((col, r_raw), r_smoothed)| OptimalPoint {
            col,
            r_raw,
            r_smoothed,
        })
        .collect()
}

fn sweep_1d(
    axis: SweepAxis,
    grid: &[f64],
    template: &InitConfig,
    opts: &SweepOptions<'_>,
) -> Result<SweepResult> {
    let points: Vec<InitConfig> = grid.iter().map(|&x| axis.apply(template, x)).collect();
    Ok(SweepResult {
        row_axis: axis,
        rows: grid.to_vec(),
        col_axis: None,
        cols: Vec::new(),
        cells: run_points(&points, opts)?,
        optimal_line: None,
    })
}

/// Escape time against sideways speed for each scenario. The template's `r`
/// applies to the turn scenario only.
pub fn sweep_v(
    scenarios: &[ScenarioKind],
    v_grid: &[f64],
    template: &InitConfig,
    opts: &SweepOptions<'_>,
) -> Result<Vec<(ScenarioKind, SweepResult)>> {
    scenarios
        .iter()
        .map(|&scenario| {
            let cfg = InitConfig {
                scenario,
                ..*template
            };
            sweep_1d(SweepAxis::V, v_grid, &cfg, opts).map(|r| (scenario, r))
        })
        .collect()
}

/// Escape time against turning probability in the turn scenario.
pub fn sweep_r(
    r_grid: &[f64],
    template: &InitConfig,
    opts: &SweepOptions<'_>,
) -> Result<SweepResult> {
    let cfg = InitConfig {
        scenario: ScenarioKind::Turn,
        ..*template
    };
    sweep_1d(SweepAxis::R, r_grid, &cfg, opts)
}

/// Turn-scenario heatmap over `r` (rows) and `v` or `rho` (columns), with
/// the smoothed optimal-`r` line.
pub fn heatmap(
    r_grid: &[f64],
    col_axis: SweepAxis,
    col_grid: &[f64],
    template: &InitConfig,
    opts: &SweepOptions<'_>,
) -> Result<SweepResult> {
    if col_axis == SweepAxis::R {
        return Err(Error::Config("heatmap columns must be v or rho".into()));
    }
    let cfg = InitConfig {
        scenario: ScenarioKind::Turn,
        ..*template
    };
    let points: Vec<InitConfig> = r_grid
        .iter()
        .flat_map(|&r| {
            col_grid
                .iter()
                .map(move |&c| col_axis.apply(&SweepAxis::R.apply(&cfg, r), c))
        })
        .collect();
    let mut result = SweepResult {
        row_axis: SweepAxis::R,
        rows: r_grid.to_vec(),
        col_axis: Some(col_axis),
        cols: col_grid.to_vec(),
        cells: run_points(&points, opts)?,
        optimal_line: None,
    };
    result.optimal_line = Some(optimal_line(&result, opts.window));
    Ok(result)
}

/// Inclusive grid `start, start + step, ..., stop`, with values rounded to
/// twelve decimals so that printed grids stay clean.
pub fn linear_grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if step.is_nan() || step <= 0.0 || stop < start {
        return Err(Error::Config(format!(
            "bad grid {start}..={stop} step {step}"
        )));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n)
        .map(|i| ((start + i as f64 * step) * 1e12).round() / 1e12)
        .collect())
}

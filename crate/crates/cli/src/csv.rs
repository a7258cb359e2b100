//! Locale-independent CSV rendering.
//!
//! Every file starts with a `#` comment carrying the resolved configuration,
//! followed by a header row. Reals are printed with six significant digits,
//! `.` as decimal separator and `\n` line endings.

use std::fmt::Write as _;

use evac_core::experiment::{OptimalPoint, SweepResult};
use evac_core::{EscapeResult, RunStats, ScenarioKind};

/// `%.6g`-style formatting: six significant digits, trailing zeros removed,
/// scientific notation outside `1e-4 <= |x| < 1e6`. `NaN` prints as `nan`.
pub fn fmt_real(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.5e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..6).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!(
            "{mantissa}e{}{:02}",
            if exp < 0 { '-' } else { '+' },
            exp.abs()
        );
    }
    let decimals = (5 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn opt_real(x: Option<f64>) -> String {
    x.map_or_else(|| "nan".into(), fmt_real)
}

fn stats_fields(s: &RunStats) -> String {
    format!("{},{}", fmt_real(s.mean_escape_time), fmt_real(s.std))
}

pub fn run_csv(comment: &str, rows: &[(u64, EscapeResult)]) -> String {
    let mut out = format!("# {comment}\nseed,escape_time,completed\n");
    for (seed, r) in rows {
        writeln!(out, "{seed},{},{}", r.escape_time, r.completed).unwrap();
    }
    out
}

pub fn sweep_v_csv(comment: &str, sweeps: &[(ScenarioKind, SweepResult)]) -> String {
    let mut out = format!("# {comment}\nscenario,v,mean_escape_time,std,runs,censored\n");
    for (scenario, result) in sweeps {
        for (i, v) in result.rows.iter().enumerate() {
            let s = result.get(i, 0);
            writeln!(
                out,
                "{scenario},{},{},{},{}",
                fmt_real(*v),
                stats_fields(s),
                s.runs,
                s.censored
            )
            .unwrap();
        }
    }
    out
}

pub fn sweep_1d_csv(comment: &str, result: &SweepResult) -> String {
    let mut out = format!(
        "# {comment}\n{},mean_escape_time,std,runs,censored\n",
        result.row_axis.name()
    );
    for (i, x) in result.rows.iter().enumerate() {
        let s = result.get(i, 0);
        writeln!(
            out,
            "{},{},{},{}",
            fmt_real(*x),
            stats_fields(s),
            s.runs,
            s.censored
        )
        .unwrap();
    }
    out
}

fn col_name(result: &SweepResult) -> &'static str {
    result.col_axis.map_or("col", |a| a.name())
}

/// Long-form heatmap: one line per (r, column) pair, rows outermost.
pub fn heatmap_csv(comment: &str, result: &SweepResult) -> String {
    let mut out = format!(
        "# {comment}\nr,{},mean_escape_time,std,censored\n",
        col_name(result)
    );
    for (i, r) in result.rows.iter().enumerate() {
        for (j, c) in result.cols.iter().enumerate() {
            let s = result.get(i, j);
            writeln!(
                out,
                "{},{},{},{}",
                fmt_real(*r),
                fmt_real(*c),
                stats_fields(s),
                s.censored
            )
            .unwrap();
        }
    }
    out
}

pub fn optimal_csv(comment: &str, result: &SweepResult, line: &[OptimalPoint]) -> String {
    let mut out = format!(
        "# {comment}\n{},r_star_raw,r_star_smoothed\n",
        col_name(result)
    );
    for p in line {
        writeln!(
            out,
            "{},{},{}",
            fmt_real(p.col),
            opt_real(p.r_raw),
            opt_real(p.r_smoothed)
        )
        .unwrap();
    }
    out
}

//! Measurement-count sweeps: run online ZAP and cold-start batch ZAP over a
//! grid of measurement counts and trials, then summarize and export.
//!
//! Within one trial every algorithm and every measurement count sees the
//! same seeded problem, so the curves are paired. The online run is a single
//! sequential pass that is sampled at each requested `m`; its recorded time
//! and iteration count are cumulative over samples `1..=m`. Batch cells are
//! solved from scratch (fresh Gram inverse, least-squares start) at each `m`.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::time::Instant;

use nalgebra::DVector;
use rayon::prelude::*;

use crate::error::{invalid, Result, ZapError};
use crate::gram::GramInverse;
use crate::online::{msd, OnlineState, StopMode};
use crate::probgen::{generate_problem, ProblemSpec, SparseProblem};
use crate::zap::{batch_solve, ZapConfig};

/// Header of the summary CSV.
pub const SUMMARY_HEADER: [&str; 7] = [
    "algorithm",
    "m",
    "trials",
    "msd_mean",
    "msd_median",
    "time_mean_s",
    "success_rate",
];

/// Guards against sampling an unbounded run of degenerate rows.
const MAX_DEGENERATE_DRAWS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Algorithm {
    OnlineZap,
    BatchZapColdStart,
}

impl Algorithm {
    pub fn label(&self) -> &'static str {
        match self {
            Algorithm::OnlineZap => "online_zap",
            Algorithm::BatchZapColdStart => "batch_zap_cold_start",
        }
    }

    pub fn from_label(s: &str) -> Option<Self> {
        match s {
            "online_zap" | "online" => Some(Algorithm::OnlineZap),
            "batch_zap_cold_start" | "batch" => Some(Algorithm::BatchZapColdStart),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SweepConfig {
    /// `seed` is the base seed; each trial derives its own problem seed.
    pub spec: ProblemSpec,
    pub m_values: Vec<usize>,
    pub trials: usize,
    pub zap: ZapConfig,
    pub stop: StopMode,
    pub algorithms: Vec<Algorithm>,
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        self.spec.validate()?;
        self.zap.validate()?;
        self.stop.validate()?;
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        if self.algorithms.is_empty() {
            return Err(invalid("no algorithms selected"));
        }
        if self.m_values.is_empty() || self.m_values[0] == 0 {
            return Err(invalid("m values must be nonempty and start at 1 or above"));
        }
        if self.m_values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(invalid("m values must be strictly increasing"));
        }
        if *self.m_values.last().unwrap() > self.spec.n {
            return Err(invalid(format!(
                "largest m exceeds the signal length {}",
                self.spec.n
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialRecord {
    pub algorithm: Algorithm,
    pub trial: usize,
    /// Problem seed of this trial.
    pub seed: u64,
    pub m: usize,
    /// `‖x̂ - x‖² / N`; infinite when no estimate was produced.
    pub msd_normalized: f64,
    /// `‖x̂ - x‖²`.
    pub msd_raw: f64,
    pub total_inner_iterations: usize,
    pub wall_time: f64,
    /// Whether the outer stop rule had fired by this `m`.
    pub converged: bool,
    pub error: Option<String>,
}

/// Problem seed of a trial: a SplitMix64 finalizer over the base seed and
/// trial index.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    let mut z = base ^ (trial as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn trial_problem(cfg: &SweepConfig, trial: usize) -> Result<SparseProblem> {
    generate_problem(ProblemSpec {
        seed: trial_seed(cfg.spec.seed, trial),
        ..cfg.spec
    })
}

pub fn run_sweep(cfg: &SweepConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let mut algorithms = cfg.algorithms.clone();
    algorithms.sort();
    algorithms.dedup();

    let cells: Vec<(Algorithm, usize)> = algorithms
        .iter()
        .flat_map(|&alg| (0..cfg.trials).map(move |t| (alg, t)))
        .collect();
    let per_cell: Vec<Result<Vec<TrialRecord>>> = cells
        .par_iter()
        .map(|&(alg, trial)| match alg {
            Algorithm::OnlineZap => online_trial(cfg, trial),
            Algorithm::BatchZapColdStart => batch_trial(cfg, trial),
        })
        .collect();

    let mut records = Vec::with_capacity(cells.len() * cfg.m_values.len());
    for r in per_cell {
        records.extend(r?);
    }
    records.sort_by_key(|r| (r.algorithm, r.m, r.trial));
    Ok(records)
}

fn draw_independent(
    problem: &mut SparseProblem,
    mut accepts: impl FnMut(&DVector<f64>) -> bool,
) -> Result<(DVector<f64>, f64)> {
    for _ in 0..MAX_DEGENERATE_DRAWS {
        let (a, y) = problem.next_measurement();
        if accepts(&a) {
            return Ok((a, y));
        }
    }
    Err(invalid(
        "measurement source keeps producing degenerate rows",
    ))
}

fn online_trial(cfg: &SweepConfig, trial: usize) -> Result<Vec<TrialRecord>> {
    let mut problem = trial_problem(cfg, trial)?;
    let truth = problem.x_true().clone();
    let seed = problem.spec().seed;
    let n = cfg.spec.n;
    let m_max = *cfg.m_values.last().unwrap();

    let mut state = OnlineState::new(n, &cfg.zap)?;
    let mut records = Vec::with_capacity(cfg.m_values.len());
    let mut wanted = cfg.m_values.iter().peekable();
    let mut elapsed = 0.0;
    let mut previous = state.estimate().clone();
    let mut calm_steps = 0usize;
    let mut converged = false;
    let mut pending_error: Option<String> = None;

    while state.m() < m_max {
        let (a, y) = problem.next_measurement();
        let start = Instant::now();
        let outcome = state.ingest_sample(&a, y, &cfg.zap);
        elapsed += start.elapsed().as_secs_f64();
        match outcome {
            Ok(_) => {}
            Err(ZapError::DegenerateRow { .. }) => continue,
            Err(e @ ZapError::Divergence { .. }) => {
                pending_error.get_or_insert(e.to_string());
            }
            Err(e) => return Err(e),
        }

        let error = msd(state.estimate(), &truth);
        let fired = match cfg.stop {
            StopMode::OracleMsd { threshold } => error < threshold,
            StopMode::ProxyChange { threshold } => {
                let x = state.estimate();
                let change = (x - &previous).norm() / x.norm().max(1e-12);
                calm_steps = if change < threshold {
                    calm_steps + 1
                } else {
                    0
                };
                calm_steps >= 2
            }
        };
        converged |= fired;
        previous.copy_from(state.estimate());

        if wanted.peek() == Some(&&state.m()) {
            wanted.next();
            records.push(TrialRecord {
                algorithm: Algorithm::OnlineZap,
                trial,
                seed,
                m: state.m(),
                msd_normalized: error,
                msd_raw: error * n as f64,
                total_inner_iterations: state.total_inner_iterations(),
                wall_time: elapsed,
                converged,
                error: pending_error.take(),
            });
        }
    }
    Ok(records)
}

fn batch_trial(cfg: &SweepConfig, trial: usize) -> Result<Vec<TrialRecord>> {
    let mut problem = trial_problem(cfg, trial)?;
    let truth = problem.x_true().clone();
    let seed = problem.spec().seed;
    let n = cfg.spec.n;
    let m_max = *cfg.m_values.last().unwrap();

    // Same accepted row sequence the online pass sees.
    let mut span = GramInverse::new(n)?;
    let mut rows = Vec::with_capacity(m_max);
    let mut ys = Vec::with_capacity(m_max);
    while rows.len() < m_max {
        let mut probe = span.clone();
        let (a, y) = draw_independent(&mut problem, |a| probe.append_row(a).is_ok())?;
        span.append_row(&a)?;
        rows.push(a);
        ys.push(y);
    }

    let mut records = Vec::with_capacity(cfg.m_values.len());
    for &m in &cfg.m_values {
        let start = Instant::now();
        let mut gram = GramInverse::new(n)?;
        for a in &rows[..m] {
            gram.append_row(a)?;
        }
        let y = DVector::from_column_slice(&ys[..m]);
        let solved = batch_solve(&gram, &y, &cfg.zap);
        let wall_time = start.elapsed().as_secs_f64();

        let record = match solved {
            Ok(result) => {
                let error = msd(&result.x, &truth);
                let converged = match cfg.stop {
                    StopMode::OracleMsd { threshold } => error < threshold,
                    // A single cold solve has no sequence of estimates to compare.
                    StopMode::ProxyChange { .. } => false,
                };
                TrialRecord {
                    algorithm: Algorithm::BatchZapColdStart,
                    trial,
                    seed,
                    m,
                    msd_normalized: error,
                    msd_raw: error * n as f64,
                    total_inner_iterations: result.iterations,
                    wall_time,
                    converged,
                    error: None,
                }
            }
            Err(e @ ZapError::Divergence { .. }) => TrialRecord {
                algorithm: Algorithm::BatchZapColdStart,
                trial,
                seed,
                m,
                msd_normalized: f64::INFINITY,
                msd_raw: f64::INFINITY,
                total_inner_iterations: 0,
                wall_time,
                converged: false,
                error: Some(e.to_string()),
            },
            Err(e) => return Err(e),
        };
        records.push(record);
    }
    Ok(records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary {
    pub algorithm: Algorithm,
    pub m: usize,
    pub trials: usize,
    pub msd_mean: f64,
    pub msd_median: f64,
    pub time_mean_s: f64,
    pub success_rate: f64,
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// One summary per `(algorithm, m)`, ordered by algorithm then `m`. A record
/// counts as a success when its normalized MSD is below `tau`.
pub fn aggregate(records: &[TrialRecord], tau: f64) -> Result<Vec<Summary>> {
    if records.is_empty() {
        return Err(invalid("cannot aggregate an empty record set"));
    }
    let mut cells: BTreeMap<(Algorithm, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        cells.entry((r.algorithm, r.m)).or_default().push(r);
    }
    Ok(cells
        .into_iter()
        .map(|((algorithm, m), rs)| {
            let count = rs.len() as f64;
            let mut msds: Vec<f64> = rs.iter().map(|r| r.msd_normalized).collect();
            let msd_mean = msds.iter().sum::<f64>() / count;
            let successes = msds.iter().filter(|&&v| v < tau).count() as f64;
            Summary {
                algorithm,
                m,
                trials: rs.len(),
                msd_mean,
                msd_median: median(&mut msds),
                time_mean_s: rs.iter().map(|r| r.wall_time).sum::<f64>() / count,
                success_rate: successes / count,
            }
        })
        .collect())
}

fn sci(v: f64) -> String {
    format!("{v:.16e}")
}

fn io_error(path: &Path, e: impl std::fmt::Display) -> ZapError {
    invalid(format!("{}: {e}", path.display()))
}

pub fn emit_csv(summaries: &[Summary], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record(SUMMARY_HEADER)
        .map_err(|e| io_error(path, e))?;
    for s in summaries {
        w.write_record([
            s.algorithm.label().to_string(),
            s.m.to_string(),
            s.trials.to_string(),
            sci(s.msd_mean),
            sci(s.msd_median),
            sci(s.time_mean_s),
            sci(s.success_rate),
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Reads a file written by [`emit_csv`].
pub fn read_csv(path: &Path) -> Result<Vec<Summary>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| io_error(path, e))?;
    let header = r.headers().map_err(|e| io_error(path, e))?;
    if header.iter().ne(SUMMARY_HEADER) {
        return Err(io_error(path, "unexpected header"));
    }
    let mut out = Vec::new();
    for row in r.records() {
        let row = row.map_err(|e| io_error(path, e))?;
        let num = |i: usize| -> Result<f64> {
            row[i]
                .parse()
                .map_err(|_| io_error(path, format!("bad number `{}`", &row[i])))
        };
        let int = |i: usize| -> Result<usize> {
            row[i]
                .parse()
                .map_err(|_| io_error(path, format!("bad count `{}`", &row[i])))
        };
        out.push(Summary {
            algorithm: Algorithm::from_label(&row[0])
                .ok_or_else(|| io_error(path, format!("unknown algorithm `{}`", &row[0])))?,
            m: int(1)?,
            trials: int(2)?,
            msd_mean: num(3)?,
            msd_median: num(4)?,
            time_mean_s: num(5)?,
            success_rate: num(6)?,
        });
    }
    Ok(out)
}

/// Per-trial records, including the unnormalized MSD.
pub fn emit_records_csv(records: &[TrialRecord], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| io_error(path, e))?;
    w.write_record([
        "algorithm",
        "trial",
        "seed",
        "m",
        "msd_normalized",
        "msd_raw",
        "total_inner_iterations",
        "wall_time_s",
        "converged",
        "error",
    ])
    .map_err(|e| io_error(path, e))?;
    for r in records {
        w.write_record([
            r.algorithm.label().to_string(),
            r.trial.to_string(),
            r.seed.to_string(),
            r.m.to_string(),
            sci(r.msd_normalized),
            sci(r.msd_raw),
            r.total_inner_iterations.to_string(),
            sci(r.wall_time),
            r.converged.to_string(),
            r.error.clone().unwrap_or_default(),
        ])
        .map_err(|e| io_error(path, e))?;
    }
    w.flush().map_err(|e| io_error(path, e))
}

/// Renders median MSD (log scale) against `m`, one polyline per algorithm.
pub fn render_svg(summaries: &[Summary]) -> String {
    const W: f64 = 640.0;
    const H: f64 = 420.0;
    const LEFT: f64 = 70.0;
    const RIGHT: f64 = 20.0;
    const TOP: f64 = 30.0;
    const BOTTOM: f64 = 50.0;
    const FLOOR: f64 = 1e-20;

    let log_msd = |s: &Summary| {
        s.msd_median
            .is_finite()
            .then(|| s.msd_median.max(FLOOR).log10())
    };
    let m_max = summaries.iter().map(|s| s.m).max().unwrap_or(1).max(1) as f64;
    let logs: Vec<f64> = summaries.iter().filter_map(log_msd).collect();
    let lo = logs.iter().copied().fold(f64::INFINITY, f64::min).floor();
    let hi = logs
        .iter()
        .copied()
        .fold(f64::NEG_INFINITY, f64::max)
        .ceil();
    let (lo, hi) = if lo.is_finite() && hi > lo {
        (lo, hi)
    } else {
        (-1.0, 0.0)
    };

    let px = |m: f64| LEFT + (W - LEFT - RIGHT) * m / m_max;
    let py = |l: f64| TOP + (H - TOP - BOTTOM) * (hi - l) / (hi - lo);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">"#
    );
    let _ = writeln!(svg, r#"<rect width="{W}" height="{H}" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<g stroke="black" fill="none"><line x1="{LEFT}" y1="{y0}" x2="{x1}" y2="{y0}"/><line x1="{LEFT}" y1="{TOP}" x2="{LEFT}" y2="{y0}"/></g>"#,
        y0 = H - BOTTOM,
        x1 = W - RIGHT
    );
    let mut decade = lo;
    while decade <= hi {
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y:.2}" font-size="11" text-anchor="end">1e{d}</text>"#,
            x = LEFT - 6.0,
            y = py(decade) + 4.0,
            d = decade as i64
        );
        decade += 1.0;
    }
    let _ = writeln!(
        svg,
        r#"<text x="{x}" y="{y}" font-size="12" text-anchor="middle">measurements M (0 to {m})</text>"#,
        x = (W + LEFT) / 2.0,
        y = H - 15.0,
        m = m_max
    );
    let _ = writeln!(
        svg,
        r#"<text x="16" y="{y}" font-size="12" transform="rotate(-90 16 {y})" text-anchor="middle">median normalized MSD</text>"#,
        y = H / 2.0
    );

    let colors = ["#1f77b4", "#d62728"];
    let mut by_alg: BTreeMap<Algorithm, Vec<&Summary>> = BTreeMap::new();
    for s in summaries {
        by_alg.entry(s.algorithm).or_default().push(s);
    }
    for (i, (alg, points)) in by_alg.iter().enumerate() {
        let coords: Vec<String> = points
            .iter()
            .filter_map(|s| log_msd(s).map(|l| format!("{:.2},{:.2}", px(s.m as f64), py(l))))
            .collect();
        let color = colors[i % colors.len()];
        let _ = writeln!(
            svg,
            r#"<polyline fill="none" stroke="{color}" stroke-width="1.5" points="{}"/>"#,
            coords.join(" ")
        );
        let _ = writeln!(
            svg,
            r#"<text x="{x}" y="{y}" font-size="12" fill="{color}">{label}</text>"#,
            x = W - RIGHT - 170.0,
            y = TOP + 15.0 * (i as f64 + 1.0),
            label = alg.label()
        );
    }
    svg.push_str("</svg>\n");
    svg
}

pub fn emit_svg(summaries: &[Summary], path: &Path) -> Result<()> {
    fs::write(path, render_svg(summaries)).map_err(|e| io_error(path, e))
}

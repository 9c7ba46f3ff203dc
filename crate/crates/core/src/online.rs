//! Outer recursion: one measurement at a time, warm-started inner solves.

use nalgebra::DVector;

use crate::error::{invalid, Result, ZapError};
use crate::gram::GramInverse;
use crate::zap::{inner_solve, InnerResult, StopCause, ZapConfig};

/// Smallest denominator used by the relative-change stop test.
const CHANGE_FLOOR: f64 = 1e-12;

/// How the outer loop decides the signal has been recovered.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StopMode {
    /// Stop when the normalized MSD against a known signal drops below the
    /// threshold. Only usable in simulation.
    OracleMsd { threshold: f64 },
    /// Stop when `‖x_m - x_{m-1}‖ / ‖x_m‖` stays below the threshold for two
    /// consecutive samples.
    ProxyChange { threshold: f64 },
}

impl StopMode {
    pub fn threshold(&self) -> f64 {
        match *self {
            StopMode::OracleMsd { threshold } | StopMode::ProxyChange { threshold } => threshold,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.threshold();
        if t > 0.0 && !t.is_nan() {
            Ok(())
        } else {
            Err(invalid(format!("stop threshold must be positive, got {t}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StepOutcome {
    Solved {
        iterations: usize,
        stop_cause: StopCause,
    },
    /// The sample was linearly dependent on earlier ones and was dropped.
    SkippedDegenerate,
    /// The inner solve blew up; the previous estimate was kept.
    Diverged { iteration: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    /// Number of accepted samples after this step.
    pub m: usize,
    pub outcome: StepOutcome,
    pub msd: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OnlineState {
    gram: GramInverse,
    y: DVector<f64>,
    x: DVector<f64>,
    kappa_m: f64,
    history: Vec<StepRecord>,
    converged: bool,
}

/// Normalized mean square deviation `‖a - b‖² / N`.
pub fn msd(estimate: &DVector<f64>, truth: &DVector<f64>) -> f64 {
    (estimate - truth).norm_squared() / estimate.len() as f64
}

impl OnlineState {
    pub fn new(n_dim: usize, cfg: &ZapConfig) -> Result<Self> {
        cfg.validate()?;
        Ok(Self {
            gram: GramInverse::new(n_dim)?,
            y: DVector::zeros(0),
            x: DVector::zeros(n_dim),
            kappa_m: cfg.kappa0,
            history: Vec::new(),
            converged: false,
        })
    }

    pub fn m(&self) -> usize {
        self.gram.m()
    }

    pub fn gram(&self) -> &GramInverse {
        &self.gram
    }

    pub fn observations(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn estimate(&self) -> &DVector<f64> {
        &self.x
    }

    pub fn kappa_m(&self) -> f64 {
        self.kappa_m
    }

    pub fn history(&self) -> &[StepRecord] {
        &self.history
    }

    /// Whether [`run_online`]'s stop rule fired.
    pub fn converged(&self) -> bool {
        self.converged
    }

    /// Accepts one sample: grows the Gram inverse, decays the outer step
    /// size, and refines the estimate starting from the previous one.
    ///
    /// A degenerate row leaves the state untouched. If the inner solve
    /// diverges the sample is kept but the estimate is not replaced.
    pub fn ingest_sample(
        &mut self,
        a: &DVector<f64>,
        y_new: f64,
        cfg: &ZapConfig,
    ) -> Result<InnerResult> {
        if !y_new.is_finite() {
            return Err(invalid("observation is not finite"));
        }
        self.gram.append_row(a)?;
        let m = self.gram.m();
        self.y = std::mem::replace(&mut self.y, DVector::zeros(0)).push(y_new);
        self.kappa_m *= cfg.eta1;

        match inner_solve(&self.gram, &self.y, &self.x, self.kappa_m, cfg) {
            Ok(result) => {
                self.x.copy_from(&result.x);
                self.history.push(StepRecord {
                    m,
                    outcome: StepOutcome::Solved {
                        iterations: result.iterations,
                        stop_cause: result.stop_cause,
                    },
                    msd: None,
                });
                Ok(result)
            }
            Err(err) => {
                if let ZapError::Divergence { iteration } = err {
                    self.history.push(StepRecord {
                        m,
                        outcome: StepOutcome::Diverged { iteration },
                        msd: None,
                    });
                }
                Err(err)
            }
        }
    }

    /// Total inner iterations over all solved steps.
    pub fn total_inner_iterations(&self) -> usize {
        self.history
            .iter()
            .map(|r| match r.outcome {
                StepOutcome::Solved { iterations, .. } => iterations,
                _ => 0,
            })
            .sum()
    }
}

/// Ingests samples from `stream` until the stop rule fires, `m_cap` samples
/// have been accepted, or the stream runs dry. Degenerate samples are
/// skipped and logged; divergence aborts the run.
pub fn run_online<S>(
    stream: S,
    cfg: &ZapConfig,
    stop: StopMode,
    m_cap: usize,
    oracle_x: Option<&DVector<f64>>,
    n_dim: usize,
) -> Result<OnlineState>
where
    S: IntoIterator<Item = (DVector<f64>, f64)>,
{
    stop.validate()?;
    if m_cap == 0 || m_cap > n_dim {
        return Err(invalid(format!(
            "m_cap must lie in [1, {n_dim}], got {m_cap}"
        )));
    }
    let oracle = match (stop, oracle_x) {
        (StopMode::OracleMsd { .. }, None) => {
            return Err(invalid("oracle stop mode needs the true signal"))
        }
        (_, Some(x)) if x.len() != n_dim => {
            return Err(invalid("oracle signal has the wrong length"))
        }
        (_, o) => o,
    };

    let mut state = OnlineState::new(n_dim, cfg)?;
    let mut previous = state.x.clone();
    let mut calm_steps = 0usize;

    for (a, y) in stream {
        if state.m() >= m_cap {
            break;
        }
        match state.ingest_sample(&a, y, cfg) {
            Ok(_) => {}
            Err(ZapError::DegenerateRow { .. }) => {
                state.history.push(StepRecord {
                    m: state.m(),
                    outcome: StepOutcome::SkippedDegenerate,
                    msd: None,
                });
                continue;
            }
            Err(err) => return Err(err),
        }

        let error = oracle.map(|truth| msd(&state.x, truth));
        if let Some(last) = state.history.last_mut() {
            last.msd = error;
        }
        let done = match stop {
            StopMode::OracleMsd { threshold } => error.is_some_and(|e| e < threshold),
            StopMode::ProxyChange { threshold } => {
                let change = (&state.x - &previous).norm() / state.x.norm().max(CHANGE_FLOOR);
                calm_steps = if change < threshold {
                    calm_steps + 1
                } else {
                    0
                };
                calm_steps >= 2
            }
        };
        previous.copy_from(&state.x);
        if done {
            state.converged = true;
            break;
        }
        if state.m() >= m_cap {
            break;
        }
    }
    Ok(state)
}

//! Inner ZAP recursion: a zero-attraction gradient step followed by a
//! projection back onto the solution space, with an l1-monitored step size.

use nalgebra::DVector;

use crate::error::{invalid, Result, ZapError};
use crate::gram::GramInverse;
use crate::penalty::{gradient_entry, PenaltyParams};

/// Tuning parameters of the online solver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZapConfig {
    /// Penalty control parameter; the attraction band is `|x| <= 1/alpha`.
    pub alpha: f64,
    /// Initial step size.
    pub kappa0: f64,
    /// Outer (per-sample) step-size decay.
    pub eta1: f64,
    /// Inner step-size decay, applied when the l1 norm grows.
    pub eta2: f64,
    /// Inner iteration bound.
    pub t_max: usize,
    /// The inner loop exits once the step size falls below `kappa_m / q_divisor`.
    pub q_divisor: f64,
    /// Outer stopping tolerance.
    pub epsilon: f64,
}

impl Default for ZapConfig {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            kappa0: 0.02,
            eta1: 0.99,
            eta2: 0.8,
            t_max: 50,
            q_divisor: 2000.0,
            epsilon: 1e-4,
        }
    }
}

impl ZapConfig {
    pub fn validate(&self) -> Result<()> {
        PenaltyParams::new(self.alpha)?;
        if !(self.kappa0 > 0.0 && self.kappa0.is_finite()) {
            return Err(invalid(format!(
                "kappa0 must be positive, got {}",
                self.kappa0
            )));
        }
        if !(self.eta1 > 0.0 && self.eta1 < 1.0) {
            return Err(invalid(format!(
                "eta1 must lie in (0, 1), got {}",
                self.eta1
            )));
        }
        if !(self.eta2 > 0.0 && self.eta2 < 1.0) {
            return Err(invalid(format!(
                "eta2 must lie in (0, 1), got {}",
                self.eta2
            )));
        }
        if self.t_max == 0 {
            return Err(invalid("t_max must be at least 1"));
        }
        if !(self.q_divisor > 1.0 && self.q_divisor.is_finite()) {
            return Err(invalid(format!(
                "q_divisor must exceed 1, got {}",
                self.q_divisor
            )));
        }
        if self.epsilon.is_nan() || self.epsilon <= 0.0 {
            return Err(invalid(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopCause {
    IterationBound,
    StepFloor,
}

#[derive(Debug, Clone)]
pub struct InnerResult {
    /// Last computed iterate.
    pub x: DVector<f64>,
    /// Completed iterations minus one, as the outer recursion counts them.
    pub iterations: usize,
    pub final_kappa: f64,
    pub stop_cause: StopCause,
    /// l1 norm of each post-projection iterate.
    pub l1_trace: Vec<f64>,
}

/// Instrumentation callbacks from [`inner_solve_observed`].
#[derive(Debug)]
pub enum InnerEvent<'a> {
    Start {
        x0: &'a DVector<f64>,
        kappa: f64,
    },
    /// `n` is the index of the iterate just produced (1-based).
    Iterate {
        n: usize,
        x: &'a DVector<f64>,
        kappa: f64,
    },
}

pub fn inner_solve(
    gram: &GramInverse,
    y: &DVector<f64>,
    x0: &DVector<f64>,
    kappa_m: f64,
    cfg: &ZapConfig,
) -> Result<InnerResult> {
    inner_solve_observed(gram, y, x0, kappa_m, cfg, |_| {})
}

pub fn inner_solve_observed<F>(
    gram: &GramInverse,
    y: &DVector<f64>,
    x0: &DVector<f64>,
    kappa_m: f64,
    cfg: &ZapConfig,
    mut observe: F,
) -> Result<InnerResult>
where
    F: FnMut(InnerEvent<'_>),
{
    cfg.validate()?;
    if gram.m() == 0 {
        return Err(invalid("inner solve needs at least one measurement"));
    }
    if y.len() != gram.m() || x0.len() != gram.n_dim() {
        return Err(invalid(format!(
            "dimension mismatch: y has {} (expected {}), x0 has {} (expected {})",
            y.len(),
            gram.m(),
            x0.len(),
            gram.n_dim()
        )));
    }
    if x0.iter().any(|v| !v.is_finite()) {
        return Err(invalid("x0 contains non-finite entries"));
    }
    if !(kappa_m > 0.0 && kappa_m.is_finite()) {
        return Err(invalid(format!("kappa_m must be positive, got {kappa_m}")));
    }

    let alpha = cfg.alpha;
    let floor = kappa_m / cfg.q_divisor;
    let mut kappa = kappa_m;
    let mut n = 0usize;
    let mut x = x0.clone();
    let mut l1 = x.lp_norm(1);
    let mut next = DVector::zeros(x.len());
    let mut l1_trace = Vec::with_capacity(cfg.t_max.min(1024));

    observe(InnerEvent::Start { x0, kappa });

    loop {
        for (dst, &src) in next.iter_mut().zip(x.iter()) {
            *dst = src - kappa * gradient_entry(src, alpha);
        }
        gram.project_in_place(&mut next, y);
        if next.iter().any(|v| !v.is_finite()) {
            return Err(ZapError::Divergence { iteration: n + 1 });
        }

        let next_l1 = next.lp_norm(1);
        if next_l1 > l1 && kappa > floor {
            kappa *= cfg.eta2;
        }
        std::mem::swap(&mut x, &mut next);
        l1 = next_l1;
        n += 1;
        if l1_trace.len() < cfg.t_max {
            l1_trace.push(l1);
        }
        observe(InnerEvent::Iterate { n, x: &x, kappa });

        if n > cfg.t_max || kappa < floor {
            break;
        }
    }

    let stop_cause = if kappa < floor {
        StopCause::StepFloor
    } else {
        StopCause::IterationBound
    };
    Ok(InnerResult {
        x,
        iterations: n - 1,
        final_kappa: kappa,
        stop_cause,
        l1_trace,
    })
}

/// Cold start from the minimum-norm solution with step size `kappa0`.
pub fn batch_solve(gram: &GramInverse, y: &DVector<f64>, cfg: &ZapConfig) -> Result<InnerResult> {
    let x0 = gram.least_squares_solution(y)?;
    inner_solve(gram, y, &x0, cfg.kappa0, cfg)
}

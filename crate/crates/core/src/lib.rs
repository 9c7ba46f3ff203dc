//! Online zero-point attracting projection (ZAP) for sequential compressive
//! sensing.
//!
//! A K-sparse signal of length N is observed one linear measurement at a
//! time. After every sample the estimate is refined by a short run of ZAP
//! iterations (a zero-attracting gradient step on an approximate l0 penalty,
//! then a projection onto `{x : A x = y}`), starting from the previous
//! estimate. The inverse Gram matrix `(A Aᵀ)⁻¹` is grown by a bordering
//! update so that no step ever re-inverts a matrix.
//!
//! ```
//! use seqzap_core::{generate_problem, run_online, ProblemSpec, StopMode, ZapConfig};
//!
//! let problem = generate_problem(ProblemSpec::new(64, 3, 42)).unwrap();
//! let truth = problem.x_true().clone();
//! let cfg = ZapConfig::default();
//! let stop = StopMode::OracleMsd { threshold: 1e-4 };
//! let state = run_online(problem, &cfg, stop, 64, Some(&truth), 64).unwrap();
//! assert!(state.m() <= 64);
//! ```

pub mod error;
pub mod gram;
pub mod online;
pub mod penalty;
pub mod probgen;
pub mod sweep;
pub mod zap;

pub use nalgebra::{DMatrix, DVector};

pub use error::{Result, ZapError};
pub use gram::GramInverse;
pub use online::{msd, run_online, OnlineState, StepOutcome, StepRecord, StopMode};
pub use penalty::{l1_norm, penalty_gradient, penalty_value, PenaltyParams};
pub use probgen::{generate_problem, ProblemSpec, SparseProblem};
pub use sweep::{
    aggregate, emit_csv, emit_svg, run_sweep, Algorithm, Summary, SweepConfig, TrialRecord,
};
pub use zap::{
    batch_solve, inner_solve, inner_solve_observed, InnerEvent, InnerResult, StopCause, ZapConfig,
};

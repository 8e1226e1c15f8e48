//! Accuracy measures, residual boxplots, and pairwise method comparison.

pub mod boxplot;
pub mod metrics;
pub mod wilcoxon;
pub mod wtl;

use thiserror::Error;

pub use boxplot::{boxplot_summary, BoxplotSummary};
pub use metrics::{evaluate, mdmre, mmre, mre, pred, EvalReport, MreVector};
pub use wilcoxon::{wilcoxon_signed_rank, WilcoxonResult};
pub use wtl::{win_tie_loss, Measure, WtlRow, WtlTable};

/// Significance level used for the win-tie-loss gate.
pub const DEFAULT_ALPHA: f64 = 0.05;

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("actual effort must be positive, got {0}")]
    NonPositiveActual(f64),
    #[error("non-finite value")]
    NonFinite,
    #[error("MRE values must be finite and non-negative")]
    InvalidMre,
    #[error("length mismatch: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty input")]
    Empty,
    #[error("need at least {min} pairs, got {got}")]
    TooFewPairs { min: usize, got: usize },
    #[error("significance level must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("need at least two methods, got {0}")]
    TooFewMethods(usize),
    #[error("method `{method}` has {got} MRE values, expected {expected}")]
    Misaligned {
        method: String,
        expected: usize,
        got: usize,
    },
}

//! Tukey five-number summaries for boxplots of absolute residuals.

use serde::{Deserialize, Serialize};

use super::EvalError;
use crate::stats::sorted_median;

/// Whisker reach in multiples of the interquartile range.
pub const WHISKER_IQR: f64 = 1.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxplotSummary {
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Most extreme observations within 1.5 IQR of the hinges.
    pub lower_whisker: f64,
    pub upper_whisker: f64,
    pub outliers: Vec<f64>,
}

impl BoxplotSummary {
    pub fn iqr(&self) -> f64 {
        self.q3 - self.q1
    }
}

/// Summary with Tukey hinges: the medians of the lower and upper halves,
/// each half including the median when the count is odd.
pub fn boxplot_summary(values: &[f64]) -> Result<BoxplotSummary, EvalError> {
    if values.is_empty() {
        return Err(EvalError::Empty);
    }
    if values.iter().any(|v| !v.is_finite()) {
        return Err(EvalError::NonFinite);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let half = n.div_ceil(2);
    let q1 = sorted_median(&sorted[..half]);
    let q3 = sorted_median(&sorted[n - half..]);
    let iqr = q3 - q1;
    let (lo_fence, hi_fence) = (q1 - WHISKER_IQR * iqr, q3 + WHISKER_IQR * iqr);
    let inside = |v: &&f64| **v >= lo_fence && **v <= hi_fence;
    let lower_whisker = *sorted
        .iter()
        .find(inside)
        .expect("hinges lie inside the fences");
    let upper_whisker = *sorted
        .iter()
        .rev()
        .find(inside)
        .expect("hinges lie inside the fences");
    let outliers = sorted
        .iter()
        .copied()
        .filter(|v| *v < lo_fence || *v > hi_fence)
        .collect();
    Ok(BoxplotSummary {
        min: sorted[0],
        q1,
        median: sorted_median(&sorted),
        q3,
        max: sorted[n - 1],
        lower_whisker,
        upper_whisker,
        outliers,
    })
}

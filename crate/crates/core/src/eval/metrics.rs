//! Magnitude of relative error and its summaries.

use serde::{Deserialize, Serialize};

use super::boxplot::{boxplot_summary, BoxplotSummary};
use super::EvalError;
use crate::stats::sorted_median;

/// `|actual − predicted| / actual`.
pub fn mre(actual: f64, predicted: f64) -> Result<f64, EvalError> {
    if !(actual > 0.0) || !actual.is_finite() {
        return Err(EvalError::NonPositiveActual(actual));
    }
    if !predicted.is_finite() {
        return Err(EvalError::NonFinite);
    }
    Ok((actual - predicted).abs() / actual)
}

/// Per-project MRE values, aligned with a test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MreVector(Vec<f64>);

impl MreVector {
    pub fn new(values: Vec<f64>) -> Result<Self, EvalError> {
        if values.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(EvalError::InvalidMre);
        }
        Ok(MreVector(values))
    }

    pub fn from_predictions(actual: &[f64], predicted: &[f64]) -> Result<Self, EvalError> {
        if actual.len() != predicted.len() {
            return Err(EvalError::LengthMismatch(actual.len(), predicted.len()));
        }
        actual
            .iter()
            .zip(predicted)
            .map(|(a, p)| mre(*a, *p))
            .collect::<Result<Vec<_>, _>>()
            .map(MreVector)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    fn non_empty(&self) -> Result<&[f64], EvalError> {
        if self.0.is_empty() {
            Err(EvalError::Empty)
        } else {
            Ok(&self.0)
        }
    }
}

pub fn mmre(v: &MreVector) -> Result<f64, EvalError> {
    let values = v.non_empty()?;
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Median MRE; even lengths average the two central values.
pub fn mdmre(v: &MreVector) -> Result<f64, EvalError> {
    let mut sorted = v.non_empty()?.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(sorted_median(&sorted))
}

/// Percentage of projects with `MRE ≤ level` (inclusive).
pub fn pred(v: &MreVector, level: f64) -> Result<f64, EvalError> {
    let values = v.non_empty()?;
    let hits = values.iter().filter(|m| **m <= level).count();
    Ok(100.0 * hits as f64 / values.len() as f64)
}

/// Accuracy summary of one model on one test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub mmre: f64,
    pub mdmre: f64,
    pub pred25: f64,
    pub pred50: f64,
    pub mre: MreVector,
    pub abs_residuals: Vec<f64>,
    pub boxplot: BoxplotSummary,
}

pub fn evaluate(actual: &[f64], predicted: &[f64]) -> Result<EvalReport, EvalError> {
    let mre = MreVector::from_predictions(actual, predicted)?;
    let abs_residuals: Vec<f64> = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p).abs())
        .collect();
    Ok(EvalReport {
        mmre: mmre(&mre)?,
        mdmre: mdmre(&mre)?,
        pred25: pred(&mre, 0.25)?,
        pred50: pred(&mre, 0.5)?,
        boxplot: boxplot_summary(&abs_residuals)?,
        abs_residuals,
        mre,
    })
}

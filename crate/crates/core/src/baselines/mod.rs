//! Comparison models: stochastic gradient boosting, log-linear regression
//! and the classical productivity-ratio rule.

pub mod mlr;
pub mod treeboost;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::Project;
use crate::ucp::{classical_effort, UcpError, DEFAULT_RATIO};

pub use mlr::{fit_mlr, predict_mlr, MlrDiagnostics, MlrModel};
pub use treeboost::{fit_treeboost, predict_treeboost, TreeboostConfig, TreeboostModel};

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("training set has {got} projects, need at least {min}")]
    TooFewProjects { min: usize, got: usize },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("project `{id}`: {field} must be positive to take its logarithm")]
    LogUndefined { id: String, field: &'static str },
    #[error("design matrix is perfectly collinear")]
    Collinear,
    #[error("project `{0}` has non-finite features")]
    NonFinite(String),
    #[error(transparent)]
    Ucp(#[from] UcpError),
}

/// Classical estimate `size_ucp × ratio`; nothing is learned.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcpRatioModel {
    pub ratio: f64,
}

impl Default for UcpRatioModel {
    fn default() -> Self {
        UcpRatioModel {
            ratio: DEFAULT_RATIO,
        }
    }
}

impl UcpRatioModel {
    pub fn predict(&self, project: &Project) -> Result<f64, BaselineError> {
        Ok(classical_effort(project.size_ucp, self.ratio)?)
    }
}

//! On-disk model file: one JSON object tagged with the model kind.

use fmt_effort::baselines::{
    predict_mlr, predict_treeboost, MlrModel, TreeboostModel, UcpRatioModel,
};
use fmt_effort::data::{Project, FEATURE_NAMES};
use fmt_effort::fuzzy_tree::{predict_fmt, FmtModel};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum ModelKind {
    Fmt,
    Treeboost,
    Mlr,
    Ucp,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "model", rename_all = "lowercase")]
pub enum SavedModel {
    Fmt(FmtModel),
    Treeboost(TreeboostModel),
    Mlr(MlrModel),
    Ucp(UcpRatioModel),
}

impl SavedModel {
    pub fn kind(&self) -> &'static str {
        match self {
            SavedModel::Fmt(_) => "fmt",
            SavedModel::Treeboost(_) => "treeboost",
            SavedModel::Mlr(_) => "mlr",
            SavedModel::Ucp(_) => "ucp",
        }
    }

    /// Fails when the model was trained on a different feature set.
    pub fn check_features(&self) -> anyhow::Result<()> {
        if let SavedModel::Fmt(m) = self {
            if m.feature_names != FEATURE_NAMES {
                anyhow::bail!(
                    "model features {:?} do not match dataset features {:?}",
                    m.feature_names,
                    FEATURE_NAMES
                );
            }
        }
        Ok(())
    }

    pub fn predict(&self, project: &Project) -> anyhow::Result<f64> {
        Ok(match self {
            SavedModel::Fmt(m) => predict_fmt(m, project)?,
            SavedModel::Treeboost(m) => predict_treeboost(m, project)?,
            SavedModel::Mlr(m) => predict_mlr(m, project)?,
            SavedModel::Ucp(m) => m.predict(project)?,
        })
    }
}

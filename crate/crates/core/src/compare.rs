//! Holdout comparison of the fuzzy model tree against the baselines.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::baselines::{
    fit_mlr, fit_treeboost, predict_mlr, predict_treeboost, TreeboostConfig, UcpRatioModel,
};
use crate::data::{split_holdout, Dataset};
use crate::eval::{evaluate, win_tie_loss, EvalReport, Measure, WtlTable, DEFAULT_ALPHA};
use crate::fcm::FcmConfig;
use crate::fuzzy_tree::{predict_fmt, train_fmt};
use crate::mtree::TreeConfig;
use crate::ucp::DEFAULT_RATIO;
use crate::Error;

/// Model names in report order.
pub const MODEL_NAMES: [&str; 4] = ["FMT", "Treeboost", "MLR", "UCP"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompareConfig {
    pub seed: u64,
    pub train_count: usize,
    pub fcm: FcmConfig,
    pub tree: TreeConfig,
    pub treeboost: TreeboostConfig,
    pub ucp_ratio: f64,
    pub alpha: f64,
}

impl Default for CompareConfig {
    fn default() -> Self {
        CompareConfig {
            seed: 0,
            train_count: 59,
            fcm: FcmConfig::default(),
            tree: TreeConfig::default(),
            treeboost: TreeboostConfig::default(),
            ucp_ratio: DEFAULT_RATIO,
            alpha: DEFAULT_ALPHA,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelResult {
    pub name: String,
    pub predictions: Vec<f64>,
    pub report: EvalReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub config: CompareConfig,
    pub train_ids: Vec<String>,
    pub test_ids: Vec<String>,
    pub actuals: Vec<f64>,
    pub models: Vec<ModelResult>,
    pub wtl: WtlTable,
}

impl CompareReport {
    pub fn model(&self, name: &str) -> Option<&ModelResult> {
        self.models.iter().find(|m| m.name == name)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    /// Accuracy table with MMRE and MdMRE as percentages.
    pub fn metrics_table(&self) -> String {
        let mut out = String::new();
        let width = self
            .models
            .iter()
            .map(|m| m.name.len())
            .max()
            .unwrap_or(0)
            .max(5);
        writeln!(
            out,
            "{:<width$}  {:>8}  {:>8}  {:>10}  {:>9}",
            "Model", "MMRE", "MdMRE", "Pred(0.25)", "Pred(0.5)"
        )
        .unwrap();
        for m in &self.models {
            let r = &m.report;
            writeln!(
                out,
                "{:<width$}  {:>8.1}  {:>8.1}  {:>10.1}  {:>9.1}",
                m.name,
                100.0 * r.mmre,
                100.0 * r.mdmre,
                r.pred25,
                r.pred50
            )
            .unwrap();
        }
        out
    }
}

/// Splits `dataset`, trains every model on the training part and scores
/// all of them on the held-out part.
pub fn compare(dataset: &Dataset, config: &CompareConfig) -> Result<CompareReport, Error> {
    let (train, test) = split_holdout(dataset, config.train_count, config.seed)?;
    let fmt = train_fmt(&train, &config.fcm, &config.tree)?;
    let boost = fit_treeboost(&train, &config.treeboost)?;
    let mlr = fit_mlr(&train)?;
    let ratio = UcpRatioModel {
        ratio: config.ucp_ratio,
    };

    let projects = test.projects();
    let fmt_pred = projects
        .iter()
        .map(|p| predict_fmt(&fmt, p))
        .collect::<Result<Vec<_>, _>>()?;
    let boost_pred = projects
        .iter()
        .map(|p| predict_treeboost(&boost, p))
        .collect::<Result<Vec<_>, _>>()?;
    let mlr_pred = projects
        .iter()
        .map(|p| predict_mlr(&mlr, p))
        .collect::<Result<Vec<_>, _>>()?;
    let ucp_pred = projects
        .iter()
        .map(|p| ratio.predict(p))
        .collect::<Result<Vec<_>, _>>()?;

    let actuals = test.efforts();
    let models = MODEL_NAMES
        .iter()
        .zip([fmt_pred, boost_pred, mlr_pred, ucp_pred])
        .map(|(name, predictions)| {
            Ok(ModelResult {
                name: name.to_string(),
                report: evaluate(&actuals, &predictions)?,
                predictions,
            })
        })
        .collect::<Result<Vec<_>, Error>>()?;
    let mres: Vec<_> = models
        .iter()
        .map(|m| (m.name.clone(), m.report.mre.clone()))
        .collect();
    let wtl = win_tie_loss(&mres, &Measure::ALL, config.alpha)?;

    Ok(CompareReport {
        config: *config,
        train_ids: train.projects().iter().map(|p| p.id.clone()).collect(),
        test_ids: projects.iter().map(|p| p.id.clone()).collect(),
        actuals,
        models,
        wtl,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_piecewise_benchmark;

    fn benchmark_report() -> CompareReport {
        let ds = generate_piecewise_benchmark(84, 2024).unwrap();
        compare(
            &ds,
            &CompareConfig {
                seed: 2024,
                ..Default::default()
            },
        )
        .unwrap()
    }

    #[test]
    fn covers_four_models_and_split() {
        let r = benchmark_report();
        assert_eq!(r.models.len(), 4);
        assert_eq!(r.train_ids.len(), 59);
        assert_eq!(r.test_ids.len(), 25);
        for m in &r.models {
            assert_eq!(m.predictions.len(), 25);
        }
        let wtl_slots: usize = r
            .wtl
            .rows
            .iter()
            .map(|row| row.win + row.tie + row.loss)
            .sum();
        assert_eq!(wtl_slots, 4 * 3 * 4);
        let table = r.metrics_table();
        assert_eq!(table.lines().count(), 5);
        assert!(table.lines().next().unwrap().contains("Pred(0.25)"));
    }

    #[test]
    fn pinned_benchmark_metrics_are_locked() {
        let r = benchmark_report();
        let locked = [
            ("FMT", 0.1079015380475305, 0.09772092844656341, 96.0, 100.0),
            (
                "Treeboost",
                0.06090889214532126,
                0.04699337271902626,
                100.0,
                100.0,
            ),
            ("MLR", 0.19627940799205498, 0.18176178424553605, 64.0, 100.0),
            ("UCP", 0.233611089354853, 0.2165851939349934, 52.0, 96.0),
        ];
        for (name, mmre, mdmre, pred25, pred50) in locked {
            let report = &r.model(name).unwrap().report;
            assert!(
                (report.mmre - mmre).abs() < 1e-9 * mmre,
                "{name} mmre {}",
                report.mmre
            );
            assert!(
                (report.mdmre - mdmre).abs() < 1e-9 * mdmre,
                "{name} mdmre {}",
                report.mdmre
            );
            assert_eq!((report.pred25, report.pred50), (pred25, pred50), "{name}");
        }
    }

    #[test]
    fn fmt_beats_log_linear_and_ratio_rule_is_widest() {
        let r = benchmark_report();
        let mmre = |name| r.model(name).unwrap().report.mmre;
        assert!(mmre("FMT") < mmre("MLR"));
        let ucp_iqr = r.model("UCP").unwrap().report.boxplot.iqr();
        for m in &r.models {
            assert!(m.report.boxplot.iqr() <= ucp_iqr, "{}", m.name);
        }
    }

    #[test]
    fn repeated_runs_are_identical() {
        assert_eq!(benchmark_report().to_json(), benchmark_report().to_json());
    }

    #[test]
    fn invalid_train_count() {
        let ds = generate_piecewise_benchmark(84, 1).unwrap();
        let cfg = CompareConfig {
            train_count: 0,
            ..Default::default()
        };
        assert!(matches!(compare(&ds, &cfg), Err(Error::Data(_))));
    }
}

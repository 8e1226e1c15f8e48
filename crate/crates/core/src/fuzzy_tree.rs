//! Fuzzy model tree: a model tree that routes projects on their fuzzy
//! memberships and regresses effort on their raw features.
//!
//! Training clusters the standardized training features with FCM, turns the
//! clusters into per-feature Gaussian sets, computes the membership matrix of
//! the training projects and grows an M5-style tree on it. Leaf models see
//! the raw (size, productivity, complexity) values, never the memberships.
//! Test projects are mapped through the training-phase fuzzy model only.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::data::{Dataset, Project, FEATURE_NAMES};
use crate::fcm::{membership_matrix, FcmConfig, FcmError, FuzzyInferenceModel};
use crate::mtree::{smooth_predict, ModelTree, TreeConfig, TreeError};

/// Lowest effort a model may output, in person-hours.
pub const EFFORT_FLOOR_PH: f64 = 1.0;

#[derive(Debug, Error, PartialEq)]
pub enum FmtError {
    #[error("fuzzy clustering: {0}")]
    Fcm(#[from] FcmError),
    #[error("model tree: {0}")]
    Tree(#[from] TreeError),
    #[error("training set has {got} projects, need at least {min}")]
    TooFewProjects { min: usize, got: usize },
    #[error("project `{0}` has non-finite features")]
    NonFinite(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FmtModel {
    pub fuzzy: FuzzyInferenceModel,
    pub tree: ModelTree,
    pub feature_names: Vec<String>,
    pub fcm_config: FcmConfig,
    pub tree_config: TreeConfig,
}

impl FmtModel {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Membership-space routing row of a project.
    pub fn routing_row(&self, project: &Project) -> Result<Vec<f64>, FmtError> {
        Ok(self.fuzzy.memberships(&project.features())?)
    }
}

/// Trains a fuzzy model tree on `train`.
pub fn train_fmt(
    train: &Dataset,
    fcm_config: &FcmConfig,
    tree_config: &TreeConfig,
) -> Result<FmtModel, FmtError> {
    fcm_config.validate()?;
    tree_config.validate()?;
    let min = fcm_config.clusters.max(tree_config.min_instances);
    if train.len() < min {
        return Err(FmtError::TooFewProjects {
            min,
            got: train.len(),
        });
    }
    let (fuzzy, _) = FuzzyInferenceModel::fit(&train.feature_matrix(), fcm_config)?;
    train_with_fuzzy_model(train, fuzzy, fcm_config, tree_config)
}

/// Grows the tree stage on top of an existing fuzzy model.
pub fn train_with_fuzzy_model(
    train: &Dataset,
    fuzzy: FuzzyInferenceModel,
    fcm_config: &FcmConfig,
    tree_config: &TreeConfig,
) -> Result<FmtModel, FmtError> {
    let raw = train.feature_matrix();
    let routing = membership_matrix(&fuzzy, &raw)?;
    let tree = ModelTree::fit(&routing, &raw, &train.efforts(), tree_config)?;
    Ok(FmtModel {
        fuzzy,
        tree,
        feature_names: FEATURE_NAMES.iter().map(|s| s.to_string()).collect(),
        fcm_config: *fcm_config,
        tree_config: *tree_config,
    })
}

/// Smoothed tree prediction for one project, floored at [`EFFORT_FLOOR_PH`].
pub fn predict_fmt(model: &FmtModel, project: &Project) -> Result<f64, FmtError> {
    let raw = project.features();
    if raw.iter().any(|v| !v.is_finite()) {
        return Err(FmtError::NonFinite(project.id.clone()));
    }
    let routing = model.routing_row(project)?;
    let value = smooth_predict(&model.tree, &routing, &raw, &model.tree_config)?;
    Ok(value.max(EFFORT_FLOOR_PH))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::{generate_piecewise_benchmark, split_holdout, SourceLabel};
    use crate::mtree::{build_tree, Node};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn linear_dataset(n: usize, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projects = (0..n)
            .map(|i| {
                let size: f64 = rng.random_range(50.0..600.0);
                let productivity: f64 = rng.random_range(10.0..35.0);
                let complexity = rng.random_range(1..=5) as f64;
                Project {
                    id: format!("p{i}"),
                    size_ucp: size,
                    productivity,
                    complexity,
                    effort_ph: 300.0 + 18.0 * size + 25.0 * productivity + 90.0 * complexity,
                }
            })
            .collect();
        Dataset::new(projects, SourceLabel::Synthetic).unwrap()
    }

    #[test]
    fn nine_routing_columns() {
        let ds = generate_piecewise_benchmark(84, 1).unwrap();
        let (train, _) = split_holdout(&ds, 59, 1).unwrap();
        let model = train_fmt(&train, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        assert_eq!(model.tree.routing_dim, 9);
        assert_eq!(model.tree.regression_dim, 3);
    }

    #[test]
    fn constant_effort_gives_constant_model() {
        let ds = linear_dataset(30, 2);
        let projects = ds
            .projects()
            .iter()
            .map(|p| Project {
                effort_ph: 1234.0,
                ..p.clone()
            })
            .collect();
        let ds = Dataset::new(projects, SourceLabel::Synthetic).unwrap();
        let model = train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        assert!(model.tree.root.is_leaf());
        for p in ds.projects() {
            assert!((predict_fmt(&model, p).unwrap() - 1234.0).abs() < 1e-6);
        }
    }

    #[test]
    fn linear_ground_truth_is_exact() {
        let ds = linear_dataset(84, 3);
        let (train, test) = split_holdout(&ds, 59, 3).unwrap();
        let model = train_fmt(&train, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        for p in test.projects() {
            let rel = (predict_fmt(&model, p).unwrap() - p.effort_ph).abs() / p.effort_ph;
            assert!(rel < 1e-4, "relative error {rel}");
        }
    }

    #[test]
    fn unpruned_pure_leaves_repredict_training_rows() {
        let ds = generate_piecewise_benchmark(60, 5).unwrap();
        let model = train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        let raw = ds.feature_matrix();
        let routing = membership_matrix(&model.fuzzy, &raw).unwrap();
        let cfg = TreeConfig {
            smoothing_k: 0.0,
            ..TreeConfig::default()
        };
        let grown = build_tree(&routing, &raw, &ds.efforts(), &cfg).unwrap();
        let unpruned = FmtModel {
            tree: grown.clone(),
            tree_config: cfg,
            ..model
        };
        for (i, p) in ds.projects().iter().enumerate() {
            let mut node = &grown.root;
            while let Node::Split {
                feature,
                threshold,
                left,
                right,
                ..
            } = node
            {
                node = if routing.get(i, *feature) <= *threshold {
                    left
                } else {
                    right
                };
            }
            let leaf_value = node.model().eval(&p.features()).max(EFFORT_FLOOR_PH);
            assert_eq!(predict_fmt(&unpruned, p).unwrap(), leaf_value);
        }
    }

    #[test]
    fn identical_projects_identical_predictions() {
        let ds = generate_piecewise_benchmark(84, 6).unwrap();
        let model = train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        let p = ds.projects()[10].clone();
        let twin = Project {
            id: "twin".into(),
            ..p.clone()
        };
        assert_eq!(
            predict_fmt(&model, &p).unwrap(),
            predict_fmt(&model, &twin).unwrap()
        );
    }

    #[test]
    fn non_finite_features_rejected() {
        let ds = generate_piecewise_benchmark(40, 7).unwrap();
        let model = train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        let mut p = ds.projects()[0].clone();
        p.productivity = f64::NAN;
        assert!(matches!(
            predict_fmt(&model, &p),
            Err(FmtError::NonFinite(_))
        ));
    }

    #[test]
    fn too_few_projects() {
        let ds = linear_dataset(3, 1);
        assert!(matches!(
            train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()),
            Err(FmtError::TooFewProjects { min: 4, got: 3 })
        ));
    }

    #[test]
    fn cluster_relabeling_keeps_prediction_multiset() {
        let ds = generate_piecewise_benchmark(84, 9).unwrap();
        let (train, _) = split_holdout(&ds, 59, 9).unwrap();
        let (fcm, tree) = (FcmConfig::default(), TreeConfig::default());
        let base = train_fmt(&train, &fcm, &tree).unwrap();
        let sorted_predictions = |model: &FmtModel| {
            let mut v: Vec<f64> = train
                .projects()
                .iter()
                .map(|p| predict_fmt(model, p).unwrap())
                .collect();
            v.sort_by(f64::total_cmp);
            v
        };
        let expected = sorted_predictions(&base);
        for perm in [[1, 0, 2], [2, 0, 1], [2, 1, 0]] {
            let relabeled =
                train_with_fuzzy_model(&train, base.fuzzy.permute_clusters(&perm), &fcm, &tree)
                    .unwrap();
            for (a, b) in sorted_predictions(&relabeled).iter().zip(&expected) {
                assert!((a - b).abs() <= 1e-9 * b.abs(), "{perm:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn model_depends_only_on_training_projects() {
        let ds = generate_piecewise_benchmark(84, 10).unwrap();
        let (train, test) = split_holdout(&ds, 59, 10).unwrap();
        let model = train_fmt(&train, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        let snapshot = model.clone();
        for p in test.projects() {
            predict_fmt(&model, p).unwrap();
        }
        assert_eq!(model, snapshot);
        // Retraining from the same rows, whatever the source label, reproduces it.
        let again = Dataset::new(train.projects().to_vec(), SourceLabel::Mixed).unwrap();
        assert_eq!(
            train_fmt(&again, &FcmConfig::default(), &TreeConfig::default()).unwrap(),
            model
        );
    }

    #[test]
    fn json_round_trip() {
        let ds = generate_piecewise_benchmark(50, 8).unwrap();
        let model = train_fmt(&ds, &FcmConfig::default(), &TreeConfig::default()).unwrap();
        let back = FmtModel::from_json(&model.to_json()).unwrap();
        for p in ds.projects() {
            assert_eq!(
                predict_fmt(&back, p).unwrap(),
                predict_fmt(&model, p).unwrap()
            );
        }
    }
}

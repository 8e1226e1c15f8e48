//! Stochastic gradient tree boosting with Huber loss (Friedman's M-TreeBoost).
//!
//! The model is the series `F(x) = F0 + ν Σ_m T_m(x)`. Each stage fits a
//! shallow least-squares tree to the Huber pseudo-residuals of a random
//! subsample, then replaces every leaf value by the Huber location of the
//! raw residuals in that leaf.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BaselineError;
use crate::data::{Dataset, Project};
use crate::fuzzy_tree::EFFORT_FLOOR_PH;
use crate::stats::{median, quantile};

/// Smallest number of rows in a boosting-tree leaf.
const MIN_LEAF_ROWS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeboostConfig {
    pub n_trees: usize,
    pub huber_quantile: f64,
    pub shrinkage: f64,
    pub stochastic_fraction: f64,
    pub influence_trimming: f64,
    pub max_depth: usize,
    pub seed: u64,
}

impl Default for TreeboostConfig {
    fn default() -> Self {
        TreeboostConfig {
            n_trees: 1000,
            huber_quantile: 0.95,
            shrinkage: 0.1,
            stochastic_fraction: 0.5,
            influence_trimming: 0.01,
            max_depth: 3,
            seed: 0,
        }
    }
}

impl TreeboostConfig {
    pub fn validate(&self) -> Result<(), BaselineError> {
        let bad = |msg: &str| Err(BaselineError::InvalidConfig(msg.to_string()));
        if self.n_trees == 0 {
            return bad("n_trees must be positive");
        }
        if !(self.huber_quantile > 0.0 && self.huber_quantile < 1.0) {
            return bad("huber_quantile must lie in (0, 1)");
        }
        if !(self.shrinkage > 0.0 && self.shrinkage <= 1.0) {
            return bad("shrinkage must lie in (0, 1]");
        }
        if !(self.stochastic_fraction > 0.0 && self.stochastic_fraction <= 1.0) {
            return bad("stochastic_fraction must lie in (0, 1]");
        }
        if !(self.influence_trimming >= 0.0 && self.influence_trimming < 1.0) {
            return bad("influence_trimming must lie in [0, 1)");
        }
        if self.max_depth == 0 {
            return bad("max_depth must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum StageNode {
    Leaf {
        value: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<StageNode>,
        right: Box<StageNode>,
    },
}

impl StageNode {
    /// In-order index of the leaf reached by `x`.
    fn leaf_id(&self, x: &[f64]) -> usize {
        match self {
            StageNode::Leaf { .. } => 0,
            StageNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.leaf_id(x)
                } else {
                    left.leaf_count() + right.leaf_id(x)
                }
            }
        }
    }

    fn set_leaf(&mut self, id: usize, new_value: f64) {
        match self {
            StageNode::Leaf { value } => *value = new_value,
            StageNode::Split { left, right, .. } => {
                let in_left = left.leaf_count();
                if id < in_left {
                    left.set_leaf(id, new_value)
                } else {
                    right.set_leaf(id - in_left, new_value)
                }
            }
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            StageNode::Leaf { value } => *value,
            StageNode::Split {
                feature,
                threshold,
                left,
                right,
            } => {
                if x[*feature] <= *threshold {
                    left.eval(x)
                } else {
                    right.eval(x)
                }
            }
        }
    }

    pub fn leaf_count(&self) -> usize {
        match self {
            StageNode::Leaf { .. } => 1,
            StageNode::Split { left, right, .. } => left.leaf_count() + right.leaf_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeboostModel {
    pub f0: f64,
    pub shrinkage: f64,
    pub trees: Vec<StageNode>,
    /// Training loss of every stage under that stage's own cutoff.
    pub loss_trace: Vec<StageLoss>,
    pub config: TreeboostConfig,
}

/// Mean training Huber loss of one stage, before and after its update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageLoss {
    pub delta: f64,
    pub before: f64,
    pub after: f64,
}

/// Huber loss with cutoff `delta`.
pub fn huber_loss(residual: f64, delta: f64) -> f64 {
    let a = residual.abs();
    if a <= delta {
        0.5 * residual * residual
    } else {
        delta * (a - 0.5 * delta)
    }
}

fn mean_huber(residuals: &[f64], delta: f64) -> f64 {
    residuals.iter().map(|r| huber_loss(*r, delta)).sum::<f64>() / residuals.len() as f64
}

/// Least-squares regression tree of bounded depth over `rows`.
fn grow_stage_tree(x: &[[f64; 3]], target: &[f64], rows: &[usize], depth_left: usize) -> StageNode {
    let mean = rows.iter().map(|&i| target[i]).sum::<f64>() / rows.len() as f64;
    if depth_left == 0 || rows.len() < 2 * MIN_LEAF_ROWS {
        return StageNode::Leaf { value: mean };
    }
    let n = rows.len();
    let total: f64 = rows.iter().map(|&i| target[i]).sum();
    let total_sq: f64 = rows.iter().map(|&i| target[i] * target[i]).sum();
    let parent_sse = total_sq - total * total / n as f64;
    if parent_sse <= 0.0 {
        return StageNode::Leaf { value: mean };
    }
    let mut best: Option<(usize, f64, f64)> = None;
    for feature in 0..3 {
        let mut order = rows.to_vec();
        order.sort_by(|&a, &b| x[a][feature].total_cmp(&x[b][feature]));
        let (mut s, mut s2) = (0.0, 0.0);
        for pos in 0..n - 1 {
            let y = target[order[pos]];
            s += y;
            s2 += y * y;
            let (ln, rn) = (pos + 1, n - pos - 1);
            let (here, next) = (x[order[pos]][feature], x[order[pos + 1]][feature]);
            if here == next || ln < MIN_LEAF_ROWS || rn < MIN_LEAF_ROWS {
                continue;
            }
            let sse =
                (s2 - s * s / ln as f64) + ((total_sq - s2) - (total - s).powi(2) / rn as f64);
            if best.is_none_or(|(_, _, b)| sse < b - 1e-12 * parent_sse) {
                best = Some((feature, 0.5 * (here + next), sse));
            }
        }
    }
    match best {
        Some((feature, threshold, sse)) if sse < parent_sse => {
            let (l, r): (Vec<usize>, Vec<usize>) =
                rows.iter().partition(|&&i| x[i][feature] <= threshold);
            StageNode::Split {
                feature,
                threshold,
                left: Box::new(grow_stage_tree(x, target, &l, depth_left - 1)),
                right: Box::new(grow_stage_tree(x, target, &r, depth_left - 1)),
            }
        }
        _ => StageNode::Leaf { value: mean },
    }
}

/// Minimizer of `Σ huber(v − γ, delta)` over `γ`, by bisection on the
/// clipped deviation sum, which is non-increasing in `γ`.
fn huber_location(values: &[f64], delta: f64) -> f64 {
    let psi = |g: f64| {
        values
            .iter()
            .map(|v| (v - g).clamp(-delta, delta))
            .sum::<f64>()
    };
    let mut lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if psi(lo) <= 0.0 {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if psi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn fit_treeboost(
    train: &Dataset,
    config: &TreeboostConfig,
) -> Result<TreeboostModel, BaselineError> {
    config.validate()?;
    if train.len() < 10 {
        return Err(BaselineError::TooFewProjects {
            min: 10,
            got: train.len(),
        });
    }
    let x: Vec<[f64; 3]> = train.projects().iter().map(Project::features).collect();
    let y = train.efforts();
    let n = y.len();
    let f0 = median(&y);
    let mut fitted = vec![f0; n];
    let mut residuals: Vec<f64> = y.iter().map(|v| v - f0).collect();
    let mut loss_trace = Vec::new();
    let mut trees = Vec::new();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let sample_size = ((config.stochastic_fraction * n as f64).ceil() as usize).clamp(1, n);
    let mut order: Vec<usize> = (0..n).collect();

    for _ in 0..config.n_trees {
        let abs: Vec<f64> = residuals.iter().map(|r| r.abs()).collect();
        let delta = quantile(&abs, config.huber_quantile);
        if !(delta > 0.0) {
            break;
        }
        let pseudo: Vec<f64> = residuals.iter().map(|r| r.clamp(-delta, delta)).collect();

        order.shuffle(&mut rng);
        let mut stage_rows: Vec<usize> = order[..sample_size].to_vec();
        let trim = (config.influence_trimming * stage_rows.len() as f64).floor() as usize;
        if trim > 0 && stage_rows.len() - trim >= 2 * MIN_LEAF_ROWS {
            stage_rows
                .sort_by(|&a, &b| pseudo[a].abs().total_cmp(&pseudo[b].abs()).then(a.cmp(&b)));
            stage_rows.drain(..trim);
        }
        stage_rows.sort_unstable();

        let mut tree = grow_stage_tree(&x, &pseudo, &stage_rows, config.max_depth);
        // Robust leaf values from the raw residuals routed to each leaf.
        let mut buckets = vec![Vec::new(); tree.leaf_count()];
        for &i in &stage_rows {
            buckets[tree.leaf_id(&x[i])].push(residuals[i]);
        }
        for (id, bucket) in buckets.iter().enumerate() {
            if !bucket.is_empty() {
                tree.set_leaf(id, huber_location(bucket, delta));
            }
        }

        let before = mean_huber(&residuals, delta);
        for i in 0..n {
            fitted[i] += config.shrinkage * tree.eval(&x[i]);
            residuals[i] = y[i] - fitted[i];
        }
        let after = mean_huber(&residuals, delta);
        loss_trace.push(StageLoss {
            delta,
            before,
            after,
        });
        trees.push(tree);
    }

    Ok(TreeboostModel {
        f0,
        shrinkage: config.shrinkage,
        trees,
        loss_trace,
        config: *config,
    })
}

impl TreeboostModel {
    /// Raw series value `f0 + shrinkage · Σ T_m(x)`.
    pub fn raw_predict(&self, features: &[f64; 3]) -> f64 {
        self.f0 + self.shrinkage * self.trees.iter().map(|t| t.eval(features)).sum::<f64>()
    }
}

pub fn predict_treeboost(model: &TreeboostModel, project: &Project) -> Result<f64, BaselineError> {
    let x = project.features();
    if x.iter().any(|v| !v.is_finite()) {
        return Err(BaselineError::NonFinite(project.id.clone()));
    }
    Ok(model.raw_predict(&x).max(EFFORT_FLOOR_PH))
}

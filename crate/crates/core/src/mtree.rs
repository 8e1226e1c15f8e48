//! M5-style model trees with separate routing and regression feature spaces.
//!
//! Splits are chosen on the routing matrix by standard deviation reduction,
//! every node carries a least-squares model over the regression matrix, the
//! tree is pruned bottom-up on complexity-adjusted error, and predictions are
//! smoothed toward the ancestor models on the way back to the root. Passing
//! the same matrix for routing and regression gives a plain M5 tree.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{ridge_affine_fit, Matrix};
use crate::stats::population_sd;

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error("need at least {min} rows, got {got}")]
    TooFewRows { min: usize, got: usize },
    #[error("targets contain non-finite values")]
    NonFiniteTargets,
    #[error("inputs contain non-finite values")]
    NonFiniteInputs,
    #[error("row count mismatch: routing {routing}, regression {regression}, targets {targets}")]
    RowMismatch {
        routing: usize,
        regression: usize,
        targets: usize,
    },
    #[error("{what}: expected {expected} values, got {got}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeConfig {
    /// Minimum number of training rows in a leaf.
    pub min_instances: usize,
    /// A node whose target sd falls below this fraction of the root sd is
    /// not split.
    pub sd_fraction: f64,
    /// Smoothing constant `k`; zero disables smoothing.
    pub smoothing_k: f64,
    /// Multiplier on the parameter count in the error inflation
    /// `(n + pruning_factor·v) / (n − v)`.
    pub pruning_factor: f64,
}

impl Default for TreeConfig {
    fn default() -> Self {
        TreeConfig {
            min_instances: 4,
            sd_fraction: 0.05,
            smoothing_k: 15.0,
            pruning_factor: 1.0,
        }
    }
}

impl TreeConfig {
    pub fn validate(&self) -> Result<(), TreeError> {
        if self.min_instances < 2 {
            return Err(TreeError::InvalidConfig(
                "min_instances must be at least 2".into(),
            ));
        }
        if !(self.sd_fraction > 0.0 && self.sd_fraction < 1.0) {
            return Err(TreeError::InvalidConfig(
                "sd_fraction must lie in (0, 1)".into(),
            ));
        }
        if !(self.smoothing_k >= 0.0 && self.smoothing_k.is_finite()) {
            return Err(TreeError::InvalidConfig(
                "smoothing_k must be non-negative".into(),
            ));
        }
        if !(self.pruning_factor >= 0.0 && self.pruning_factor.is_finite()) {
            return Err(TreeError::InvalidConfig(
                "pruning_factor must be non-negative".into(),
            ));
        }
        Ok(())
    }
}

/// `intercept + Σ coefficients[j] · x[j]` over the regression features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

impl LinearModel {
    pub fn constant(value: f64, d: usize) -> Self {
        LinearModel {
            intercept: value,
            coefficients: vec![0.0; d],
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.intercept
            + self
                .coefficients
                .iter()
                .zip(x)
                .map(|(b, v)| b * v)
                .sum::<f64>()
    }

    /// Number of fitted parameters, intercept included.
    pub fn parameter_count(&self) -> usize {
        self.coefficients.len() + 1
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Node {
    Leaf {
        model: LinearModel,
        instance_count: usize,
        /// Mean absolute training error of `model` on this node's rows.
        model_error: f64,
    },
    Split {
        feature: usize,
        threshold: f64,
        left: Box<Node>,
        right: Box<Node>,
        model: LinearModel,
        instance_count: usize,
        model_error: f64,
    },
}

impl Node {
    pub fn instance_count(&self) -> usize {
        match self {
            Node::Leaf { instance_count, .. } | Node::Split { instance_count, .. } => {
                *instance_count
            }
        }
    }

    pub fn model(&self) -> &LinearModel {
        match self {
            Node::Leaf { model, .. } | Node::Split { model, .. } => model,
        }
    }

    fn model_error(&self) -> f64 {
        match self {
            Node::Leaf { model_error, .. } | Node::Split { model_error, .. } => *model_error,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, Node::Leaf { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelTree {
    pub root: Node,
    pub routing_dim: usize,
    pub regression_dim: usize,
}

/// A candidate split and its standard deviation reduction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitChoice {
    pub feature: usize,
    pub threshold: f64,
    pub sdr: f64,
}

/// Best SDR split of `rows` over the routing columns, with each side holding
/// at least `min_leaf` rows. Candidate thresholds are midpoints between
/// consecutive distinct values. Ties go to the lower feature index, then
/// the lower threshold.
pub fn best_split(
    routing: &Matrix,
    targets: &[f64],
    rows: &[usize],
    min_leaf: usize,
) -> Option<SplitChoice> {
    let n = rows.len();
    if n < 2 * min_leaf.max(1) {
        return None;
    }
    let node_values: Vec<f64> = rows.iter().map(|&i| targets[i]).collect();
    let parent_sd = population_sd(&node_values);
    let nf = n as f64;
    let mut best: Option<SplitChoice> = None;

    for feature in 0..routing.cols() {
        let mut order: Vec<usize> = rows.to_vec();
        order.sort_by(|&a, &b| routing.get(a, feature).total_cmp(&routing.get(b, feature)));

        // Prefix sums of y and y^2 along the sorted order.
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        let total: f64 = node_values.iter().sum();
        let total_sq: f64 = node_values.iter().map(|v| v * v).sum();
        for pos in 0..n - 1 {
            let y = targets[order[pos]];
            sum += y;
            sum_sq += y * y;
            let left_n = pos + 1;
            let right_n = n - left_n;
            let here = routing.get(order[pos], feature);
            let next = routing.get(order[pos + 1], feature);
            if here == next || left_n < min_leaf || right_n < min_leaf {
                continue;
            }
            let sd_of = |s: f64, s2: f64, k: usize| {
                let k = k as f64;
                ((s2 / k - (s / k).powi(2)).max(0.0)).sqrt()
            };
            let left_sd = sd_of(sum, sum_sq, left_n);
            let right_sd = sd_of(total - sum, total_sq - sum_sq, right_n);
            let sdr = parent_sd - (left_n as f64 / nf) * left_sd - (right_n as f64 / nf) * right_sd;
            let threshold = 0.5 * (here + next);
            let better = match best {
                None => true,
                // Strict improvement only: earlier features and thresholds win ties.
                Some(b) => sdr > b.sdr + 1e-12 * parent_sd.max(f64::MIN_POSITIVE),
            };
            if better {
                best = Some(SplitChoice {
                    feature,
                    threshold,
                    sdr,
                });
            }
        }
    }
    best
}

fn mean_abs_error(
    model: &LinearModel,
    regression: &Matrix,
    targets: &[f64],
    rows: &[usize],
) -> f64 {
    rows.iter()
        .map(|&i| (targets[i] - model.eval(regression.row(i))).abs())
        .sum::<f64>()
        / rows.len() as f64
}

struct Builder<'a> {
    routing: &'a Matrix,
    regression: &'a Matrix,
    targets: &'a [f64],
    config: &'a TreeConfig,
    root_sd: f64,
}

impl Builder<'_> {
    fn node_model(&self, rows: &[usize]) -> (LinearModel, f64) {
        let fit = ridge_affine_fit(self.regression, rows, self.targets);
        let model = LinearModel {
            intercept: fit.intercept,
            coefficients: fit.coefficients,
        };
        let err = mean_abs_error(&model, self.regression, self.targets, rows);
        (model, err)
    }

    fn grow(&self, rows: Vec<usize>) -> Node {
        let (model, model_error) = self.node_model(&rows);
        let values: Vec<f64> = rows.iter().map(|&i| self.targets[i]).collect();
        let small = rows.len() < 2 * self.config.min_instances;
        let flat = population_sd(&values) < self.config.sd_fraction * self.root_sd
            || population_sd(&values) == 0.0;
        let split = if small || flat {
            None
        } else {
            best_split(self.routing, self.targets, &rows, self.config.min_instances)
        };
        match split {
            Some(choice) if choice.sdr > 0.0 => {
                let (left, right): (Vec<usize>, Vec<usize>) = rows
                    .iter()
                    .partition(|&&i| self.routing.get(i, choice.feature) <= choice.threshold);
                Node::Split {
                    feature: choice.feature,
                    threshold: choice.threshold,
                    instance_count: rows.len(),
                    left: Box::new(self.grow(left)),
                    right: Box::new(self.grow(right)),
                    model,
                    model_error,
                }
            }
            _ => Node::Leaf {
                model,
                instance_count: rows.len(),
                model_error,
            },
        }
    }
}

/// Grows an unpruned tree. Every node keeps its own linear model.
pub fn build_tree(
    routing: &Matrix,
    regression: &Matrix,
    targets: &[f64],
    config: &TreeConfig,
) -> Result<ModelTree, TreeError> {
    config.validate()?;
    let n = targets.len();
    if routing.rows() != n || regression.rows() != n {
        return Err(TreeError::RowMismatch {
            routing: routing.rows(),
            regression: regression.rows(),
            targets: n,
        });
    }
    if n < config.min_instances {
        return Err(TreeError::TooFewRows {
            min: config.min_instances,
            got: n,
        });
    }
    if targets.iter().any(|t| !t.is_finite()) {
        return Err(TreeError::NonFiniteTargets);
    }
    if !routing.is_finite() || !regression.is_finite() {
        return Err(TreeError::NonFiniteInputs);
    }
    let builder = Builder {
        routing,
        regression,
        targets,
        config,
        root_sd: population_sd(targets),
    };
    Ok(ModelTree {
        root: builder.grow((0..n).collect()),
        routing_dim: routing.cols(),
        regression_dim: regression.cols(),
    })
}

/// Error inflation `(n + factor·v) / (n − v)`; nodes with no more rows than
/// parameters get the fixed penalty 10.
pub fn error_inflation(n: usize, v: usize, pruning_factor: f64) -> f64 {
    if n <= v {
        return 10.0;
    }
    (n as f64 + pruning_factor * v as f64) / (n - v) as f64
}

fn adjusted_node_error(node: &Node, config: &TreeConfig) -> f64 {
    node.model_error()
        * error_inflation(
            node.instance_count(),
            node.model().parameter_count(),
            config.pruning_factor,
        )
}

/// Complexity-adjusted training error of a (sub)tree: the adjusted error of
/// a leaf, or the instance-weighted average over the children.
pub fn subtree_error(node: &Node, config: &TreeConfig) -> f64 {
    match node {
        Node::Leaf { .. } => adjusted_node_error(node, config),
        Node::Split {
            left,
            right,
            instance_count,
            ..
        } => {
            let n = *instance_count as f64;
            (left.instance_count() as f64 * subtree_error(left, config)
                + right.instance_count() as f64 * subtree_error(right, config))
                / n
        }
    }
}

/// Bottom-up pruning: a subtree becomes a leaf carrying its node model when
/// that model's adjusted error does not exceed the subtree's.
pub fn prune(tree: &ModelTree, config: &TreeConfig) -> ModelTree {
    ModelTree {
        root: prune_node(&tree.root, config),
        ..tree.clone()
    }
}

fn prune_node(node: &Node, config: &TreeConfig) -> Node {
    match node {
        Node::Leaf { .. } => node.clone(),
        Node::Split {
            feature,
            threshold,
            left,
            right,
            model,
            instance_count,
            model_error,
        } => {
            let pruned = Node::Split {
                feature: *feature,
                threshold: *threshold,
                left: Box::new(prune_node(left, config)),
                right: Box::new(prune_node(right, config)),
                model: model.clone(),
                instance_count: *instance_count,
                model_error: *model_error,
            };
            let as_leaf = Node::Leaf {
                model: model.clone(),
                instance_count: *instance_count,
                model_error: *model_error,
            };
            let leaf_err = adjusted_node_error(&as_leaf, config);
            let split_err = subtree_error(&pruned, config);
            // Absorb floating-point noise on exactly fitted nodes.
            let slack =
                1e-9 * (model.intercept.abs() + leaf_err.abs() + split_err.abs()).max(1e-300);
            if leaf_err <= split_err + slack {
                as_leaf
            } else {
                pruned
            }
        }
    }
}

impl ModelTree {
    /// Builds and prunes in one step.
    pub fn fit(
        routing: &Matrix,
        regression: &Matrix,
        targets: &[f64],
        config: &TreeConfig,
    ) -> Result<Self, TreeError> {
        Ok(prune(
            &build_tree(routing, regression, targets, config)?,
            config,
        ))
    }

    fn check_dims(&self, routing_row: &[f64], regression_row: &[f64]) -> Result<(), TreeError> {
        if routing_row.len() != self.routing_dim {
            return Err(TreeError::DimensionMismatch {
                what: "routing row",
                expected: self.routing_dim,
                got: routing_row.len(),
            });
        }
        if regression_row.len() != self.regression_dim {
            return Err(TreeError::DimensionMismatch {
                what: "regression row",
                expected: self.regression_dim,
                got: regression_row.len(),
            });
        }
        Ok(())
    }

    /// Root-to-leaf path followed by `routing_row`.
    pub fn path(&self, routing_row: &[f64]) -> Vec<&Node> {
        let mut path = vec![&self.root];
        let mut node = &self.root;
        while let Node::Split {
            feature,
            threshold,
            left,
            right,
            ..
        } = node
        {
            node = if routing_row[*feature] <= *threshold {
                left
            } else {
                right
            };
            path.push(node);
        }
        path
    }

    /// Leaf model evaluation without smoothing.
    pub fn leaf_predict(
        &self,
        routing_row: &[f64],
        regression_row: &[f64],
    ) -> Result<f64, TreeError> {
        self.check_dims(routing_row, regression_row)?;
        let path = self.path(routing_row);
        Ok(path
            .last()
            .expect("path has a root")
            .model()
            .eval(regression_row))
    }

    pub fn leaf_count(&self) -> usize {
        fn count(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 1,
                Node::Split { left, right, .. } => count(left) + count(right),
            }
        }
        count(&self.root)
    }

    pub fn depth(&self) -> usize {
        fn depth(node: &Node) -> usize {
            match node {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + depth(left).max(depth(right)),
            }
        }
        depth(&self.root)
    }
}

/// Prediction smoothed along the path back to the root:
/// `p ← (n_child·p + k·q) / (n_child + k)` at every ancestor, where `q` is
/// the ancestor's own model value.
pub fn smooth_predict(
    tree: &ModelTree,
    routing_row: &[f64],
    regression_row: &[f64],
    config: &TreeConfig,
) -> Result<f64, TreeError> {
    tree.check_dims(routing_row, regression_row)?;
    if routing_row
        .iter()
        .chain(regression_row)
        .any(|v| !v.is_finite())
    {
        return Err(TreeError::NonFiniteInputs);
    }
    let path = tree.path(routing_row);
    let k = config.smoothing_k;
    let mut prediction = path
        .last()
        .expect("path has a root")
        .model()
        .eval(regression_row);
    if k == 0.0 {
        return Ok(prediction);
    }
    for pair in path.windows(2).rev() {
        let (ancestor, child) = (pair[0], pair[1]);
        let n = child.instance_count() as f64;
        prediction = (n * prediction + k * ancestor.model().eval(regression_row)) / (n + k);
    }
    Ok(prediction)
}

impl fmt::Display for ModelTree {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn model_text(m: &LinearModel) -> String {
            let mut s = format!("{:.6}", m.intercept);
            for (j, b) in m.coefficients.iter().enumerate() {
                if *b != 0.0 {
                    s.push_str(&format!(
                        " {} {:.6}*x{}",
                        if *b < 0.0 { '-' } else { '+' },
                        b.abs(),
                        j
                    ));
                }
            }
            s
        }
        fn walk(node: &Node, depth: usize, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            let pad = "|   ".repeat(depth);
            match node {
                Node::Leaf {
                    model,
                    instance_count,
                    ..
                } => {
                    writeln!(f, "{pad}LM n={instance_count}: y = {}", model_text(model))
                }
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                    ..
                } => {
                    writeln!(f, "{pad}r{feature} <= {threshold:.6}")?;
                    walk(left, depth + 1, f)?;
                    writeln!(f, "{pad}r{feature} >  {threshold:.6}")?;
                    walk(right, depth + 1, f)
                }
            }
        }
        walk(&self.root, 0, f)
    }
}

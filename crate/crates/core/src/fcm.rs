//! Fuzzy C-Means clustering and the Gaussian fuzzy inference model derived
//! from a fuzzy partition.
//!
//! Clustering alternates the two Bezdek updates
//!
//! ```text
//! v_c  = Σ_i u_ic^m x_i / Σ_i u_ic^m
//! u_ic = 1 / Σ_q (‖x_i − v_c‖ / ‖x_i − v_q‖)^(2/(m−1))
//! ```
//!
//! until no membership moves by more than the tolerance. Each cluster is then
//! projected onto every feature axis to give one Gaussian membership function
//! per (feature, cluster) pair, with the membership-weighted spread as width.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum FcmError {
    #[error("need at least {k} rows to form {k} clusters, got {n}")]
    TooFewRows { n: usize, k: usize },
    #[error("all rows are identical; cannot form {0} distinct clusters")]
    DegenerateGeometry(usize),
    #[error("features contain non-finite values")]
    NonFinite,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: expected {expected} columns, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FcmConfig {
    pub clusters: usize,
    pub fuzzifier: f64,
    pub tolerance: f64,
    pub max_iterations: usize,
    pub seed: u64,
}

impl Default for FcmConfig {
    fn default() -> Self {
        FcmConfig {
            clusters: 3,
            fuzzifier: 2.0,
            tolerance: 1e-6,
            max_iterations: 300,
            seed: 0,
        }
    }
}

impl FcmConfig {
    pub fn validate(&self) -> Result<(), FcmError> {
        if self.clusters < 1 {
            return Err(FcmError::InvalidConfig(
                "clusters must be at least 1".into(),
            ));
        }
        if !(self.fuzzifier > 1.0 && self.fuzzifier.is_finite()) {
            return Err(FcmError::InvalidConfig(format!(
                "fuzzifier must exceed 1, got {}",
                self.fuzzifier
            )));
        }
        if !(self.tolerance > 0.0) {
            return Err(FcmError::InvalidConfig("tolerance must be positive".into()));
        }
        if self.max_iterations == 0 {
            return Err(FcmError::InvalidConfig(
                "max_iterations must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyPartition {
    /// `k × d` cluster centers.
    pub centers: Matrix,
    /// `n × k` memberships; rows sum to one.
    pub memberships: Matrix,
    /// Objective `J_m` after every center update.
    pub objective_trace: Vec<f64>,
    pub fuzzifier: f64,
    pub iterations: usize,
}

fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum()
}

fn update_centers(features: &Matrix, memberships: &Matrix, m: f64) -> Matrix {
    let (n, d, k) = (features.rows(), features.cols(), memberships.cols());
    let mut centers = Matrix::zeros(k, d);
    for c in 0..k {
        let mut total = 0.0;
        let row = centers.row_mut(c);
        for i in 0..n {
            let w = memberships.get(i, c).powf(m);
            total += w;
            for (acc, x) in row.iter_mut().zip(features.row(i)) {
                *acc += w * x;
            }
        }
        if total > 0.0 {
            row.iter_mut().for_each(|v| *v /= total);
        }
    }
    centers
}

/// Bezdek membership update for one point given its squared distances to
/// every center. A point sitting on a center belongs to it alone.
fn memberships_for(dist2: &[f64], m: f64, out: &mut [f64]) {
    if let Some(hit) = dist2.iter().position(|&d| d == 0.0) {
        out.iter_mut().for_each(|u| *u = 0.0);
        out[hit] = 1.0;
        return;
    }
    // (d_c / d_q)^(2/(m-1)) written on squared distances.
    let exponent = 1.0 / (m - 1.0);
    for c in 0..dist2.len() {
        let denom: f64 = dist2.iter().map(|dq| (dist2[c] / dq).powf(exponent)).sum();
        out[c] = 1.0 / denom;
    }
}

fn objective(features: &Matrix, centers: &Matrix, memberships: &Matrix, m: f64) -> f64 {
    let mut total = 0.0;
    for i in 0..features.rows() {
        for c in 0..centers.rows() {
            total +=
                memberships.get(i, c).powf(m) * squared_distance(features.row(i), centers.row(c));
        }
    }
    total
}

/// Runs Fuzzy C-Means on the rows of `features`.
pub fn fcm_cluster(features: &Matrix, config: &FcmConfig) -> Result<FuzzyPartition, FcmError> {
    config.validate()?;
    let (n, k) = (features.rows(), config.clusters);
    if n < k {
        return Err(FcmError::TooFewRows { n, k });
    }
    if !features.is_finite() {
        return Err(FcmError::NonFinite);
    }
    let m = config.fuzzifier;

    if k == 1 {
        let memberships = Matrix::from_fn(n, 1, |_, _| 1.0);
        let centers = update_centers(features, &memberships, m);
        let j = objective(features, &centers, &memberships, m);
        return Ok(FuzzyPartition {
            centers,
            memberships,
            objective_trace: vec![j],
            fuzzifier: m,
            iterations: 1,
        });
    }
    if (1..n).all(|i| features.row(i) == features.row(0)) {
        return Err(FcmError::DegenerateGeometry(k));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut memberships = Matrix::zeros(n, k);
    for i in 0..n {
        let row = memberships.row_mut(i);
        row.iter_mut().for_each(|u| *u = rng.random::<f64>() + 1e-3);
        let total: f64 = row.iter().sum();
        row.iter_mut().for_each(|u| *u /= total);
    }

    let mut trace = Vec::new();
    let mut centers;
    let mut dist2 = vec![0.0; k];
    let mut next = vec![0.0; k];
    let mut iterations = 0;
    loop {
        iterations += 1;
        centers = update_centers(features, &memberships, m);
        trace.push(objective(features, &centers, &memberships, m));

        let mut max_change: f64 = 0.0;
        for i in 0..n {
            for (c, d) in dist2.iter_mut().enumerate() {
                *d = squared_distance(features.row(i), centers.row(c));
            }
            memberships_for(&dist2, m, &mut next);
            let row = memberships.row_mut(i);
            for (u, v) in row.iter_mut().zip(&next) {
                max_change = max_change.max((*u - v).abs());
                *u = *v;
            }
        }
        if max_change < config.tolerance || iterations >= config.max_iterations {
            break;
        }
    }
    // Final centers consistent with the returned memberships.
    centers = update_centers(features, &memberships, m);
    trace.push(objective(features, &centers, &memberships, m));

    Ok(FuzzyPartition {
        centers,
        memberships,
        objective_trace: trace,
        fuzzifier: m,
        iterations,
    })
}

/// Per-column z-score transform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    pub means: Vec<f64>,
    pub scales: Vec<f64>,
}

impl Standardizer {
    pub fn identity(d: usize) -> Self {
        Standardizer {
            means: vec![0.0; d],
            scales: vec![1.0; d],
        }
    }

    /// Learns column means and population standard deviations. Constant
    /// columns keep unit scale.
    pub fn fit(features: &Matrix) -> Self {
        let d = features.cols();
        let mut means = Vec::with_capacity(d);
        let mut scales = Vec::with_capacity(d);
        for j in 0..d {
            let col = features.column(j);
            let sd = crate::stats::population_sd(&col);
            means.push(crate::stats::mean(&col));
            scales.push(if sd > 0.0 { sd } else { 1.0 });
        }
        Standardizer { means, scales }
    }

    pub fn transform_row(&self, row: &[f64]) -> Vec<f64> {
        row.iter()
            .zip(self.means.iter().zip(&self.scales))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }

    pub fn transform(&self, features: &Matrix) -> Matrix {
        Matrix::from_fn(features.rows(), features.cols(), |i, j| {
            (features.get(i, j) - self.means[j]) / self.scales[j]
        })
    }
}

/// Gaussian membership function `exp(−(x − center)² / (2 width²))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub center: f64,
    pub width: f64,
}

impl Gaussian {
    pub fn eval(&self, x: f64) -> f64 {
        (-(x - self.center).powi(2) / (2.0 * self.width * self.width)).exp()
    }
}

/// One Gaussian per (feature, cluster), evaluated after an optional
/// standardization of the raw feature values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzyInferenceModel {
    pub feature_count: usize,
    pub cluster_count: usize,
    /// `functions[j][c]` is the set of cluster `c` on feature `j`.
    pub functions: Vec<Vec<Gaussian>>,
    pub standardizer: Standardizer,
}

/// Relative floor on Gaussian widths, as a fraction of the feature range.
pub const WIDTH_FLOOR_FRACTION: f64 = 1e-6;
const WIDTH_FLOOR_ABSOLUTE: f64 = 1e-12;

/// Projects every cluster of `partition` onto each feature axis of
/// `features` (the matrix the partition was computed on).
pub fn build_fuzzy_model(
    partition: &FuzzyPartition,
    features: &Matrix,
) -> Result<FuzzyInferenceModel, FcmError> {
    let (n, d) = (features.rows(), features.cols());
    let k = partition.centers.rows();
    if partition.centers.cols() != d {
        return Err(FcmError::DimensionMismatch {
            expected: partition.centers.cols(),
            got: d,
        });
    }
    if partition.memberships.rows() != n {
        return Err(FcmError::DimensionMismatch {
            expected: partition.memberships.rows(),
            got: n,
        });
    }
    let m = partition.fuzzifier;
    let mut functions = Vec::with_capacity(d);
    for j in 0..d {
        let col = features.column(j);
        let (lo, hi) = col
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        let floor = (WIDTH_FLOOR_FRACTION * (hi - lo)).max(WIDTH_FLOOR_ABSOLUTE);
        let sets = (0..k)
            .map(|c| {
                let center = partition.centers.get(c, j);
                let (mut num, mut den) = (0.0, 0.0);
                for (i, x) in col.iter().enumerate() {
                    let w = partition.memberships.get(i, c).powf(m);
                    num += w * (x - center).powi(2);
                    den += w;
                }
                let width = if den > 0.0 { (num / den).sqrt() } else { 0.0 };
                Gaussian {
                    center,
                    width: width.max(floor),
                }
            })
            .collect();
        functions.push(sets);
    }
    Ok(FuzzyInferenceModel {
        feature_count: d,
        cluster_count: k,
        functions,
        standardizer: Standardizer::identity(d),
    })
}

impl FuzzyInferenceModel {
    /// Standardizes `raw`, clusters it and builds the model; the learned
    /// standardization is stored and reused for every later evaluation.
    pub fn fit(raw: &Matrix, config: &FcmConfig) -> Result<(Self, FuzzyPartition), FcmError> {
        let standardizer = Standardizer::fit(raw);
        let z = standardizer.transform(raw);
        let partition = fcm_cluster(&z, config)?;
        let mut model = build_fuzzy_model(&partition, &z)?;
        model.standardizer = standardizer;
        Ok((model, partition))
    }

    /// Column index of (feature, cluster) in the membership matrix.
    pub fn column(&self, feature: usize, cluster: usize) -> usize {
        feature * self.cluster_count + cluster
    }

    /// Memberships of one raw feature row, feature-major.
    pub fn memberships(&self, raw_row: &[f64]) -> Result<Vec<f64>, FcmError> {
        if raw_row.len() != self.feature_count {
            return Err(FcmError::DimensionMismatch {
                expected: self.feature_count,
                got: raw_row.len(),
            });
        }
        if raw_row.iter().any(|v| !v.is_finite()) {
            return Err(FcmError::NonFinite);
        }
        let z = self.standardizer.transform_row(raw_row);
        Ok(z.iter()
            .zip(&self.functions)
            .flat_map(|(x, sets)| sets.iter().map(move |g| g.eval(*x)))
            .collect())
    }

    /// Relabels clusters: new cluster `c` is old cluster `permutation[c]`.
    pub fn permute_clusters(&self, permutation: &[usize]) -> Self {
        let functions = self
            .functions
            .iter()
            .map(|sets| permutation.iter().map(|&c| sets[c]).collect())
            .collect();
        FuzzyInferenceModel {
            functions,
            ..self.clone()
        }
    }
}

/// Feature-major membership matrix: columns are
/// (feature 1 × C1..Ck, feature 2 × C1..Ck, ...).
pub fn membership_matrix(
    model: &FuzzyInferenceModel,
    features: &Matrix,
) -> Result<Matrix, FcmError> {
    if features.cols() != model.feature_count {
        return Err(FcmError::DimensionMismatch {
            expected: model.feature_count,
            got: features.cols(),
        });
    }
    let width = model.feature_count * model.cluster_count;
    let mut out = Matrix::zeros(features.rows(), width);
    for i in 0..features.rows() {
        let row = model.memberships(features.row(i))?;
        out.row_mut(i).copy_from_slice(&row);
    }
    Ok(out)
}

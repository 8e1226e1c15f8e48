//! Project records, CSV/JSON ingestion, hold-out splitting and synthetic
//! dataset generation.

use std::collections::HashSet;
use std::fmt;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::Matrix;

#[derive(Debug, Error, PartialEq)]
pub enum DataError {
    #[error("missing column `{0}` in header")]
    MissingColumn(&'static str),
    #[error("malformed CSV at row {row}: {message}")]
    Malformed { row: usize, message: String },
    #[error("non-numeric value `{value}` in column `{column}` at row {row}")]
    NonNumeric {
        row: usize,
        column: &'static str,
        value: String,
    },
    #[error("non-finite value in column `{column}` at row {row}")]
    NonFinite { row: usize, column: &'static str },
    #[error("non-positive effort at row {0}")]
    NonPositiveEffort(usize),
    #[error("non-positive size at row {0}")]
    NonPositiveSize(usize),
    #[error("duplicate id `{id}` at row {row}")]
    DuplicateId { row: usize, id: String },
    #[error("dataset is empty")]
    Empty,
    #[error("train count {train_count} must lie strictly between 0 and {size}")]
    TrainCountOutOfRange { train_count: usize, size: usize },
    #[error("invalid profile: {0}")]
    InvalidProfile(String),
    #[error("need at least {min} projects, got {got}")]
    TooFew { min: usize, got: usize },
    #[error("JSON: {0}")]
    Json(String),
}

/// One observed software project.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub id: String,
    /// Size in Use Case Points.
    pub size_ucp: f64,
    pub productivity: f64,
    pub complexity: f64,
    /// Actual effort in person-hours.
    pub effort_ph: f64,
}

impl Project {
    /// The three predictive features, in model order.
    pub fn features(&self) -> [f64; 3] {
        [self.size_ucp, self.productivity, self.complexity]
    }
}

/// Names of the predictive features in the order returned by [`Project::features`].
pub const FEATURE_NAMES: [&str; 3] = ["size_ucp", "productivity", "complexity"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceLabel {
    Ind1,
    Ind2,
    Edu,
    Mixed,
    Synthetic,
}

/// Non-empty, id-unique, ordered collection of projects.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    projects: Vec<Project>,
    source: SourceLabel,
}

impl Dataset {
    /// Validates the project invariants. Row numbers in errors are 1-based
    /// positions in `projects`.
    pub fn new(projects: Vec<Project>, source: SourceLabel) -> Result<Self, DataError> {
        if projects.is_empty() {
            return Err(DataError::Empty);
        }
        let mut seen = HashSet::new();
        for (i, p) in projects.iter().enumerate() {
            let row = i + 1;
            for (column, v) in [
                ("size_ucp", p.size_ucp),
                ("productivity", p.productivity),
                ("complexity", p.complexity),
                ("effort_ph", p.effort_ph),
            ] {
                if !v.is_finite() {
                    return Err(DataError::NonFinite { row, column });
                }
            }
            if p.effort_ph <= 0.0 {
                return Err(DataError::NonPositiveEffort(row));
            }
            if p.size_ucp <= 0.0 {
                return Err(DataError::NonPositiveSize(row));
            }
            if !seen.insert(p.id.as_str()) {
                return Err(DataError::DuplicateId {
                    row,
                    id: p.id.clone(),
                });
            }
        }
        Ok(Dataset { projects, source })
    }

    pub fn projects(&self) -> &[Project] {
        &self.projects
    }

    pub fn source(&self) -> SourceLabel {
        self.source
    }

    pub fn len(&self) -> usize {
        self.projects.len()
    }

    pub fn is_empty(&self) -> bool {
        self.projects.is_empty()
    }

    pub fn with_source(mut self, source: SourceLabel) -> Self {
        self.source = source;
        self
    }

    pub fn efforts(&self) -> Vec<f64> {
        self.projects.iter().map(|p| p.effort_ph).collect()
    }

    /// `n × 3` matrix of (size_ucp, productivity, complexity).
    pub fn feature_matrix(&self) -> Matrix {
        Matrix::from_fn(self.len(), 3, |i, j| self.projects[i].features()[j])
    }

    pub fn to_csv(&self) -> String {
        render_csv(self)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.projects).expect("projects serialize")
    }

    pub fn from_json(text: &str) -> Result<Self, DataError> {
        let projects: Vec<Project> =
            serde_json::from_str(text).map_err(|e| DataError::Json(e.to_string()))?;
        Dataset::new(projects, SourceLabel::Mixed)
    }
}

const COLUMNS: [&str; 5] = ["id", "size_ucp", "productivity", "complexity", "effort_ph"];

/// Parses a dataset from CSV text. The header must name the five columns in
/// any order and case; rows are numbered from 1 (first data row).
pub fn parse_dataset(csv_text: &str) -> Result<Dataset, DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(csv_text.as_bytes());
    let headers = reader
        .headers()
        .map_err(|e| DataError::Malformed {
            row: 0,
            message: e.to_string(),
        })?
        .clone();
    let mut positions = [0usize; 5];
    for (slot, name) in positions.iter_mut().zip(COLUMNS) {
        *slot = headers
            .iter()
            .position(|h| h.eq_ignore_ascii_case(name))
            .ok_or(DataError::MissingColumn(name))?;
    }

    let mut projects = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record.map_err(|e| DataError::Malformed {
            row,
            message: e.to_string(),
        })?;
        let field = |k: usize| record.get(positions[k]).unwrap_or("");
        let number = |k: usize| -> Result<f64, DataError> {
            let raw = field(k);
            let v: f64 = raw.parse().map_err(|_| DataError::NonNumeric {
                row,
                column: COLUMNS[k],
                value: raw.to_string(),
            })?;
            if !v.is_finite() {
                return Err(DataError::NonFinite {
                    row,
                    column: COLUMNS[k],
                });
            }
            Ok(v)
        };
        projects.push(Project {
            id: field(0).to_string(),
            size_ucp: number(1)?,
            productivity: number(2)?,
            complexity: number(3)?,
            effort_ph: number(4)?,
        });
    }
    Dataset::new(projects, SourceLabel::Mixed)
}

/// Renders the canonical CSV form. Floats use the shortest representation
/// that parses back to the same value.
pub fn render_csv(dataset: &Dataset) -> String {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(COLUMNS).expect("in-memory write");
    for p in dataset.projects() {
        writer
            .write_record([
                p.id.clone(),
                p.size_ucp.to_string(),
                p.productivity.to_string(),
                p.complexity.to_string(),
                p.effort_ph.to_string(),
            ])
            .expect("in-memory write");
    }
    String::from_utf8(writer.into_inner().expect("flush")).expect("utf8")
}

/// Seeded partition into `train_count` training projects and the rest.
/// Both sides keep the original row order.
pub fn split_holdout(
    dataset: &Dataset,
    train_count: usize,
    seed: u64,
) -> Result<(Dataset, Dataset), DataError> {
    let n = dataset.len();
    if train_count == 0 || train_count >= n {
        return Err(DataError::TrainCountOutOfRange {
            train_count,
            size: n,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut in_train = vec![false; n];
    for &i in &order[..train_count] {
        in_train[i] = true;
    }
    let (train, test): (Vec<_>, Vec<_>) = dataset
        .projects()
        .iter()
        .cloned()
        .zip(in_train)
        .partition(|(_, t)| *t);
    let unzip = |v: Vec<(Project, bool)>| v.into_iter().map(|(p, _)| p).collect::<Vec<_>>();
    Ok((
        Dataset::new(unzip(train), dataset.source())?,
        Dataset::new(unzip(test), dataset.source())?,
    ))
}

/// Summary moments of an effort distribution (person-hours).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SourceProfile {
    pub min_effort: f64,
    pub max_effort: f64,
    pub mean_effort: f64,
    pub sd_effort: f64,
    pub skewness: f64,
}

impl SourceProfile {
    /// Industrial source 1. The published maximum "129,35" is read as 129,350.
    pub const IND1: SourceProfile = SourceProfile {
        min_effort: 4_648.0,
        max_effort: 129_350.0,
        mean_effort: 36_849.0,
        sd_effort: 39_350.0,
        skewness: 1.37,
    };
    pub const IND2: SourceProfile = SourceProfile {
        min_effort: 570.0,
        max_effort: 224_890.0,
        mean_effort: 20_573.0,
        sd_effort: 47_327.0,
        skewness: 3.26,
    };
    pub const EDU: SourceProfile = SourceProfile {
        min_effort: 850.0,
        max_effort: 2_380.0,
        mean_effort: 1_689.0,
        sd_effort: 496.0,
        skewness: -0.24,
    };

    pub fn by_name(name: &str) -> Option<(SourceProfile, SourceLabel)> {
        match name.to_ascii_lowercase().as_str() {
            "ind1" => Some((Self::IND1, SourceLabel::Ind1)),
            "ind2" => Some((Self::IND2, SourceLabel::Ind2)),
            "edu" => Some((Self::EDU, SourceLabel::Edu)),
            _ => None,
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        let finite = [
            self.min_effort,
            self.max_effort,
            self.mean_effort,
            self.sd_effort,
            self.skewness,
        ]
        .iter()
        .all(|v| v.is_finite());
        if !finite {
            return Err(DataError::InvalidProfile("non-finite field".into()));
        }
        if !(self.sd_effort > 0.0) {
            return Err(DataError::InvalidProfile(format!(
                "sd_effort must be positive, got {}",
                self.sd_effort
            )));
        }
        if !(self.min_effort > 0.0
            && self.min_effort <= self.mean_effort
            && self.mean_effort <= self.max_effort)
        {
            return Err(DataError::InvalidProfile(
                "need 0 < min_effort <= mean_effort <= max_effort".into(),
            ));
        }
        Ok(())
    }
}

/// Standard-normal quadrature grid used to compute moments of clamped
/// transforms of a normal variable.
struct NormalGrid {
    z: Vec<f64>,
    w: Vec<f64>,
}

impl NormalGrid {
    fn new() -> Self {
        const POINTS: usize = 8001;
        const HALF_WIDTH: f64 = 9.0;
        let step = 2.0 * HALF_WIDTH / (POINTS - 1) as f64;
        let z: Vec<f64> = (0..POINTS).map(|i| -HALF_WIDTH + i as f64 * step).collect();
        let mut w: Vec<f64> = z.iter().map(|v| (-0.5 * v * v).exp()).collect();
        let total: f64 = w.iter().sum();
        w.iter_mut().for_each(|v| *v /= total);
        NormalGrid { z, w }
    }

    fn mean_sd(&self, f: impl Fn(f64) -> f64) -> (f64, f64) {
        let xs: Vec<f64> = self.z.iter().map(|&z| f(z)).collect();
        let m: f64 = xs.iter().zip(&self.w).map(|(x, w)| x * w).sum();
        let v: f64 = xs
            .iter()
            .zip(&self.w)
            .map(|(x, w)| w * (x - m).powi(2))
            .sum();
        (m, v.sqrt())
    }
}

/// Zero-mean, unit-variance transform of a standard normal with the requested
/// skewness: a shifted log-normal for positive skew, a Cornish-Fisher
/// adjusted normal otherwise.
#[derive(Debug, Clone, Copy)]
enum SkewShape {
    LogNormal { sigma: f64, mean: f64, sd: f64 },
    CornishFisher { skew: f64, sd: f64 },
}

impl SkewShape {
    fn new(skew: f64) -> Self {
        if skew > 0.0 {
            // Log-normal skewness is (w + 2) sqrt(w - 1) with w = exp(sigma^2).
            let target = |w: f64| (w + 2.0) * (w - 1.0).sqrt() - skew;
            let (mut lo, mut hi) = (1.0, 2.0);
            while target(hi) < 0.0 {
                hi *= 2.0;
            }
            for _ in 0..200 {
                let mid = 0.5 * (lo + hi);
                if target(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let w = 0.5 * (lo + hi);
            let sigma = w.ln().sqrt();
            SkewShape::LogNormal {
                sigma,
                mean: w.sqrt(),
                sd: (w * (w - 1.0)).sqrt(),
            }
        } else {
            SkewShape::CornishFisher {
                skew,
                sd: (1.0 + skew * skew / 18.0).sqrt(),
            }
        }
    }

    fn apply(&self, z: f64) -> f64 {
        match *self {
            SkewShape::LogNormal { sigma, mean, sd } => ((sigma * z).exp() - mean) / sd,
            SkewShape::CornishFisher { skew, sd } => (z + skew / 6.0 * (z * z - 1.0)) / sd,
        }
    }
}

/// Effort sampler whose values, after clamping to the profile's range, have
/// the profile's mean and standard deviation.
#[derive(Debug, Clone, Copy)]
pub struct EffortSampler {
    shape: SkewShape,
    location: f64,
    scale: f64,
    min: f64,
    max: f64,
}

impl EffortSampler {
    /// Calibrates the pre-clamp location and scale by fixed-point iteration
    /// on the clamped moments.
    pub fn calibrate(profile: &SourceProfile) -> Result<Self, DataError> {
        profile.validate()?;
        let shape = SkewShape::new(profile.skewness);
        let grid = NormalGrid::new();
        let (min, max) = (profile.min_effort, profile.max_effort);
        let (mut location, mut scale) = (profile.mean_effort, profile.sd_effort);
        for _ in 0..5000 {
            let (m, s) = grid.mean_sd(|z| (location + scale * shape.apply(z)).clamp(min, max));
            let mean_err = (m - profile.mean_effort).abs() / profile.mean_effort;
            let sd_err = (s - profile.sd_effort).abs() / profile.sd_effort;
            if mean_err < 1e-10 && sd_err < 1e-10 {
                return Ok(EffortSampler {
                    shape,
                    location,
                    scale,
                    min,
                    max,
                });
            }
            if !(s > 0.0) || !scale.is_finite() {
                break;
            }
            location += profile.mean_effort - m;
            scale *= profile.sd_effort / s;
        }
        Err(DataError::InvalidProfile(
            "moments cannot be matched within [min_effort, max_effort]".into(),
        ))
    }

    pub fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        let z: f64 = rng.sample(StandardNormal);
        (self.location + self.scale * self.shape.apply(z)).clamp(self.min, self.max)
    }
}

const PRODUCTIVITY_RANGE: (f64, f64) = (10.0, 35.0);

/// Draws `n` synthetic projects whose efforts follow `profile`.
///
/// Productivity is uniform on [10, 35] PH/UCP and complexity an integer on
/// [1, 5]. Size is effort divided by a noisy copy of productivity, kept in
/// the same band, so effort per UCP always lies in [10, 35].
pub fn generate_synthetic(
    profile: &SourceProfile,
    n: usize,
    seed: u64,
) -> Result<Dataset, DataError> {
    if n < 2 {
        return Err(DataError::TooFew { min: 2, got: n });
    }
    let sampler = EffortSampler::calibrate(profile)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projects = (0..n)
        .map(|i| {
            let effort = sampler.sample(&mut rng);
            let productivity = rng.random_range(PRODUCTIVITY_RANGE.0..=PRODUCTIVITY_RANGE.1);
            let complexity = rng.random_range(1..=5) as f64;
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 0.15;
            let ratio =
                (productivity * noise.exp()).clamp(PRODUCTIVITY_RANGE.0, PRODUCTIVITY_RANGE.1);
            Project {
                id: format!("s{:04}", i + 1),
                size_ucp: effort / ratio,
                productivity,
                complexity,
                effort_ph: effort,
            }
        })
        .collect();
    Dataset::new(projects, SourceLabel::Synthetic)
}

/// Size threshold (UCP) between the two regimes of [`generate_piecewise_benchmark`].
pub const PIECEWISE_BREAK_UCP: f64 = 300.0;

/// Benchmark dataset whose effort is piecewise linear in size: 12 PH per
/// UCP up to [`PIECEWISE_BREAK_UCP`] and 32 PH per UCP beyond it, plus
/// 60 PH per productivity unit, 150 PH per complexity level and 5%
/// multiplicative noise.
pub fn generate_piecewise_benchmark(n: usize, seed: u64) -> Result<Dataset, DataError> {
    if n < 2 {
        return Err(DataError::TooFew { min: 2, got: n });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let projects = (0..n)
        .map(|i| {
            let size: f64 = rng.random_range(50.0..=600.0);
            let productivity = rng.random_range(PRODUCTIVITY_RANGE.0..=PRODUCTIVITY_RANGE.1);
            let complexity = rng.random_range(1..=5) as f64;
            let base = if size <= PIECEWISE_BREAK_UCP {
                400.0 + 12.0 * size
            } else {
                -4000.0 + 32.0 * size
            } + 60.0 * productivity
                + 150.0 * complexity;
            let noise: f64 = rng.sample::<f64, _>(StandardNormal) * 0.05;
            Project {
                id: format!("b{:03}", i + 1),
                size_ucp: size,
                productivity,
                complexity,
                effort_ph: base * (1.0 + noise).max(0.5),
            }
        })
        .collect();
    Dataset::new(projects, SourceLabel::Synthetic)
}

impl fmt::Display for SourceLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SourceLabel::Ind1 => "Ind1",
            SourceLabel::Ind2 => "Ind2",
            SourceLabel::Edu => "Edu",
            SourceLabel::Mixed => "mixed",
            SourceLabel::Synthetic => "synthetic",
        };
        f.write_str(name)
    }
}

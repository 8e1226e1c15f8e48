//! Log-linear multiple regression `ln(effort) ~ 1 + ln(size) + productivity + complexity`
//! with fit diagnostics.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::BaselineError;
use crate::data::{Dataset, Project};
use crate::linalg::{ols, r_squared};

/// Two-sided significance level for coefficient t-tests.
pub const SIGNIFICANCE_ALPHA: f64 = 0.05;
/// VIF at or above this value raises the multicollinearity alarm.
pub const VIF_ALARM: f64 = 4.0;

pub const TERM_NAMES: [&str; 4] = ["intercept", "ln_size", "productivity", "complexity"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoefficientTest {
    pub estimate: f64,
    pub std_error: f64,
    /// `None` when the residual variance is zero.
    pub t_stat: Option<f64>,
    pub p_value: Option<f64>,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlrDiagnostics {
    pub n: usize,
    pub residual_df: usize,
    pub r2: f64,
    pub adjusted_r2: f64,
    pub residual_sd: f64,
    /// One entry per predictor (intercept excluded).
    pub vif: BTreeMap<String, f64>,
    pub multicollinearity_alarm: bool,
    pub coefficients: BTreeMap<String, CoefficientTest>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MlrModel {
    pub intercept: f64,
    pub coef_ln_size: f64,
    pub coef_productivity: f64,
    pub coef_complexity: f64,
    pub diagnostics: MlrDiagnostics,
}

fn design_row(p: &Project) -> [f64; 4] {
    [1.0, p.size_ucp.ln(), p.productivity, p.complexity]
}

fn design_matrix(train: &Dataset) -> Result<(DMatrix<f64>, DVector<f64>), BaselineError> {
    let n = train.len();
    let mut x = DMatrix::zeros(n, 4);
    let mut y = DVector::zeros(n);
    for (i, p) in train.projects().iter().enumerate() {
        if !(p.size_ucp > 0.0) {
            return Err(BaselineError::LogUndefined {
                id: p.id.clone(),
                field: "size_ucp",
            });
        }
        if !(p.effort_ph > 0.0) {
            return Err(BaselineError::LogUndefined {
                id: p.id.clone(),
                field: "effort_ph",
            });
        }
        for (j, v) in design_row(p).into_iter().enumerate() {
            x[(i, j)] = v;
        }
        y[i] = p.effort_ph.ln();
    }
    Ok((x, y))
}

/// Variance inflation factor of each non-intercept column of `x`, from the
/// R² of regressing it on the remaining columns.
pub fn variance_inflation_factors(x: &DMatrix<f64>) -> Result<Vec<f64>, BaselineError> {
    let p = x.ncols();
    (1..p)
        .map(|j| {
            let others: Vec<usize> = (0..p).filter(|&c| c != j).collect();
            let aux = x.select_columns(&others);
            let target = x.column(j).into_owned();
            let beta = ols(&aux, &target).ok_or(BaselineError::Collinear)?;
            let r2 = r_squared(&aux, &target, &beta);
            Ok(if r2 < 1.0 {
                1.0 / (1.0 - r2)
            } else {
                f64::INFINITY
            })
        })
        .collect()
}

pub fn fit_mlr(train: &Dataset) -> Result<MlrModel, BaselineError> {
    let n = train.len();
    if n < 5 {
        return Err(BaselineError::TooFewProjects { min: 5, got: n });
    }
    let (x, y) = design_matrix(train)?;
    let beta = ols(&x, &y).ok_or(BaselineError::Collinear)?;

    let fitted = &x * &beta;
    let residuals = &y - fitted;
    let rss = residuals.norm_squared();
    let df = n - 4;
    let sigma2 = rss / df as f64;
    let r2 = r_squared(&x, &y, &beta);
    let adjusted_r2 = 1.0 - (1.0 - r2) * (n as f64 - 1.0) / df as f64;

    let xtx_inv = (x.transpose() * &x)
        .try_inverse()
        .ok_or(BaselineError::Collinear)?;
    let t_dist = StudentsT::new(0.0, 1.0, df as f64).expect("positive degrees of freedom");
    let coefficients = TERM_NAMES
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let std_error = (sigma2 * xtx_inv[(j, j)]).sqrt();
            let (t_stat, p_value) = if std_error > 0.0 {
                let t = beta[j] / std_error;
                (Some(t), Some(2.0 * (1.0 - t_dist.cdf(t.abs()))))
            } else {
                (None, None)
            };
            let test = CoefficientTest {
                estimate: beta[j],
                std_error,
                t_stat,
                p_value,
                significant: p_value.is_some_and(|p| p < SIGNIFICANCE_ALPHA),
            };
            (name.to_string(), test)
        })
        .collect();

    let vif_values = variance_inflation_factors(&x)?;
    let vif: BTreeMap<String, f64> = TERM_NAMES[1..]
        .iter()
        .map(|s| s.to_string())
        .zip(vif_values.iter().copied())
        .collect();
    let multicollinearity_alarm = vif_values.iter().any(|v| *v >= VIF_ALARM);

    Ok(MlrModel {
        intercept: beta[0],
        coef_ln_size: beta[1],
        coef_productivity: beta[2],
        coef_complexity: beta[3],
        diagnostics: MlrDiagnostics {
            n,
            residual_df: df,
            r2,
            adjusted_r2,
            residual_sd: sigma2.sqrt(),
            vif,
            multicollinearity_alarm,
            coefficients,
        },
    })
}

impl MlrModel {
    /// Model with the given coefficients and empty diagnostics.
    pub fn from_coefficients(
        intercept: f64,
        ln_size: f64,
        productivity: f64,
        complexity: f64,
    ) -> Self {
        MlrModel {
            intercept,
            coef_ln_size: ln_size,
            coef_productivity: productivity,
            coef_complexity: complexity,
            diagnostics: MlrDiagnostics {
                n: 0,
                residual_df: 0,
                r2: 0.0,
                adjusted_r2: 0.0,
                residual_sd: 0.0,
                vif: BTreeMap::new(),
                multicollinearity_alarm: false,
                coefficients: BTreeMap::new(),
            },
        }
    }

    /// Linear score on the log-effort scale.
    pub fn log_score(&self, project: &Project) -> f64 {
        self.intercept
            + self.coef_ln_size * project.size_ucp.ln()
            + self.coef_productivity * project.productivity
            + self.coef_complexity * project.complexity
    }

    pub fn coefficients(&self) -> [f64; 4] {
        [
            self.intercept,
            self.coef_ln_size,
            self.coef_productivity,
            self.coef_complexity,
        ]
    }
}

pub fn predict_mlr(model: &MlrModel, project: &Project) -> Result<f64, BaselineError> {
    if !(project.size_ucp > 0.0) {
        return Err(BaselineError::LogUndefined {
            id: project.id.clone(),
            field: "size_ucp",
        });
    }
    if !project.productivity.is_finite()
        || !project.complexity.is_finite()
        || !project.size_ucp.is_finite()
    {
        return Err(BaselineError::NonFinite(project.id.clone()));
    }
    Ok(model.log_score(project).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::SourceLabel;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    const PUBLISHED: [f64; 4] = [1.8, 1.24, 0.007, 0.12];

    fn project(id: String, size: f64, productivity: f64, complexity: f64, effort: f64) -> Project {
        Project {
            id,
            size_ucp: size,
            productivity,
            complexity,
            effort_ph: effort,
        }
    }

    fn log_linear_dataset(n: usize, noise_sd: f64, seed: u64) -> Dataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let projects = (0..n)
            .map(|i| {
                let size: f64 = rng.random_range(20.0..2000.0);
                let productivity: f64 = rng.random_range(10.0..35.0);
                let complexity: f64 = rng.random_range(1.0..5.0);
                let noise: f64 = rng.sample::<f64, _>(StandardNormal) * noise_sd;
                let ln_effort = PUBLISHED[0]
                    + PUBLISHED[1] * size.ln()
                    + PUBLISHED[2] * productivity
                    + PUBLISHED[3] * complexity
                    + noise;
                project(
                    format!("p{i}"),
                    size,
                    productivity,
                    complexity,
                    ln_effort.exp(),
                )
            })
            .collect();
        Dataset::new(projects, SourceLabel::Synthetic).unwrap()
    }

    #[test]
    fn exact_recovery() {
        let model = fit_mlr(&log_linear_dataset(59, 0.0, 1)).unwrap();
        for (got, want) in model.coefficients().iter().zip(PUBLISHED) {
            assert!((got - want).abs() < 1e-6, "{got} vs {want}");
        }
        assert!((model.diagnostics.r2 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn independent_features_have_low_vif() {
        let model = fit_mlr(&log_linear_dataset(5000, 0.3, 2)).unwrap();
        for (name, v) in &model.diagnostics.vif {
            assert!(*v < 1.1, "{name}: {v}");
        }
        assert!(!model.diagnostics.multicollinearity_alarm);
        let ln_size = &model.diagnostics.coefficients["ln_size"];
        assert!(ln_size.significant);
        assert!(ln_size.p_value.unwrap() < 1e-10);
    }

    #[test]
    fn residuals_orthogonal_to_design() {
        let ds = log_linear_dataset(59, 0.4, 3);
        let model = fit_mlr(&ds).unwrap();
        let mut dots = [0.0; 4];
        for p in ds.projects() {
            let r = p.effort_ph.ln() - model.log_score(p);
            for (d, x) in dots.iter_mut().zip(design_row(p)) {
                *d += r * x;
            }
        }
        for d in dots {
            assert!(d.abs() < 1e-8, "dot {d}");
        }
        let adj = model.diagnostics.adjusted_r2;
        assert!(adj < model.diagnostics.r2 && adj > 0.5);
    }

    #[test]
    fn published_equation_evaluations() {
        let m = MlrModel::from_coefficients(1.8, 1.24, 0.007, 0.12);
        let p = project("a".into(), 1.0, 0.0, 0.0, 1.0);
        assert!((predict_mlr(&m, &p).unwrap() - 1.8f64.exp()).abs() < 1e-12);
        assert!((predict_mlr(&m, &p).unwrap() - 6.0496).abs() < 1e-4);
        let p = project("b".into(), 100.0, 10.0, 2.0, 1.0);
        let expected = (1.8 + 1.24 * 100f64.ln() + 0.07 + 0.24).exp();
        assert!((predict_mlr(&m, &p).unwrap() - expected).abs() < 1e-9);
        assert!((expected.ln() - 7.8204).abs() < 1e-4);
        let p = project("c".into(), 0.0, 10.0, 2.0, 1.0);
        assert!(matches!(
            predict_mlr(&m, &p),
            Err(BaselineError::LogUndefined { .. })
        ));
    }

    #[test]
    fn collinear_design_reported() {
        let projects = (0..10)
            .map(|i| {
                project(
                    format!("p{i}"),
                    10.0 + i as f64,
                    20.0,
                    3.0,
                    100.0 + i as f64,
                )
            })
            .collect();
        let ds = Dataset::new(projects, SourceLabel::Synthetic).unwrap();
        assert_eq!(fit_mlr(&ds).unwrap_err(), BaselineError::Collinear);
    }

    #[test]
    fn too_few_rows() {
        assert!(matches!(
            fit_mlr(&log_linear_dataset(4, 0.1, 4)),
            Err(BaselineError::TooFewProjects { min: 5, got: 4 })
        ));
    }

    #[test]
    fn predictions_positive_and_json_round_trip() {
        let ds = log_linear_dataset(30, 0.5, 5);
        let model = fit_mlr(&ds).unwrap();
        let back: MlrModel = serde_json::from_str(&serde_json::to_string(&model).unwrap()).unwrap();
        assert_eq!(back, model);
        for p in ds.projects() {
            assert!(predict_mlr(&model, p).unwrap() > 0.0);
        }
    }
}

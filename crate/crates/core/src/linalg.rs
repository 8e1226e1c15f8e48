//! Dense row-major matrices and the least-squares routines shared by the
//! model tree and the regression baseline.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Row-major dense matrix of `f64`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from equally sized rows. Returns `None` when the rows
    /// are ragged.
    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Option<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            let r = r.as_ref();
            if r.len() != cols {
                return None;
            }
            data.extend_from_slice(r);
        }
        Some(Matrix {
            rows: rows.len(),
            cols,
            data,
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: f64) {
        self.data[i * self.cols + j] = value;
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, j)).collect()
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks(self.cols.max(1)).take(self.rows)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Copies the selected rows into a new matrix.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix {
            rows: indices.len(),
            cols: self.cols,
            data,
        }
    }
}

/// Affine least-squares fit `y ≈ intercept + Σ coef_j x_j`.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct AffineFit {
    pub intercept: f64,
    pub coefficients: Vec<f64>,
}

/// Ridge jitter added to the diagonal of the standardized normal equations.
pub(crate) const RIDGE_JITTER: f64 = 1e-8;

/// Cholesky factor of a Gram matrix, or `None` when the matrix is not
/// positive definite or its pivots span more than `1e12`.
fn well_conditioned_cholesky(
    gram: &DMatrix<f64>,
) -> Option<nalgebra::Cholesky<f64, nalgebra::Dyn>> {
    let ch = gram.clone().cholesky()?;
    let pivots: Vec<f64> = ch.l_dirty().diagonal().iter().map(|v| v * v).collect();
    let max = pivots.iter().cloned().fold(0.0, f64::max);
    let min = pivots.iter().cloned().fold(f64::INFINITY, f64::min);
    (min > 1e-12 * max).then_some(ch)
}

/// Least squares through the normal equations on centered and scaled
/// columns. Rank-deficient designs get [`RIDGE_JITTER`] on the diagonal and
/// resolve toward the minimum-norm solution. Columns that are constant over
/// the selected rows get a zero coefficient.
pub(crate) fn ridge_affine_fit(x: &Matrix, rows: &[usize], y: &[f64]) -> AffineFit {
    let d = x.cols();
    let n = rows.len();
    if n == 0 {
        return AffineFit {
            intercept: 0.0,
            coefficients: vec![0.0; d],
        };
    }
    let nf = n as f64;
    let y_mean = rows.iter().map(|&i| y[i]).sum::<f64>() / nf;

    let mut means = vec![0.0; d];
    for &i in rows {
        for (m, v) in means.iter_mut().zip(x.row(i)) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= nf);

    let mut scales = vec![0.0; d];
    for &i in rows {
        for (j, v) in x.row(i).iter().enumerate() {
            scales[j] += (v - means[j]).powi(2);
        }
    }
    for s in scales.iter_mut() {
        *s = (*s / nf).sqrt();
    }
    // Columns that do not vary (relative to their magnitude) carry no signal.
    let active: Vec<usize> = (0..d)
        .filter(|&j| scales[j] > 1e-12 * means[j].abs().max(1.0))
        .collect();

    let mut coefficients = vec![0.0; d];
    if !active.is_empty() {
        let p = active.len();
        let mut design = DMatrix::<f64>::zeros(n, p);
        let mut target = DVector::<f64>::zeros(n);
        for (r, &i) in rows.iter().enumerate() {
            let row = x.row(i);
            for (c, &j) in active.iter().enumerate() {
                design[(r, c)] = (row[j] - means[j]) / scales[j];
            }
            target[r] = y[i] - y_mean;
        }
        let gram = design.transpose() * &design;
        let rhs = design.transpose() * target;
        let solution = match well_conditioned_cholesky(&gram) {
            Some(ch) => ch.solve(&rhs),
            None => {
                let mut jittered = gram;
                for k in 0..p {
                    jittered[(k, k)] += RIDGE_JITTER * nf;
                }
                match jittered.clone().cholesky() {
                    Some(ch) => ch.solve(&rhs),
                    None => jittered
                        .lu()
                        .solve(&rhs)
                        .unwrap_or_else(|| DVector::zeros(p)),
                }
            }
        };
        for (c, &j) in active.iter().enumerate() {
            coefficients[j] = solution[c] / scales[j];
        }
    }
    let intercept = y_mean
        - coefficients
            .iter()
            .zip(&means)
            .map(|(b, m)| b * m)
            .sum::<f64>();
    AffineFit {
        intercept,
        coefficients,
    }
}

/// Ordinary least squares on a full design matrix (intercept column included
/// by the caller), solved by SVD. Returns `None` when the design is rank
/// deficient.
pub(crate) fn ols(design: &DMatrix<f64>, y: &DVector<f64>) -> Option<DVector<f64>> {
    let svd = design.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(max_sv > 0.0) || min_sv <= max_sv * 1e-10 {
        return None;
    }
    svd.solve(y, 0.0).ok()
}

/// Coefficient of determination of an OLS fit of `y` on `design`.
pub(crate) fn r_squared(design: &DMatrix<f64>, y: &DVector<f64>, beta: &DVector<f64>) -> f64 {
    let fitted = design * beta;
    let mean = y.mean();
    let ss_res: f64 = y
        .iter()
        .zip(fitted.iter())
        .map(|(a, b)| (a - b).powi(2))
        .sum();
    let ss_tot: f64 = y.iter().map(|a| (a - mean).powi(2)).sum();
    if ss_tot == 0.0 {
        return 1.0;
    }
    1.0 - ss_res / ss_tot
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ragged_rows_rejected() {
        assert!(Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0]]).is_none());
    }

    #[test]
    fn ridge_fit_recovers_exact_plane() {
        let rows: Vec<Vec<f64>> = (0..20)
            .map(|i| vec![i as f64, ((i * 7) % 5) as f64 * 1000.0])
            .collect();
        let x = Matrix::from_rows(&rows).unwrap();
        let y: Vec<f64> = rows
            .iter()
            .map(|r| 3.0 + 2.0 * r[0] - 0.01 * r[1])
            .collect();
        let all: Vec<usize> = (0..20).collect();
        let fit = ridge_affine_fit(&x, &all, &y);
        assert!((fit.intercept - 3.0).abs() < 1e-5);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-7);
        assert!((fit.coefficients[1] + 0.01).abs() < 1e-9);
    }

    #[test]
    fn constant_column_gets_zero_coefficient() {
        let x = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]).unwrap();
        let fit = ridge_affine_fit(&x, &[0, 1, 2], &[2.0, 4.0, 6.0]);
        assert_eq!(fit.coefficients[1], 0.0);
        assert!((fit.coefficients[0] - 2.0).abs() < 1e-6);
    }

    #[test]
    fn ols_reports_rank_deficiency() {
        let design = DMatrix::from_row_slice(3, 2, &[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let y = DVector::from_vec(vec![1.0, 2.0, 3.0]);
        assert!(ols(&design, &y).is_none());
    }
}

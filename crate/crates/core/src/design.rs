//! Predictor matrices with standardization metadata.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// An `n × d` predictor matrix.
///
/// `values` holds the raw data. Solvers work on internally standardized
/// columns `(x - mean) / scale` and map coefficients back to the raw scale.
/// Without an intercept the columns are scaled by their root mean square and
/// not centered.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    values: DMatrix<f64>,
    column_means: DVector<f64>,
    column_scales: DVector<f64>,
    intercept: bool,
    names: Vec<String>,
}

impl DesignMatrix {
    /// Builds and standardizes a design with default column names `x1..xd`.
    pub fn new(values: DMatrix<f64>, intercept: bool) -> Result<Self> {
        let names = (1..=values.ncols()).map(|j| format!("x{j}")).collect();
        Self::with_names(values, intercept, names)
    }

    pub fn with_names(values: DMatrix<f64>, intercept: bool, names: Vec<String>) -> Result<Self> {
        let (n, d) = values.shape();
        if n == 0 || d == 0 {
            return Err(Error::InvalidInput(format!("design must be non-empty, got {n}x{d}")));
        }
        if names.len() != d {
            return Err(Error::InvalidInput(format!(
                "{} column names for {d} columns",
                names.len()
            )));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("design contains non-finite values".into()));
        }
        let raw = DesignMatrix {
            values,
            column_means: DVector::zeros(d),
            column_scales: DVector::from_element(d, 1.0),
            intercept,
            names,
        };
        raw.standardize()
    }

    /// Recomputes the standardization metadata from the raw values.
    pub fn standardize(mut self) -> Result<Self> {
        let n = self.values.nrows() as f64;
        for (j, col) in self.values.column_iter().enumerate() {
            let mean = if self.intercept { col.sum() / n } else { 0.0 };
            let var = col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            let scale = var.sqrt();
            let magnitude = col.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
            if !(scale > 1e-12 * magnitude) {
                return Err(Error::ConstantColumn(self.names[j].clone()));
            }
            self.column_means[j] = mean;
            self.column_scales[j] = scale;
        }
        Ok(self)
    }

    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn column_means(&self) -> &DVector<f64> {
        &self.column_means
    }

    pub fn column_scales(&self) -> &DVector<f64> {
        &self.column_scales
    }

    pub fn intercept(&self) -> bool {
        self.intercept
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    /// Standardized copy of the values.
    pub fn standardized(&self) -> DMatrix<f64> {
        let mut out = self.values.clone();
        for (j, mut col) in out.column_iter_mut().enumerate() {
            let (m, s) = (self.column_means[j], self.column_scales[j]);
            col.apply(|v| *v = (*v - m) / s);
        }
        out
    }

    /// Smallest eigenvalue of `X̃ᵀX̃/n` on the standardized columns.
    pub fn gram_min_eigenvalue(&self) -> f64 {
        let xs = self.standardized();
        let gram = xs.tr_mul(&xs) / self.nrows() as f64;
        gram.symmetric_eigenvalues().min()
    }

    /// `intercept + X β` on the raw scale.
    pub fn predict(&self, intercept: f64, beta: &[f64]) -> DVector<f64> {
        let b = DVector::from_column_slice(beta);
        let mut out = &self.values * b;
        out.add_scalar_mut(intercept);
        out
    }

    /// A new design made of the given rows, restandardized.
    pub fn select_rows(&self, rows: &[usize]) -> Result<Self> {
        let values = self.values.select_rows(rows);
        Self::with_names(values, self.intercept, self.names.clone())
    }

    /// A new design made of the given columns, restandardized.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let values = self.values.select_columns(cols);
        let names = cols.iter().map(|&j| self.names[j].clone()).collect();
        Self::with_names(values, self.intercept, names)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn population_sd_scale() {
        let x = DMatrix::from_column_slice(3, 1, &[1.0, 2.0, 3.0]);
        let d = DesignMatrix::new(x, true).unwrap();
        assert!((d.column_means()[0] - 2.0).abs() < 1e-15);
        assert!((d.column_scales()[0] - (2.0f64 / 3.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn already_standardized_column() {
        let x = DMatrix::from_column_slice(4, 1, &[1.0, -1.0, 1.0, -1.0]);
        let d = DesignMatrix::new(x, true).unwrap();
        assert_eq!(d.column_means()[0], 0.0);
        assert_eq!(d.column_scales()[0], 1.0);
    }

    #[test]
    fn constant_column_rejected_by_name() {
        let x = DMatrix::from_column_slice(3, 2, &[1.0, 2.0, 4.0, 5.0, 5.0, 5.0]);
        let err = DesignMatrix::new(x, true).unwrap_err();
        assert_eq!(err, Error::ConstantColumn("x2".into()));
    }

    #[test]
    fn standardized_columns_have_unit_second_moment() {
        let x = DMatrix::from_fn(7, 2, |i, j| ((i * 3 + j * 5) % 7) as f64 + 0.5 * j as f64);
        for &icpt in &[true, false] {
            let d = DesignMatrix::new(x.clone(), icpt).unwrap();
            let xs = d.standardized();
            for col in xs.column_iter() {
                let ss = col.norm_squared() / 7.0;
                assert!((ss - 1.0).abs() < 1e-12);
                if icpt {
                    assert!(col.sum().abs() < 1e-12);
                }
            }
        }
    }
}

//! Tabular regression data: CSV ingestion and standardization.

use std::collections::HashSet;
use std::io::Read;
use std::path::Path;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::LinearModel;

/// A feature matrix with its regression target.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    features: DMatrix<f64>,
    target: DVector<f64>,
    feature_names: Vec<String>,
}

impl Dataset {
    /// Builds a dataset, checking shapes, finiteness and name uniqueness.
    pub fn new(
        features: DMatrix<f64>,
        target: DVector<f64>,
        feature_names: Vec<String>,
    ) -> Result<Self> {
        if features.nrows() == 0 {
            return Err(Error::Empty);
        }
        if features.ncols() == 0 {
            return Err(Error::InvalidConfig(
                "dataset has no feature columns".into(),
            ));
        }
        if target.len() != features.nrows() {
            return Err(Error::DimensionMismatch {
                expected: features.nrows(),
                found: target.len(),
            });
        }
        if feature_names.len() != features.ncols() {
            return Err(Error::DimensionMismatch {
                expected: features.ncols(),
                found: feature_names.len(),
            });
        }
        if features.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("feature matrix"));
        }
        if target.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("target"));
        }
        check_distinct(&feature_names)?;
        Ok(Self {
            features,
            target,
            feature_names,
        })
    }

    pub fn n(&self) -> usize {
        self.features.nrows()
    }

    pub fn d(&self) -> usize {
        self.features.ncols()
    }

    pub fn features(&self) -> &DMatrix<f64> {
        &self.features
    }

    pub fn target(&self) -> &DVector<f64> {
        &self.target
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Mean squared residual `(1/n)‖Xβ − y‖²`, computed from the raw rows.
    pub fn residual_mse(&self, coefficients: &[f64]) -> Result<f64> {
        if coefficients.len() != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: coefficients.len(),
            });
        }
        let beta = DVector::from_column_slice(coefficients);
        let residual = &self.features * beta - &self.target;
        Ok(residual.norm_squared() / self.n() as f64)
    }

    /// Returns a copy with an extra all-ones column appended under `name`.
    pub fn with_intercept_column(&self, name: &str) -> Result<Self> {
        let (n, d) = self.features.shape();
        let mut features = self.features.clone().resize_horizontally(d + 1, 1.0);
        features.column_mut(d).fill(1.0);
        debug_assert_eq!(features.nrows(), n);
        let mut names = self.feature_names.clone();
        names.push(name.to_string());
        Self::new(features, self.target.clone(), names)
    }

    /// Centers and scales every column (features and target) to mean 0 and
    /// population variance 1.
    pub fn standardize(&self) -> Result<(Dataset, Scaling)> {
        let n = self.n() as f64;
        let mut features = self.features.clone();
        let mut means = Vec::with_capacity(self.d());
        let mut scales = Vec::with_capacity(self.d());
        for (j, name) in self.feature_names.iter().enumerate() {
            let (mean, sd) = moments(self.features.column(j).iter().copied(), n);
            if !(sd > 0.0) || sd <= 1e-12 * mean.abs().max(1.0) {
                return Err(Error::ZeroVariance(name.clone()));
            }
            features.column_mut(j).apply(|v| *v = (*v - mean) / sd);
            means.push(mean);
            scales.push(sd);
        }
        let (target_mean, target_scale) = moments(self.target.iter().copied(), n);
        if !(target_scale > 0.0) || target_scale <= 1e-12 * target_mean.abs().max(1.0) {
            return Err(Error::ZeroVariance("<target>".into()));
        }
        let target = self.target.map(|v| (v - target_mean) / target_scale);
        let scaling = Scaling {
            feature_means: means,
            feature_scales: scales,
            target_mean,
            target_scale,
        };
        Ok((
            Dataset::new(features, target, self.feature_names.clone())?,
            scaling,
        ))
    }
}

fn moments(values: impl Iterator<Item = f64> + Clone, n: f64) -> (f64, f64) {
    let mean = values.clone().sum::<f64>() / n;
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    (mean, var.sqrt())
}

fn check_distinct(names: &[String]) -> Result<()> {
    let mut seen = HashSet::with_capacity(names.len());
    for name in names {
        if !seen.insert(name.as_str()) {
            return Err(Error::DuplicateColumn(name.clone()));
        }
    }
    Ok(())
}

/// Per-column location and scale removed by [`Dataset::standardize`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaling {
    pub feature_means: Vec<f64>,
    pub feature_scales: Vec<f64>,
    pub target_mean: f64,
    pub target_scale: f64,
}

impl Scaling {
    /// Maps a model fitted on standardized data back to raw units, returning
    /// the raw slopes and the implied intercept.
    pub fn unstandardize(&self, model: &LinearModel) -> Result<(Vec<f64>, f64)> {
        let beta = model.coefficients();
        if beta.len() != self.feature_scales.len() {
            return Err(Error::DimensionMismatch {
                expected: self.feature_scales.len(),
                found: beta.len(),
            });
        }
        let slopes: Vec<f64> = beta
            .iter()
            .zip(&self.feature_scales)
            .map(|(b, s)| b * self.target_scale / s)
            .collect();
        let intercept = self.target_mean
            - slopes
                .iter()
                .zip(&self.feature_means)
                .map(|(b, m)| b * m)
                .sum::<f64>();
        Ok((slopes, intercept))
    }
}

/// Reads a CSV file with a header row; `target` names the response column.
pub fn load_csv(path: impl AsRef<Path>, target: &str) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_csv(file, target)
}

/// Parses CSV content from any reader; see [`load_csv`].
pub fn read_csv(reader: impl Read, target: &str) -> Result<Dataset> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers: Vec<String> = rdr
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || (headers.len() == 1 && headers[0].is_empty()) {
        return Err(Error::Empty);
    }
    check_distinct(&headers)?;
    let target_col = headers
        .iter()
        .position(|h| h == target)
        .ok_or_else(|| Error::MissingColumn(target.to_string()))?;

    let d = headers.len() - 1;
    let mut values: Vec<f64> = Vec::new();
    let mut y: Vec<f64> = Vec::new();
    for (i, record) in rdr.records().enumerate() {
        // header is row 1
        let row = i + 2;
        let record = record.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        if record.len() != headers.len() {
            return Err(Error::Csv {
                row,
                message: format!("expected {} fields, found {}", headers.len(), record.len()),
            });
        }
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .ok()
                .filter(|v: &f64| v.is_finite())
                .ok_or_else(|| Error::ParseCell {
                    row,
                    column: headers[j].clone(),
                    value: cell.to_string(),
                })?;
            if j == target_col {
                y.push(v);
            } else {
                values.push(v);
            }
        }
    }
    if y.is_empty() {
        return Err(Error::Empty);
    }
    if d == 0 {
        return Err(Error::InvalidConfig("CSV has no feature columns".into()));
    }
    let names: Vec<String> = headers
        .into_iter()
        .enumerate()
        .filter(|(j, _)| *j != target_col)
        .map(|(_, h)| h)
        .collect();
    let features = DMatrix::from_row_slice(y.len(), d, &values);
    Dataset::new(features, DVector::from_vec(y), names)
}

//! Second-moment summaries of a regression problem and the quadratic cost
//! they define.
//!
//! Every cost in the crate is the mean squared error
//! `c(β) = (1/n)‖Xβ − y‖² = s − 2βᵀg + βᵀGβ`, where `G = XᵀX/n`,
//! `g = Xᵀy/n` and `s = yᵀy/n`. Once those three quantities are known the
//! raw rows are no longer needed, which also lets a problem be specified
//! directly by its population moments.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::linalg;

const SYMMETRY_TOL: f64 = 1e-10;
const PSD_TOL: f64 = 1e-8;

/// A coefficient vector over named features.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    coefficients: Vec<f64>,
    feature_names: Vec<String>,
}

impl LinearModel {
    pub fn new(coefficients: Vec<f64>, feature_names: Vec<String>) -> Result<Self> {
        if coefficients.len() != feature_names.len() {
            return Err(Error::DimensionMismatch {
                expected: feature_names.len(),
                found: coefficients.len(),
            });
        }
        if coefficients.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("model coefficients"));
        }
        Ok(Self {
            coefficients,
            feature_names,
        })
    }

    pub fn zeros(feature_names: Vec<String>) -> Self {
        Self {
            coefficients: vec![0.0; feature_names.len()],
            feature_names,
        }
    }

    pub fn d(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    /// Number of nonzero coefficients.
    pub fn nonzeros(&self) -> usize {
        self.coefficients.iter().filter(|v| **v != 0.0).count()
    }

    pub(crate) fn set(&mut self, index: usize, value: f64) {
        self.coefficients[index] = value;
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&ModelDocument {
            features: self.feature_names.clone(),
            coefficients: self.coefficients.clone(),
        })
        .expect("plain data serializes")
    }

    /// Parses `{"features": [...], "coefficients": [...]}`.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_str(text)?;
        let model = Self::new(doc.coefficients, doc.features)?;
        check_distinct(model.feature_names())?;
        Ok(model)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDocument {
    features: Vec<String>,
    coefficients: Vec<f64>,
}

fn check_distinct(names: &[String]) -> Result<()> {
    for (i, a) in names.iter().enumerate() {
        if names[..i].contains(a) {
            return Err(Error::DuplicateColumn(a.clone()));
        }
    }
    Ok(())
}

/// Gram matrix, cross moments and target second moment of a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    gram: DMatrix<f64>,
    cross: DVector<f64>,
    target_second_moment: f64,
    feature_names: Vec<String>,
}

/// JSON form of [`SufficientStats`]: `{"gram", "cross", "tsm", "names"}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Moments {
    pub gram: Vec<Vec<f64>>,
    pub cross: Vec<f64>,
    pub tsm: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub names: Option<Vec<String>>,
}

impl SufficientStats {
    /// `G = XᵀX/n`, `g = Xᵀy/n`, `s = yᵀy/n`.
    pub fn from_dataset(ds: &Dataset) -> Self {
        let n = ds.n() as f64;
        let x = ds.features();
        let y = ds.target();
        let mut gram = x.tr_mul(x) / n;
        // XᵀX is symmetric in exact arithmetic; make it so in floating point.
        let d = gram.nrows();
        for i in 0..d {
            for j in 0..i {
                let v = gram[(i, j)];
                gram[(j, i)] = v;
            }
        }
        Self {
            gram,
            cross: x.tr_mul(y) / n,
            target_second_moment: y.norm_squared() / n,
            feature_names: ds.feature_names().to_vec(),
        }
    }

    /// Builds statistics from population moments. The gram matrix must be
    /// symmetric and positive semidefinite up to a small relative tolerance;
    /// slightly negative eigenvalues are clamped to zero.
    pub fn from_moments(
        gram: DMatrix<f64>,
        cross: DVector<f64>,
        target_second_moment: f64,
        feature_names: Option<Vec<String>>,
    ) -> Result<Self> {
        let d = gram.nrows();
        if d == 0 {
            return Err(Error::InvalidConfig("gram matrix is empty".into()));
        }
        if gram.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: gram.ncols(),
            });
        }
        if cross.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: cross.len(),
            });
        }
        if gram.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("gram matrix"));
        }
        if cross.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("cross moments"));
        }
        if !target_second_moment.is_finite() {
            return Err(Error::NonFinite("target second moment"));
        }
        if target_second_moment < 0.0 {
            return Err(Error::NegativeSecondMoment(target_second_moment));
        }
        let names = match feature_names {
            Some(names) => {
                if names.len() != d {
                    return Err(Error::DimensionMismatch {
                        expected: d,
                        found: names.len(),
                    });
                }
                check_distinct(&names)?;
                names
            }
            None => (1..=d).map(|i| format!("x{i}")).collect(),
        };

        let scale = gram.amax().max(1.0);
        let mut gram = gram;
        for i in 0..d {
            for j in 0..i {
                if (gram[(i, j)] - gram[(j, i)]).abs() > SYMMETRY_TOL * scale {
                    return Err(Error::NotSymmetric);
                }
                let avg = 0.5 * (gram[(i, j)] + gram[(j, i)]);
                gram[(i, j)] = avg;
                gram[(j, i)] = avg;
            }
        }
        let eig = SymmetricEigen::new(gram.clone());
        let max_eig = eig.eigenvalues.max();
        let min_eig = eig.eigenvalues.min();
        if min_eig < -PSD_TOL * max_eig.max(0.0) {
            return Err(Error::Indefinite {
                min_eigenvalue: min_eig,
            });
        }
        if min_eig < 0.0 {
            let clamped = eig.eigenvalues.map(|v| v.max(0.0));
            gram =
                &eig.eigenvectors * DMatrix::from_diagonal(&clamped) * eig.eigenvectors.transpose();
            for i in 0..d {
                for j in 0..i {
                    let v = gram[(i, j)];
                    gram[(j, i)] = v;
                }
            }
        }
        Ok(Self {
            gram,
            cross,
            target_second_moment,
            feature_names: names,
        })
    }

    pub fn from_moments_doc(doc: &Moments) -> Result<Self> {
        let d = doc.gram.len();
        if let Some(row) = doc.gram.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        let flat: Vec<f64> = doc.gram.iter().flatten().copied().collect();
        Self::from_moments(
            DMatrix::from_row_slice(d, d, &flat),
            DVector::from_column_slice(&doc.cross),
            doc.tsm,
            doc.names.clone(),
        )
    }

    pub fn to_moments_doc(&self) -> Moments {
        Moments {
            gram: self
                .gram
                .row_iter()
                .map(|r| r.iter().copied().collect())
                .collect(),
            cross: self.cross.iter().copied().collect(),
            tsm: self.target_second_moment,
            names: Some(self.feature_names.clone()),
        }
    }

    /// Folds a ridge penalty `λ‖β‖²` into the quadratic form.
    pub fn with_ridge(&self, lambda: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "ridge penalty {lambda} must be ≥ 0"
            )));
        }
        let mut out = self.clone();
        for i in 0..out.d() {
            out.gram[(i, i)] += lambda;
        }
        Ok(out)
    }

    pub fn d(&self) -> usize {
        self.cross.len()
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn cross(&self) -> &DVector<f64> {
        &self.cross
    }

    pub fn target_second_moment(&self) -> f64 {
        self.target_second_moment
    }

    pub fn feature_names(&self) -> &[String] {
        &self.feature_names
    }

    pub fn feature_index(&self, name: &str) -> Result<usize> {
        self.feature_names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::UnknownFeature(name.to_string()))
    }

    pub fn zero_model(&self) -> LinearModel {
        LinearModel::zeros(self.feature_names.clone())
    }

    /// Wraps raw coefficients as a model over this problem's features.
    pub fn model(&self, coefficients: Vec<f64>) -> Result<LinearModel> {
        LinearModel::new(coefficients, self.feature_names.clone())
    }

    /// Threshold under which a gram diagonal entry counts as zero.
    pub(crate) fn diag_tol(&self) -> f64 {
        let max_diag = (0..self.d())
            .map(|i| self.gram[(i, i)])
            .fold(0.0_f64, f64::max);
        1e-10 * max_diag
    }

    pub(crate) fn check_dim(&self, len: usize) -> Result<()> {
        if len != self.d() {
            return Err(Error::DimensionMismatch {
                expected: self.d(),
                found: len,
            });
        }
        Ok(())
    }

    /// Mean squared error of `model`.
    pub fn cost(&self, model: &LinearModel) -> Result<f64> {
        self.check_dim(model.d())?;
        Ok(self.cost_of(model.coefficients()))
    }

    /// Unchecked cost of a raw coefficient slice of length `d`.
    pub fn cost_of(&self, beta: &[f64]) -> f64 {
        debug_assert_eq!(beta.len(), self.d());
        let d = self.d();
        let mut linear = 0.0;
        let mut quad = 0.0;
        for i in 0..d {
            if beta[i] == 0.0 {
                continue;
            }
            linear += beta[i] * self.cross[i];
            let mut row = 0.0;
            for j in 0..d {
                row += self.gram[(i, j)] * beta[j];
            }
            quad += beta[i] * row;
        }
        let value = self.target_second_moment - 2.0 * linear + quad;
        let tol = 1e-12 * self.target_second_moment.max(1.0);
        if value < 0.0 && value > -tol {
            0.0
        } else {
            value
        }
    }

    /// `∇c(β) = 2Gβ − 2g`.
    pub fn gradient(&self, model: &LinearModel) -> Result<Vec<f64>> {
        self.check_dim(model.d())?;
        let beta = DVector::from_column_slice(model.coefficients());
        Ok(((&self.gram * beta - &self.cross) * 2.0)
            .iter()
            .copied()
            .collect())
    }

    /// `g − Gβ`, half the negative gradient.
    pub(crate) fn residual_correlation(&self, beta: &[f64]) -> Vec<f64> {
        let d = self.d();
        (0..d)
            .map(|i| {
                let mut v = self.cross[i];
                for j in 0..d {
                    v -= self.gram[(i, j)] * beta[j];
                }
                v
            })
            .collect()
    }

    /// Ordinary least squares; the minimum-norm solution when `G` is singular.
    pub fn ols(&self) -> LinearModel {
        let beta = linalg::min_norm_solve(self.gram.clone(), &self.cross);
        LinearModel {
            coefficients: beta.iter().copied().collect(),
            feature_names: self.feature_names.clone(),
        }
    }

    /// Lowest cost over models that differ from `base` only on `support`
    /// (a bitmask of coordinates).
    pub(crate) fn restricted_optimum(&self, base: &[f64], support: u64) -> f64 {
        let idx: Vec<usize> = (0..self.d()).filter(|i| support >> i & 1 == 1).collect();
        let base_cost = self.cost_of(base);
        if idx.is_empty() {
            return base_cost;
        }
        let r = self.residual_correlation(base);
        let m = idx.len();
        let sub = DMatrix::from_fn(m, m, |a, b| self.gram[(idx[a], idx[b])]);
        let rhs = DVector::from_iterator(m, idx.iter().map(|&i| r[i]));
        let u = linalg::min_norm_solve(sub, &rhs);
        let mut beta = base.to_vec();
        for (k, &i) in idx.iter().enumerate() {
            beta[i] += u[k];
        }
        self.cost_of(&beta).min(base_cost)
    }
}

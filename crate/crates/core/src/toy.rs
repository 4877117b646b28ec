//! The two-feature age/height/weight example used throughout the docs and
//! tests.
//!
//! Height and weight are standardized with correlation 0.9. The moments are
//! chosen so that the least-squares fit is exactly `(2.12, −0.94)` and the
//! zero model costs 2.04: the cross moments solve `G·(2.12, −0.94)ᵀ = g`.

use nalgebra::{DMatrix, DVector};

use crate::stats::{LinearModel, SufficientStats};

pub const CORRELATION: f64 = 0.9;
pub const TARGET_SECOND_MOMENT: f64 = 2.04;
pub const OLS: [f64; 2] = [2.12, -0.94];

/// Feature names, height first.
pub fn feature_names() -> Vec<String> {
    vec!["height".to_string(), "weight".to_string()]
}

pub fn stats() -> SufficientStats {
    let gram = DMatrix::from_row_slice(2, 2, &[1.0, CORRELATION, CORRELATION, 1.0]);
    let cross = &gram * DVector::from_column_slice(&OLS);
    SufficientStats::from_moments(gram, cross, TARGET_SECOND_MOMENT, Some(feature_names()))
        .expect("toy moments are valid")
}

pub fn model(coefficients: [f64; 2]) -> LinearModel {
    LinearModel::new(coefficients.to_vec(), feature_names()).expect("finite")
}

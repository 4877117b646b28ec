//! Coordinate paths, their cost sequences, and weighted interpretability
//! losses.
//!
//! A coordinate path starts at a base model and changes one coefficient per
//! step. Steps are stored as `(coordinate, new value)` pairs rather than
//! increments, so materializing a path never accumulates rounding error.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{LinearModel, SufficientStats};

/// One coordinate step: set coefficient `index` (0-based) to `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub index: usize,
    pub value: f64,
}

impl Step {
    pub fn new(index: usize, value: f64) -> Self {
        Self { index, value }
    }
}

/// A base model followed by an ordered list of coordinate steps.
#[derive(Debug, Clone, PartialEq)]
pub struct CoordinatePath {
    base: LinearModel,
    steps: Vec<Step>,
}

impl CoordinatePath {
    pub fn new(base: LinearModel, steps: Vec<Step>) -> Result<Self> {
        let d = base.d();
        for step in &steps {
            if step.index >= d {
                return Err(Error::IndexOutOfRange {
                    index: step.index,
                    dim: d,
                });
            }
            if !step.value.is_finite() {
                return Err(Error::NonFinite("step value"));
            }
        }
        Ok(Self { base, steps })
    }

    pub fn empty(base: LinearModel) -> Self {
        Self {
            base,
            steps: Vec::new(),
        }
    }

    pub fn base(&self) -> &LinearModel {
        &self.base
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    /// Number of steps `K`.
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// The `K` models after each step; the base model is not included.
    pub fn materialize(&self) -> Vec<LinearModel> {
        let mut current = self.base.clone();
        self.steps
            .iter()
            .map(|s| {
                current.set(s.index, s.value);
                current.clone()
            })
            .collect()
    }

    /// The last model of the path, or the base when the path is empty.
    pub fn final_model(&self) -> LinearModel {
        let mut current = self.base.clone();
        for s in &self.steps {
            current.set(s.index, s.value);
        }
        current
    }

    /// Drops the last step.
    pub fn truncated(&self) -> Self {
        let mut steps = self.steps.clone();
        steps.pop();
        Self {
            base: self.base.clone(),
            steps,
        }
    }

    pub fn cost_sequence(&self, stats: &SufficientStats) -> Result<CostSequence> {
        stats.check_dim(self.base.d())?;
        let mut beta = self.base.coefficients().to_vec();
        let values = self
            .steps
            .iter()
            .map(|s| {
                beta[s.index] = s.value;
                stats.cost_of(&beta)
            })
            .collect();
        Ok(CostSequence::new(values))
    }

    /// Path complexity: the number of steps.
    pub fn complexity_loss(&self) -> usize {
        self.len()
    }

    /// `Σ_k α_k c(β_k)` over the steps of the path.
    pub fn weighted_loss(&self, stats: &SufficientStats, schedule: &WeightSchedule) -> Result<f64> {
        self.cost_sequence(stats)?.weighted(schedule)
    }

    /// Serializes as `{"base": [...], "steps": [{"feature", "value"}, ...]}`.
    pub fn to_json(&self) -> String {
        let names = self.base.feature_names();
        let doc = PathDocument {
            base: self.base.coefficients().to_vec(),
            steps: self
                .steps
                .iter()
                .map(|s| StepDocument {
                    feature: names[s.index].clone(),
                    value: s.value,
                })
                .collect(),
        };
        serde_json::to_string(&doc).expect("plain data serializes")
    }

    /// Parses the JSON produced by [`to_json`](Self::to_json), resolving
    /// feature names against `feature_names`.
    pub fn from_json(text: &str, feature_names: &[String]) -> Result<Self> {
        let doc: PathDocument = serde_json::from_str(text)?;
        let base = LinearModel::new(doc.base, feature_names.to_vec())?;
        let steps = doc
            .steps
            .into_iter()
            .map(|s| {
                let index = feature_names
                    .iter()
                    .position(|n| *n == s.feature)
                    .ok_or(Error::UnknownFeature(s.feature))?;
                Ok(Step::new(index, s.value))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(base, steps)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PathDocument {
    base: Vec<f64>,
    steps: Vec<StepDocument>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StepDocument {
    feature: String,
    value: f64,
}

/// Minimum number of coordinate steps from `base` to `target`: the number of
/// coordinates on which they differ.
pub fn model_complexity(base: &LinearModel, target: &LinearModel) -> Result<usize> {
    if base.d() != target.d() {
        return Err(Error::DimensionMismatch {
            expected: base.d(),
            found: target.d(),
        });
    }
    Ok(base
        .coefficients()
        .iter()
        .zip(target.coefficients())
        .filter(|(a, b)| a != b)
        .count())
}

/// Per-step costs `c₁, …, c_K`; entries past `K` are implicitly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct CostSequence(Vec<f64>);

impl CostSequence {
    pub fn new(values: Vec<f64>) -> Self {
        debug_assert!(values.iter().all(|v| *v >= 0.0 || v.is_nan()));
        Self(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Entry `k` (1-based) of the zero-padded sequence.
    pub fn get(&self, k: usize) -> f64 {
        k.checked_sub(1)
            .and_then(|i| self.0.get(i))
            .copied()
            .unwrap_or(0.0)
    }

    /// Componentwise `self ≤ other` after zero padding.
    pub fn dominates(&self, other: &CostSequence) -> bool {
        let n = self.len().max(other.len());
        (1..=n).all(|k| self.get(k) <= other.get(k))
    }

    pub fn weighted(&self, schedule: &WeightSchedule) -> Result<f64> {
        let weights = schedule.weights(self.len())?;
        Ok(self.0.iter().zip(&weights).map(|(c, a)| a * c).sum())
    }
}

/// Nonnegative step weights `α₁, α₂, …`.
#[derive(Debug, Clone, PartialEq)]
pub enum WeightSchedule {
    /// Finitely many explicit weights; undefined past the end.
    Explicit(Vec<f64>),
    /// `α_k = γ^k`.
    Geometric(f64),
    /// `α_k = p_k` for a probability vector `p`; zero past the end.
    Distribution(Vec<f64>),
}

impl WeightSchedule {
    pub fn explicit(weights: Vec<f64>) -> Result<Self> {
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSchedule(
                "weights must be finite and nonnegative".into(),
            ));
        }
        Ok(Self::Explicit(weights))
    }

    pub fn geometric(gamma: f64) -> Result<Self> {
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::InvalidSchedule(format!(
                "gamma must be > 0, got {gamma}"
            )));
        }
        Ok(Self::Geometric(gamma))
    }

    pub fn distribution(p: Vec<f64>) -> Result<Self> {
        if p.is_empty() {
            return Err(Error::InvalidSchedule("distribution is empty".into()));
        }
        if p.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidSchedule(
                "probabilities must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = p.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidSchedule(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        Ok(Self::Distribution(p))
    }

    /// Uniform distribution over `1..=k_max`.
    pub fn uniform(k_max: usize) -> Result<Self> {
        Self::distribution(vec![1.0 / k_max as f64; k_max])
    }

    /// `α_k` for `k ≥ 1`, or `None` where the schedule is undefined.
    pub fn weight(&self, k: usize) -> Option<f64> {
        if k == 0 {
            return None;
        }
        match self {
            Self::Explicit(w) => w.get(k - 1).copied(),
            Self::Geometric(gamma) => Some(gamma.powi(k as i32)),
            Self::Distribution(p) => Some(p.get(k - 1).copied().unwrap_or(0.0)),
        }
    }

    /// `(α₁, …, α_K)`.
    pub fn weights(&self, k: usize) -> Result<Vec<f64>> {
        (1..=k)
            .map(|i| {
                self.weight(i).ok_or_else(|| {
                    Error::InvalidSchedule(format!("no weight defined for step {i}"))
                })
            })
            .collect()
    }

    /// Longest path length the schedule is meant for, if it has one.
    pub fn horizon(&self) -> Option<usize> {
        match self {
            Self::Explicit(w) | Self::Distribution(w) => Some(w.len()),
            Self::Geometric(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::toy;

    fn toy_path(steps: &[(usize, f64)]) -> CoordinatePath {
        let s = toy::stats();
        CoordinatePath::new(
            s.zero_model(),
            steps.iter().map(|&(i, v)| Step::new(i, v)).collect(),
        )
        .unwrap()
    }

    fn assert_seq(seq: &CostSequence, expected: &[f64], tol: f64) {
        assert_eq!(seq.len(), expected.len());
        for (a, b) in seq.values().iter().zip(expected) {
            assert!((a - b).abs() <= tol, "{a} vs {b}");
        }
    }

    #[test]
    fn materialize_table_paths() {
        let a = toy_path(&[(0, 2.12), (1, -0.94)]).materialize();
        assert_eq!(a[0].coefficients(), &[2.12, 0.0]);
        assert_eq!(a[1].coefficients(), &[2.12, -0.94]);
        let c = toy_path(&[(0, 1.70), (1, -0.94), (0, 2.12)]).materialize();
        assert_eq!(c.len(), 3);
        assert_eq!(c[1].coefficients(), &[1.70, -0.94]);
        assert_eq!(c[2].coefficients(), &[2.12, -0.94]);
        assert!(toy_path(&[]).materialize().is_empty());
    }

    #[test]
    fn out_of_range_step() {
        let s = toy::stats();
        let err = CoordinatePath::new(s.zero_model(), vec![Step::new(2, 1.0)]).unwrap_err();
        assert!(matches!(err, Error::IndexOutOfRange { index: 2, dim: 2 }));
    }

    #[test]
    fn table_cost_sequences() {
        let s = toy::stats();
        let a = toy_path(&[(0, 2.12), (1, -0.94)]);
        let b = toy_path(&[(1, -0.94), (0, 2.12)]);
        let c = toy_path(&[(0, 1.70), (1, -0.94), (0, 2.12)]);
        assert_seq(&a.cost_sequence(&s).unwrap(), &[1.13, 0.25], 0.005);
        assert_seq(&b.cost_sequence(&s).unwrap(), &[4.74, 0.25], 0.005);
        assert_seq(&c.cost_sequence(&s).unwrap(), &[0.60, 0.43, 0.25], 0.005);
        assert!(toy_path(&[]).cost_sequence(&s).unwrap().is_empty());
        assert_eq!(a.complexity_loss(), 2);
        assert_eq!(c.complexity_loss(), 3);
        assert_eq!(toy_path(&[]).complexity_loss(), 0);
    }

    #[test]
    fn weighted_losses() {
        let s = toy::stats();
        let one = WeightSchedule::geometric(1.0).unwrap();
        let a = toy_path(&[(0, 2.12), (1, -0.94)]);
        let b = toy_path(&[(1, -0.94), (0, 2.12)]);
        assert!((a.weighted_loss(&s, &one).unwrap() - 1.38).abs() <= 0.01);
        assert!((b.weighted_loss(&s, &one).unwrap() - 4.99).abs() <= 0.01);
        assert_eq!(toy_path(&[]).weighted_loss(&s, &one).unwrap(), 0.0);
        let short = WeightSchedule::explicit(vec![1.0]).unwrap();
        assert!(a.weighted_loss(&s, &short).is_err());
        assert_eq!(toy_path(&[]).weighted_loss(&s, &short).unwrap(), 0.0);
    }

    #[test]
    fn domination() {
        let a = CostSequence::new(vec![1.13, 0.25]);
        let b = CostSequence::new(vec![4.74, 0.25]);
        let greedy = CostSequence::new(vec![0.42, 0.39]);
        assert!(a.dominates(&b));
        assert!(!b.dominates(&a));
        assert!(a.dominates(&a));
        assert!(!greedy.dominates(&a) && !a.dominates(&greedy));
        // zero padding: a shorter sequence with smaller entries dominates
        assert!(CostSequence::new(vec![1.0]).dominates(&CostSequence::new(vec![1.0, 0.1])));
        assert!(!CostSequence::new(vec![1.0, 0.1]).dominates(&CostSequence::new(vec![1.0])));
    }

    #[test]
    fn complexity_of_models() {
        let zero = toy::model([0.0, 0.0]);
        assert_eq!(model_complexity(&zero, &toy::model(toy::OLS)).unwrap(), 2);
        assert_eq!(model_complexity(&zero, &zero).unwrap(), 0);
        let names: Vec<String> = ["meal", "inc", "el", "expn"].map(String::from).to_vec();
        let base = LinearModel::new(vec![-0.87, 0.0, 0.0, 0.0], names.clone()).unwrap();
        let target = LinearModel::new(vec![-0.59, 0.23, -0.18, 0.07], names).unwrap();
        assert_eq!(model_complexity(&base, &target).unwrap(), 4);
    }

    #[test]
    fn schedules() {
        let g = WeightSchedule::geometric(2.0).unwrap();
        assert_eq!(g.weights(3).unwrap(), vec![2.0, 4.0, 8.0]);
        assert_eq!(g.weight(0), None);
        let p = WeightSchedule::distribution(vec![0.25, 0.75]).unwrap();
        assert_eq!(p.weight(2), Some(0.75));
        assert_eq!(p.weight(3), Some(0.0));
        assert!(WeightSchedule::distribution(vec![0.5, 0.6]).is_err());
        assert!(WeightSchedule::explicit(vec![-1.0]).is_err());
        assert!(WeightSchedule::geometric(0.0).is_err());
        assert_eq!(WeightSchedule::explicit(vec![1.0]).unwrap().weight(2), None);
        assert_eq!(WeightSchedule::uniform(4).unwrap().weight(3), Some(0.25));
    }

    #[test]
    fn json_format() {
        let p = toy_path(&[(0, 2.12), (1, -0.94)]);
        let text = p.to_json();
        assert_eq!(
            text,
            r#"{"base":[0.0,0.0],"steps":[{"feature":"height","value":2.12},{"feature":"weight","value":-0.94}]}"#
        );
        let back = CoordinatePath::from_json(&text, &toy::feature_names()).unwrap();
        assert_eq!(back, p);
        assert_eq!(back.to_json(), text);
        let bad = r#"{"base":[0.0,0.0],"steps":[{"feature":"age","value":1.0}]}"#;
        assert!(matches!(
            CoordinatePath::from_json(bad, &toy::feature_names()),
            Err(Error::UnknownFeature(_))
        ));
        let short = r#"{"base":[0.0],"steps":[]}"#;
        assert!(CoordinatePath::from_json(short, &toy::feature_names()).is_err());
    }
}

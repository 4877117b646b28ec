//! The tradeoff between a model's cost and
//! the interpretability loss of its path, traced by weighted sums.
//!
//! For a tradeoff parameter `λ ≥ 0` we minimize, over all path lengths
//! `K ≥ 0` and all `K`-step paths, `c(β_K) + λ Σ_k α_k c(β_k)`. For a fixed
//! `K` this is the weighted path problem with weights `λα_k` for `k < K` and
//! `λα_K + 1` for the last step, so every fixed-`K` optimizer applies
//! unchanged. Each minimizer is Pareto-optimal; sweeping `λ` recovers the
//! convex part of the front only.

use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::path::{CoordinatePath, WeightSchedule};
use crate::search::{optimize, OptimizerConfig, SolverKind};
use crate::stats::{LinearModel, SufficientStats};

/// A model on the cost / interpretability tradeoff with the path reaching it.
#[derive(Debug, Clone, PartialEq)]
pub struct ParetoPoint {
    pub model: LinearModel,
    pub cost: f64,
    pub interp_loss: f64,
    pub steps: usize,
    pub lambda: f64,
    pub path: CoordinatePath,
}

impl ParetoPoint {
    fn to_value(&self) -> Value {
        let path: Value = serde_json::from_str(&self.path.to_json()).expect("valid JSON");
        json!({
            "lambda": self.lambda,
            "K": self.steps,
            "cost": self.cost,
            "interp_loss": self.interp_loss,
            "coefficients": self.model.coefficients(),
            "path": path,
        })
    }
}

/// Result of a `λ` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontReport {
    /// Undominated points, sorted by interpretability loss.
    pub points: Vec<ParetoPoint>,
    /// The minimizer for every `λ`, in grid order.
    pub solutions: Vec<ParetoPoint>,
    pub schedule: WeightSchedule,
    pub lambdas: Vec<f64>,
    pub k_max: usize,
    pub solver: SolverKind,
}

impl FrontReport {
    pub fn to_json(&self) -> String {
        let features = self
            .points
            .first()
            .or(self.solutions.first())
            .map(|p| p.model.feature_names().to_vec())
            .unwrap_or_default();
        let doc = json!({
            "features": features,
            "schedule": schedule_value(&self.schedule),
            "lambdas": self.lambdas,
            "k_max": self.k_max,
            "solver": solver_name(self.solver),
            "points": self.points.iter().map(ParetoPoint::to_value).collect::<Vec<_>>(),
        });
        serde_json::to_string_pretty(&doc).expect("plain data serializes")
    }

    /// `interp_loss,cost,K,lambda` rows, one per front point.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(["interp_loss", "cost", "K", "lambda"])
            .expect("in-memory write");
        for p in &self.points {
            w.write_record([
                p.interp_loss.to_string(),
                p.cost.to_string(),
                p.steps.to_string(),
                p.lambda.to_string(),
            ])
            .expect("in-memory write");
        }
        String::from_utf8(w.into_inner().expect("in-memory flush")).expect("ASCII output")
    }

    /// Path lengths of the front points, counted.
    pub fn step_histogram(&self) -> Vec<(usize, usize)> {
        let mut counts = std::collections::BTreeMap::new();
        for p in &self.points {
            *counts.entry(p.steps).or_insert(0) += 1;
        }
        counts.into_iter().collect()
    }
}

pub(crate) fn schedule_value(schedule: &WeightSchedule) -> Value {
    match schedule {
        WeightSchedule::Geometric(gamma) => json!({"kind": "geometric", "gamma": gamma}),
        WeightSchedule::Explicit(w) => json!({"kind": "explicit", "weights": w}),
        WeightSchedule::Distribution(p) => json!({"kind": "distribution", "p": p}),
    }
}

pub(crate) fn solver_name(solver: SolverKind) -> &'static str {
    match solver {
        SolverKind::Exact => "exact",
        SolverKind::Local => "local",
    }
}

/// Minimizes `c(β_K) + λ Σ_k α_k c(β_k)` over `K ∈ 0..=k_max`.
///
/// `cfg` supplies the schedule `α` and the optimizer settings; its `steps`
/// and `endpoint` are ignored. Ties between lengths go to the shorter path.
pub fn solve_tradeoff(
    stats: &SufficientStats,
    base: &LinearModel,
    cfg: &OptimizerConfig,
    lambda: f64,
    k_max: usize,
    solver: SolverKind,
) -> Result<ParetoPoint> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "lambda must be finite and ≥ 0, got {lambda}"
        )));
    }
    let base_cost = stats.cost(base)?;
    let mut best = (base_cost, CoordinatePath::empty(base.clone()));
    for k in 1..=k_max {
        let mut weights: Vec<f64> = cfg
            .schedule
            .weights(k)?
            .iter()
            .map(|a| lambda * a)
            .collect();
        weights[k - 1] += 1.0;
        let mut step_cfg = cfg.clone();
        step_cfg.steps = k;
        step_cfg.schedule = WeightSchedule::explicit(weights)?;
        step_cfg.endpoint = None;
        step_cfg.batch = cfg.batch.min(k);
        let sol = optimize(stats, base, &step_cfg, solver)?;
        if sol.objective < best.0 {
            best = (sol.objective, sol.path);
        }
    }
    let path = best.1;
    let model = path.final_model();
    let cost = stats.cost(&model)?;
    let interp_loss = path.weighted_loss(stats, &cfg.schedule)?;
    Ok(ParetoPoint {
        steps: path.len(),
        model,
        cost,
        interp_loss,
        lambda,
        path,
    })
}

/// Solves the tradeoff for every `λ` in `lambdas` and keeps the
/// undominated results.
pub fn sweep(
    stats: &SufficientStats,
    base: &LinearModel,
    cfg: &OptimizerConfig,
    lambdas: &[f64],
    k_max: usize,
    solver: SolverKind,
) -> Result<FrontReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidConfig("lambda grid is empty".into()));
    }
    let solutions = lambdas
        .par_iter()
        .map(|&lambda| solve_tradeoff(stats, base, cfg, lambda, k_max, solver))
        .collect::<Result<Vec<_>>>()?;
    let points = front(&solutions);
    Ok(FrontReport {
        points,
        solutions,
        schedule: cfg.schedule.clone(),
        lambdas: lambdas.to_vec(),
        k_max,
        solver,
    })
}

/// `count` logarithmically spaced values from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if !(lo > 0.0 && hi >= lo) || count == 0 {
        return Err(Error::InvalidConfig(format!(
            "invalid log grid [{lo}, {hi}] with {count} points"
        )));
    }
    if count == 1 {
        return Ok(vec![lo]);
    }
    let (a, b) = (lo.log10(), hi.log10());
    Ok((0..count)
        .map(|i| 10f64.powf(a + (b - a) * i as f64 / (count - 1) as f64))
        .collect())
}

/// The default grid: 61 values from 10⁻³ to 10³.
pub fn default_grid() -> Vec<f64> {
    log_grid(1e-3, 1e3, 61).expect("valid constants")
}

fn same_model(a: &LinearModel, b: &LinearModel) -> bool {
    a.coefficients()
        .iter()
        .zip(b.coefficients())
        .all(|(x, y)| (x - y).abs() <= 1e-9 * x.abs().max(y.abs()).max(1.0))
}

fn front(solutions: &[ParetoPoint]) -> Vec<ParetoPoint> {
    let mut unique: Vec<ParetoPoint> = Vec::new();
    for p in solutions {
        match unique.iter_mut().find(|q| same_model(&q.model, &p.model)) {
            Some(q) => {
                if p.lambda < q.lambda {
                    *q = p.clone();
                }
            }
            None => unique.push(p.clone()),
        }
    }
    let pairs: Vec<(f64, f64)> = unique.iter().map(|p| (p.interp_loss, p.cost)).collect();
    let mut kept: Vec<ParetoPoint> = unique
        .into_iter()
        .enumerate()
        .filter(|(i, _)| !pairs.iter().any(|q| strictly_dominates(*q, pairs[*i])))
        .map(|(_, p)| p)
        .collect();
    kept.sort_by(|a, b| {
        a.interp_loss
            .total_cmp(&b.interp_loss)
            .then(b.cost.total_cmp(&a.cost))
    });
    kept
}

/// `a` is no worse than `b` in both coordinates and better in one, beyond a
/// relative tolerance of 1e-12.
pub fn strictly_dominates(a: (f64, f64), b: (f64, f64)) -> bool {
    let tol = |x: f64, y: f64| 1e-12 * x.abs().max(y.abs()).max(1e-300);
    let (t0, t1) = (tol(a.0, b.0), tol(a.1, b.1));
    a.0 <= b.0 + t0 && a.1 <= b.1 + t1 && (a.0 < b.0 - t0 || a.1 < b.1 - t1)
}

/// First pair `(i, j)` with point `j` dominating point `i`, if any. Points
/// are `(interp_loss, cost)`.
pub fn find_dominated(points: &[(f64, f64)]) -> Option<(usize, usize)> {
    for (i, &p) in points.iter().enumerate() {
        for (j, &q) in points.iter().enumerate() {
            if i != j && strictly_dominates(q, p) {
                return Some((i, j));
            }
        }
    }
    None
}

/// One row of a front CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontRow {
    pub interp_loss: f64,
    pub cost: f64,
    pub steps: usize,
    pub lambda: f64,
}

/// Parses the CSV written by [`FrontReport::to_csv`].
pub fn read_front_csv(text: &str) -> Result<Vec<FrontRow>> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let headers = rdr
        .headers()
        .map_err(|e| Error::Csv {
            row: 1,
            message: e.to_string(),
        })?
        .clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::MissingColumn(name.to_string()))
    };
    let (li, ci, ki, ai) = (col("interp_loss")?, col("cost")?, col("K")?, col("lambda")?);
    let mut rows = Vec::new();
    for (n, record) in rdr.records().enumerate() {
        let row = n + 2;
        let record = record.map_err(|e| Error::Csv {
            row,
            message: e.to_string(),
        })?;
        let field = |j: usize| -> Result<f64> {
            let cell = record.get(j).unwrap_or("");
            cell.parse::<f64>()
                .ok()
                .filter(|v| !v.is_nan())
                .ok_or_else(|| Error::ParseCell {
                    row,
                    column: headers[j].to_string(),
                    value: cell.to_string(),
                })
        };
        let steps = record
            .get(ki)
            .and_then(|c| c.parse::<usize>().ok())
            .ok_or_else(|| Error::ParseCell {
                row,
                column: "K".into(),
                value: record.get(ki).unwrap_or("").to_string(),
            })?;
        rows.push(FrontRow {
            interp_loss: field(li)?,
            cost: field(ci)?,
            steps,
            lambda: field(ai)?,
        });
    }
    Ok(rows)
}

/// A path minimizing the expected cost `E_k[c(β_k)]` when the reader stops
/// after step `k` with probability `p_k`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExpectedCostPath {
    pub path: CoordinatePath,
    pub expected_cost: f64,
}

/// Optimizes a `p.len()`-step path under the weights `α_k = p_k`; `cfg`
/// supplies the optimizer settings (its schedule, steps and endpoint are
/// replaced).
pub fn expected_cost_path(
    stats: &SufficientStats,
    base: &LinearModel,
    p: &[f64],
    cfg: &OptimizerConfig,
    solver: SolverKind,
) -> Result<ExpectedCostPath> {
    let schedule = WeightSchedule::distribution(p.to_vec())?;
    let mut run = cfg.clone();
    run.steps = p.len();
    run.schedule = schedule.clone();
    run.endpoint = None;
    run.batch = cfg.batch.min(p.len());
    let sol = optimize(stats, base, &run, solver)?;
    let expected_cost = sol.path.weighted_loss(stats, &schedule)?;
    Ok(ExpectedCostPath {
        path: sol.path,
        expected_cost,
    })
}

//! Outer searches over which coordinate each step changes.
//!
//! For a fixed index vector the step sizes come from the exact inner solve
//! in [`crate::inner`]; the searches here only choose the indices. In unit
//! step mode every step moves one coefficient by exactly ±1, so a step is an
//! `(index, sign)` pair and no inner solve is needed.

mod exact;
mod explain;
mod local;
mod simple;

pub use exact::exact_path;
pub use explain::{best_explanation, explain, interpretability_loss, Explanation};
pub use local::local_improvement;
pub use simple::{direct_path, greedy_path};

use crate::error::{Error, Result};
use crate::inner::{build_path, endpoint_offset, DeltaVector, Engine, IndexVector, Workspace};
use crate::path::{CoordinatePath, WeightSchedule};
use crate::stats::{LinearModel, SufficientStats};

/// Default cap on inner solves performed by [`exact_path`].
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// How far one step may move a coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StepMode {
    /// Any real change.
    #[default]
    Continuous,
    /// Exactly +1 or −1, as in a points-based scoring system.
    Unit,
}

/// Which outer search to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolverKind {
    Exact,
    Local,
}

/// Settings shared by the path optimizers.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    /// Path length `K`.
    pub steps: usize,
    pub schedule: WeightSchedule,
    /// When set, the path must end at this model.
    pub endpoint: Option<LinearModel>,
    pub step_mode: StepMode,
    pub seed: u64,
    /// Local improvement batch size `q`.
    pub batch: usize,
    /// Local improvement iteration count `T`.
    pub iterations: usize,
    /// Inner-solve budget of the exact search.
    pub budget: u64,
    /// Skip index vectors that change the same coordinate twice in a row.
    pub skip_repeated: bool,
}

impl OptimizerConfig {
    pub fn new(steps: usize, schedule: WeightSchedule) -> Self {
        Self {
            steps,
            schedule,
            endpoint: None,
            step_mode: StepMode::Continuous,
            seed: 0,
            batch: 1,
            iterations: 50,
            budget: DEFAULT_BUDGET,
            skip_repeated: false,
        }
    }

    pub fn with_endpoint(mut self, endpoint: LinearModel) -> Self {
        self.endpoint = Some(endpoint);
        self
    }

    pub fn with_step_mode(mut self, mode: StepMode) -> Self {
        self.step_mode = mode;
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_batch(mut self, batch: usize) -> Self {
        self.batch = batch;
        self
    }

    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self
    }

    pub fn with_budget(mut self, budget: u64) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_skip_repeated(mut self, skip: bool) -> Self {
        self.skip_repeated = skip;
        self
    }
}

/// A path found by one of the optimizers, with its search bookkeeping.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSolution {
    pub path: CoordinatePath,
    pub indices: IndexVector,
    pub deltas: DeltaVector,
    /// Weighted objective `Σ α_k c(β_k)` under the configured schedule.
    pub objective: f64,
    /// Inner solves (or unit-mode evaluations) performed.
    pub evaluations: u64,
    /// Local improvement only: the incumbent objective before the first
    /// iteration and after each iteration.
    pub trace: Vec<f64>,
}

/// Runs the chosen optimizer.
pub fn optimize(
    stats: &SufficientStats,
    base: &LinearModel,
    cfg: &OptimizerConfig,
    solver: SolverKind,
) -> Result<PathSolution> {
    match solver {
        SolverKind::Exact => exact_path(stats, base, cfg),
        SolverKind::Local => local_improvement(stats, base, None, cfg),
    }
}

/// The search space of one configured problem. Candidates are sequences of
/// labels: a coordinate in continuous mode, an `(index, sign)` pair packed
/// as `2·index + (sign < 0)` in unit mode.
pub(crate) struct Space<'a> {
    engine: Engine<'a>,
    base_model: LinearModel,
    weights: Vec<f64>,
    endpoint: Option<Vec<f64>>,
    endpoint_cost: f64,
    mode: StepMode,
    labels: usize,
}

/// Buffers owned by one search worker.
#[derive(Default)]
pub(crate) struct Scratch {
    ws: Workspace,
    idx: Vec<usize>,
    deltas: Vec<f64>,
}

impl<'a> Space<'a> {
    pub(crate) fn new(
        stats: &'a SufficientStats,
        base: &LinearModel,
        cfg: &OptimizerConfig,
    ) -> Result<Self> {
        let engine = Engine::new(stats, base)?;
        let weights = cfg.schedule.weights(cfg.steps)?;
        if cfg.steps > 0 && weights.iter().all(|w| *w == 0.0) {
            return Err(Error::InvalidSchedule("every step weight is zero".into()));
        }
        let (endpoint, endpoint_cost) = match &cfg.endpoint {
            Some(target) => {
                stats.check_dim(target.d())?;
                (Some(endpoint_offset(base, target)), stats.cost(target)?)
            }
            None => (None, 0.0),
        };
        let labels = match cfg.step_mode {
            StepMode::Continuous => stats.d(),
            StepMode::Unit => 2 * stats.d(),
        };
        Ok(Self {
            engine,
            base_model: base.clone(),
            weights,
            endpoint,
            endpoint_cost,
            mode: cfg.step_mode,
            labels,
        })
    }

    pub(crate) fn steps(&self) -> usize {
        self.weights.len()
    }

    pub(crate) fn labels(&self) -> usize {
        self.labels
    }

    pub(crate) fn engine(&self) -> &Engine<'a> {
        &self.engine
    }

    pub(crate) fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub(crate) fn endpoint_offset(&self) -> Option<&[f64]> {
        self.endpoint.as_deref()
    }

    pub(crate) fn endpoint_cost(&self) -> f64 {
        self.endpoint_cost
    }

    pub(crate) fn mode(&self) -> StepMode {
        self.mode
    }

    #[inline]
    pub(crate) fn coordinate(&self, label: usize) -> usize {
        match self.mode {
            StepMode::Continuous => label,
            StepMode::Unit => label / 2,
        }
    }

    #[inline]
    pub(crate) fn sign(label: usize) -> f64 {
        if label % 2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// Labels of a coordinate in continuous mode; of `(index, +1)` in unit mode.
    pub(crate) fn label_of(&self, index: usize, sign: f64) -> usize {
        match self.mode {
            StepMode::Continuous => index,
            StepMode::Unit => 2 * index + usize::from(sign < 0.0),
        }
    }

    /// Weighted objective of the best path with these labels, using the
    /// first `labels.len()` weights. Infeasible candidates score `+∞`.
    /// The step sizes are left in `scratch.deltas`.
    pub(crate) fn evaluate(&self, scratch: &mut Scratch, labels: &[usize]) -> f64 {
        let m = labels.len();
        let weights = &self.weights[..m];
        let full = m == self.steps();
        scratch.idx.clear();
        scratch
            .idx
            .extend(labels.iter().map(|&l| self.coordinate(l)));
        match self.mode {
            StepMode::Continuous => match (&self.endpoint, full) {
                (Some(offset), true) => self
                    .engine
                    .solve_fixed(
                        &mut scratch.ws,
                        &scratch.idx,
                        weights,
                        offset,
                        &mut scratch.deltas,
                    )
                    .unwrap_or(f64::INFINITY),
                _ => self.engine.solve_free(
                    &mut scratch.ws,
                    &scratch.idx,
                    weights,
                    &mut scratch.deltas,
                ),
            },
            StepMode::Unit => {
                scratch.deltas.clear();
                scratch.deltas.extend(labels.iter().map(|&l| Self::sign(l)));
                if let (Some(offset), true) = (&self.endpoint, full) {
                    let mut moved = vec![0.0; self.engine.d()];
                    for (&i, &s) in scratch.idx.iter().zip(&scratch.deltas) {
                        moved[i] += s;
                    }
                    if moved.iter().zip(offset).any(|(a, b)| (a - b).abs() > 1e-9) {
                        return f64::INFINITY;
                    }
                }
                self.engine
                    .evaluate(&mut scratch.ws, &scratch.idx, &scratch.deltas, weights)
            }
        }
    }

    /// Packages the candidate `labels` (already feasible) as a solution.
    pub(crate) fn solution(
        &self,
        labels: &[usize],
        evaluations: u64,
        trace: Vec<f64>,
    ) -> PathSolution {
        let mut scratch = Scratch::default();
        let objective = self.evaluate(&mut scratch, labels);
        let path = build_path(&self.base_model, &scratch.idx, &scratch.deltas);
        PathSolution {
            path,
            indices: IndexVector::from_raw(scratch.idx.clone()),
            deltas: DeltaVector(scratch.deltas.clone()),
            objective,
            evaluations,
            trace,
        }
    }

    /// Greedy labels: each step takes the single move that lowers the cost
    /// the most (ties to the lowest label).
    pub(crate) fn greedy_labels(&self) -> Vec<usize> {
        let stats = self.engine.stats();
        let mut beta = self.engine.base().to_vec();
        let mut out = Vec::with_capacity(self.steps());
        for _ in 0..self.steps() {
            let label = match self.mode {
                StepMode::Continuous => {
                    let current = stats.model(beta.clone()).expect("finite coefficients");
                    match crate::inner::greedy_step(stats, &current) {
                        Ok(step) => {
                            beta[step.index] = step.value;
                            step.index
                        }
                        Err(_) => 0,
                    }
                }
                StepMode::Unit => {
                    let mut best = (f64::INFINITY, 0);
                    for label in 0..self.labels {
                        let i = label / 2;
                        let old = beta[i];
                        beta[i] += Self::sign(label);
                        let c = stats.cost_of(&beta);
                        beta[i] = old;
                        if c < best.0 {
                            best = (c, label);
                        }
                    }
                    beta[best.1 / 2] += Self::sign(best.1);
                    best.1
                }
            };
            out.push(label);
        }
        out
    }
}

/// Orders candidates by objective, then lexicographically by labels.
pub(crate) fn better(a: (f64, &[usize]), b: (f64, &[usize])) -> bool {
    match a.0.partial_cmp(&b.0) {
        Some(std::cmp::Ordering::Less) => true,
        Some(std::cmp::Ordering::Equal) => a.1 < b.1,
        _ => false,
    }
}

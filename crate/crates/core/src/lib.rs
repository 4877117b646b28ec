//! Coordinate-path explanations of linear models.
//!
//! A linear model is explained by a *coordinate path*: a sequence of models
//! starting from a base model (usually zero), each differing from the
//! previous one in a single coefficient. Paths are scored by weighted sums
//! of the costs of their intermediate models, which gives a family of
//! interpretability losses for models. This crate computes optimal and
//! heuristic paths, best explanations of given models, and the Pareto front
//! between predictive cost and interpretability.
//!
//! ```
//! use pathlens::{toy, greedy_path};
//!
//! let stats = toy::stats();
//! let path = greedy_path(&stats, &stats.zero_model(), 2).unwrap();
//! let costs = path.cost_sequence(&stats).unwrap();
//! assert!((costs.values()[0] - 0.42).abs() < 0.005);
//! ```
//!
//! The book in `book/` walks through the concepts; its code samples are
//! compiled and run as doc tests of this crate.

pub mod data;
pub mod error;
pub mod inner;
mod linalg;
pub mod pareto;
pub mod path;
pub mod search;
pub mod stats;
pub mod toy;

pub use data::{load_csv, read_csv, Dataset, Scaling};
pub use error::{Error, Result};
pub use inner::{
    greedy_step, solve_fixed_endpoint, solve_free, DeltaVector, GreedyStep, IndexVector,
    InnerSolution,
};
pub use pareto::{
    expected_cost_path, solve_tradeoff, sweep, ExpectedCostPath, FrontReport, ParetoPoint,
};
pub use path::{model_complexity, CoordinatePath, CostSequence, Step, WeightSchedule};
pub use search::{
    best_explanation, direct_path, exact_path, greedy_path, local_improvement, optimize,
    Explanation, OptimizerConfig, PathSolution, SolverKind, StepMode,
};
pub use stats::{LinearModel, Moments, SufficientStats};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/paths.md")]
    mod paths {}
    #[doc = include_str!("../../../book/src/inner.md")]
    mod inner {}
    #[doc = include_str!("../../../book/src/search.md")]
    mod search {}
    #[doc = include_str!("../../../book/src/tradeoff.md")]
    mod tradeoff {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}

use super::{optimize, OptimizerConfig, SolverKind};
use crate::error::{Error, Result};
use crate::path::{model_complexity, CoordinatePath, WeightSchedule};
use crate::stats::{LinearModel, SufficientStats};

/// The most interpretable path found from a base model to a target model.
#[derive(Debug, Clone, PartialEq)]
pub struct Explanation {
    pub path: CoordinatePath,
    /// Weighted loss of `path`. Only lengths up to the requested maximum are
    /// searched, so this is an upper bound on the loss over paths of any
    /// length.
    pub loss: f64,
}

/// Best explanation of `target` from `base` over lengths
/// `model_complexity(base, target) ..= k_max`, using the exact search.
pub fn best_explanation(
    stats: &SufficientStats,
    base: &LinearModel,
    target: &LinearModel,
    schedule: &WeightSchedule,
    k_max: usize,
) -> Result<Explanation> {
    let template = OptimizerConfig::new(0, schedule.clone());
    explain(stats, base, target, &template, k_max, SolverKind::Exact)
}

/// Like [`best_explanation`], with the optimizer and its settings taken
/// from `template` (its `steps` and `endpoint` are overridden).
pub fn explain(
    stats: &SufficientStats,
    base: &LinearModel,
    target: &LinearModel,
    template: &OptimizerConfig,
    k_max: usize,
    solver: SolverKind,
) -> Result<Explanation> {
    stats.check_dim(base.d())?;
    stats.check_dim(target.d())?;
    let needed = model_complexity(base, target)?;
    if k_max < needed {
        return Err(Error::Infeasible(format!(
            "reaching the target takes at least {needed} steps, but at most {k_max} are allowed"
        )));
    }
    let mut best: Option<Explanation> = None;
    for k in needed..=k_max {
        let explanation = if k == 0 {
            Explanation {
                path: CoordinatePath::empty(base.clone()),
                loss: 0.0,
            }
        } else {
            let mut cfg = template.clone();
            cfg.steps = k;
            cfg.endpoint = Some(target.clone());
            if cfg.batch > k {
                cfg.batch = k;
            }
            match optimize(stats, base, &cfg, solver) {
                Ok(sol) => Explanation {
                    path: sol.path,
                    loss: sol.objective,
                },
                Err(Error::Infeasible(_)) => continue,
                Err(e) => return Err(e),
            }
        };
        if best.as_ref().map_or(true, |b| explanation.loss < b.loss) {
            best = Some(explanation);
        }
    }
    best.ok_or_else(|| {
        Error::Infeasible(format!(
            "no path of at most {k_max} steps reaches the target"
        ))
    })
}

/// Interpretability loss of `target`: the loss of its best explanation of
/// length at most `k_max`, or `+∞` when no such path exists.
pub fn interpretability_loss(
    stats: &SufficientStats,
    base: &LinearModel,
    target: &LinearModel,
    schedule: &WeightSchedule,
    k_max: usize,
) -> Result<f64> {
    match best_explanation(stats, base, target, schedule, k_max) {
        Ok(e) => Ok(e.loss),
        Err(Error::Infeasible(_)) => Ok(f64::INFINITY),
        Err(e) => Err(e),
    }
}

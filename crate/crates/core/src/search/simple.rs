use crate::error::{Error, Result};
use crate::inner::greedy_step;
use crate::path::{model_complexity, CoordinatePath, Step};
use crate::stats::{LinearModel, SufficientStats};

/// Forward stagewise path: `steps` greedy coordinate steps from `base`.
pub fn greedy_path(
    stats: &SufficientStats,
    base: &LinearModel,
    steps: usize,
) -> Result<CoordinatePath> {
    stats.check_dim(base.d())?;
    let mut current = base.clone();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let step = greedy_step(stats, &current)?;
        current.set(step.index, step.value);
        out.push(Step::new(step.index, step.value));
    }
    CoordinatePath::new(base.clone(), out)
}

/// Installs the least-squares coefficients one coordinate at a time. Each
/// step picks, among the coordinates not yet set, the one whose final value
/// gives the lowest immediate cost (ties to the lowest index).
pub fn direct_path(
    stats: &SufficientStats,
    base: &LinearModel,
    steps: usize,
) -> Result<CoordinatePath> {
    stats.check_dim(base.d())?;
    let ols = stats.ols();
    let available = model_complexity(base, &ols)?;
    if steps > available {
        return Err(Error::InvalidConfig(format!(
            "direct path has only {available} coordinates to set, {steps} steps requested"
        )));
    }
    let target = ols.coefficients();
    let mut pending: Vec<usize> = (0..base.d())
        .filter(|&i| base.coefficients()[i] != target[i])
        .collect();
    let mut beta = base.coefficients().to_vec();
    let mut out = Vec::with_capacity(steps);
    for _ in 0..steps {
        let mut best: Option<(usize, f64)> = None;
        for (slot, &i) in pending.iter().enumerate() {
            let old = beta[i];
            beta[i] = target[i];
            let c = stats.cost_of(&beta);
            beta[i] = old;
            if best.map_or(true, |(_, bc)| c < bc) {
                best = Some((slot, c));
            }
        }
        let (slot, _) = best.expect("steps ≤ pending coordinates");
        let i = pending.remove(slot);
        beta[i] = target[i];
        out.push(Step::new(i, target[i]));
    }
    CoordinatePath::new(base.clone(), out)
}

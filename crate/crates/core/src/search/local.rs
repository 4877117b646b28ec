//! Local improvement: repeatedly pick `q` step positions at random and try
//! every reassignment of their coordinates, keeping the best.

use rand::seq::index;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{OptimizerConfig, PathSolution, Scratch, Space};
use crate::error::{Error, Result};
use crate::inner::IndexVector;
use crate::stats::{LinearModel, SufficientStats};

/// A candidate must beat the incumbent by more than this to replace it.
const IMPROVEMENT_TOL: f64 = 1e-12;
/// Candidate scans smaller than this run on the calling thread.
const PARALLEL_MIN: usize = 512;

/// Local improvement heuristic starting from `start` (default: the greedy
/// path's coordinates). Runs `cfg.iterations` iterations with batch size
/// `cfg.batch`; improvements carry over from one iteration to the next.
/// Deterministic for a fixed `cfg.seed`.
pub fn local_improvement(
    stats: &SufficientStats,
    base: &LinearModel,
    start: Option<&IndexVector>,
    cfg: &OptimizerConfig,
) -> Result<PathSolution> {
    let space = Space::new(stats, base, cfg)?;
    let k = space.steps();
    if cfg.batch == 0 {
        return Err(Error::InvalidConfig(
            "batch size q must be at least 1".into(),
        ));
    }
    if k > 0 && cfg.batch > k {
        return Err(Error::InvalidConfig(format!(
            "batch size q = {} exceeds path length K = {k}",
            cfg.batch
        )));
    }
    let start = match start {
        Some(iv) => {
            if iv.len() != k {
                return Err(Error::DimensionMismatch {
                    expected: k,
                    found: iv.len(),
                });
            }
            if let Some(&index) = iv.as_slice().iter().find(|&&i| i >= stats.d()) {
                return Err(Error::IndexOutOfRange {
                    index,
                    dim: stats.d(),
                });
            }
            let greedy = space.greedy_labels();
            // keep the greedy signs in unit mode
            iv.as_slice()
                .iter()
                .zip(greedy)
                .map(|(&i, g)| space.label_of(i, Space::sign(g)))
                .collect()
        }
        None => space.greedy_labels(),
    };
    let mut scratch = Scratch::default();
    let run = improve(
        &space,
        &mut scratch,
        start,
        cfg.batch,
        cfg.iterations,
        cfg.seed,
    );
    if !run.objective.is_finite() {
        return Err(Error::Infeasible(
            "local improvement found no path reaching the endpoint".into(),
        ));
    }
    Ok(space.solution(&run.labels, run.evaluations, run.trace))
}

pub(crate) struct Run {
    pub labels: Vec<usize>,
    pub objective: f64,
    pub evaluations: u64,
    pub trace: Vec<f64>,
}

pub(crate) fn improve(
    space: &Space,
    scratch: &mut Scratch,
    start: Vec<usize>,
    batch: usize,
    iterations: usize,
    seed: u64,
) -> Run {
    let k = space.steps();
    let labels = space.labels();
    let mut current = start;
    let mut objective = space.evaluate(scratch, &current);
    let mut evaluations = 1u64;
    let mut trace = vec![objective];
    if k == 0 {
        return Run {
            labels: current,
            objective,
            evaluations,
            trace,
        };
    }
    let batch = batch.min(k);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let candidates = labels.pow(batch as u32);
    for _ in 0..iterations {
        let mut positions = index::sample(&mut rng, k, batch).into_vec();
        positions.sort_unstable();
        let assign = |code: usize, out: &mut Vec<usize>| {
            out.clear();
            out.extend_from_slice(&current);
            let mut c = code;
            // most significant position first, so codes run lexicographically
            for &p in positions.iter().rev() {
                out[p] = c % labels;
                c /= labels;
            }
        };
        let best = if candidates >= PARALLEL_MIN {
            (0..candidates)
                .into_par_iter()
                .map_init(
                    || (Scratch::default(), Vec::with_capacity(k)),
                    |(s, buf), code| {
                        assign(code, buf);
                        (space.evaluate(s, buf), code)
                    },
                )
                .reduce(|| (f64::INFINITY, usize::MAX), pick)
        } else {
            let mut buf = Vec::with_capacity(k);
            (0..candidates)
                .map(|code| {
                    assign(code, &mut buf);
                    (space.evaluate(scratch, &buf), code)
                })
                .fold((f64::INFINITY, usize::MAX), pick)
        };
        evaluations += candidates as u64;
        if best.0 < objective - IMPROVEMENT_TOL * objective.abs().max(1.0)
            || (objective.is_infinite() && best.0.is_finite())
        {
            let mut next = Vec::with_capacity(k);
            assign(best.1, &mut next);
            current = next;
            objective = best.0;
        }
        trace.push(objective);
    }
    Run {
        labels: current,
        objective,
        evaluations,
        trace,
    }
}

fn pick(a: (f64, usize), b: (f64, usize)) -> (f64, usize) {
    match a.0.total_cmp(&b.0) {
        std::cmp::Ordering::Less => a,
        std::cmp::Ordering::Greater => b,
        std::cmp::Ordering::Equal => {
            if a.1 <= b.1 {
                a
            } else {
                b
            }
        }
    }
}

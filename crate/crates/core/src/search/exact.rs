//! Exact path search by branch and bound over index vectors.
//!
//! A node is a prefix `(i₁, …, i_m)` of the index vector. Its lower bound is
//! the optimal weighted cost of the prefix alone plus, for every later step
//! `k`, `α_k` times the lowest cost any model can have when it differs from
//! the base only on the prefix's coordinates plus `k − m` others. Both parts
//! are valid for every completion, so pruning never discards an optimum.
//! Candidates with equal objective are resolved lexicographically, which
//! keeps the result independent of thread scheduling.

use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};

use rayon::prelude::*;

use super::local::improve;
use super::{better, OptimizerConfig, PathSolution, Scratch, Space, StepMode};
use crate::error::{Error, Result};
use crate::stats::{LinearModel, SufficientStats};

/// Largest dimension for which the subset-cost table is built.
const TABLE_MAX_D: usize = 14;
/// Relative slack before a node is pruned.
const PRUNE_SLACK: f64 = 1e-12;
/// Aim for at least this many independent subtrees.
const FRONTIER_TARGET: usize = 256;

/// Globally optimal path for the configured objective (and endpoint, if
/// set). Fails with [`Error::BudgetExceeded`] after `cfg.budget` inner
/// solves.
pub fn exact_path(
    stats: &SufficientStats,
    base: &LinearModel,
    cfg: &OptimizerConfig,
) -> Result<PathSolution> {
    let space = Space::new(stats, base, cfg)?;
    let k = space.steps();
    if stats.d() > 64 {
        return Err(Error::InvalidConfig(
            "exact search supports at most 64 features".into(),
        ));
    }
    if k == 0 {
        if space
            .endpoint_offset()
            .is_some_and(|o| o.iter().any(|v| *v != 0.0))
        {
            return Err(Error::Infeasible(
                "a path of 0 steps cannot change the model".into(),
            ));
        }
        return Ok(space.solution(&[], 0, Vec::new()));
    }

    let tail = TailBound::new(&space);
    let shared = Shared {
        upper: AtomicU64::new(f64::INFINITY.to_bits()),
        evaluations: AtomicU64::new(0),
        budget: cfg.budget,
        aborted: AtomicBool::new(false),
    };

    // Incumbent from a short local improvement run.
    let mut scratch = Scratch::default();
    let start = space.greedy_labels();
    let warm = improve(&space, &mut scratch, start, 1, 2 * k, cfg.seed);
    shared
        .evaluations
        .fetch_add(warm.evaluations, Ordering::Relaxed);
    shared.offer(warm.objective);
    let incumbent = (warm.objective, warm.labels);

    let frontier = frontier(&space, cfg.skip_repeated);
    let search = Search {
        space: &space,
        tail: &tail,
        shared: &shared,
        skip_repeated: cfg.skip_repeated,
    };
    let best = frontier
        .into_par_iter()
        .map_init(Scratch::default, |scratch, prefix| {
            search.subtree(scratch, prefix)
        })
        .reduce(
            || None,
            |a, b| match (a, b) {
                (Some(a), Some(b)) => Some(if better((b.0, &b.1), (a.0, &a.1)) {
                    b
                } else {
                    a
                }),
                (a, b) => a.or(b),
            },
        );
    if shared.aborted.load(Ordering::Relaxed) {
        return Err(Error::BudgetExceeded { budget: cfg.budget });
    }
    let best = match best {
        Some(found) if better((found.0, &found.1), (incumbent.0, &incumbent.1)) => found,
        _ => incumbent,
    };
    if !best.0.is_finite() {
        return Err(Error::Infeasible(format!(
            "no {k}-step path reaches the requested endpoint"
        )));
    }
    let evaluations = shared.evaluations.load(Ordering::Relaxed);
    Ok(space.solution(&best.1, evaluations, Vec::new()))
}

struct Shared {
    upper: AtomicU64,
    evaluations: AtomicU64,
    budget: u64,
    aborted: AtomicBool,
}

impl Shared {
    fn upper(&self) -> f64 {
        f64::from_bits(self.upper.load(Ordering::Relaxed))
    }

    /// Objectives are nonnegative, so their bit patterns order like the values.
    fn offer(&self, value: f64) {
        if value >= 0.0 {
            self.upper.fetch_min(value.to_bits(), Ordering::Relaxed);
        }
    }

    fn prunes(&self, lower: f64) -> bool {
        let upper = self.upper();
        lower == f64::INFINITY || lower > upper + PRUNE_SLACK * upper
    }

    fn charge(&self) -> bool {
        let used = self.evaluations.fetch_add(1, Ordering::Relaxed) + 1;
        if used > self.budget {
            self.aborted.store(true, Ordering::Relaxed);
        }
        !self.aborted.load(Ordering::Relaxed)
    }
}

type Candidate = (f64, Vec<usize>);

struct Search<'s, 'a> {
    space: &'s Space<'a>,
    tail: &'s TailBound,
    shared: &'s Shared,
    skip_repeated: bool,
}

impl Search<'_, '_> {
    fn subtree(&self, scratch: &mut Scratch, prefix: Vec<usize>) -> Option<Candidate> {
        let k = self.space.steps();
        let mut best: Option<Candidate> = None;
        if prefix.len() == k {
            if !self.shared.charge() {
                return None;
            }
            let value = self.space.evaluate(scratch, &prefix);
            self.shared.offer(value);
            return value.is_finite().then_some((value, prefix));
        }
        if !self.shared.charge() {
            return None;
        }
        let lower = self.lower_bound(scratch, &prefix);
        if self.shared.prunes(lower) {
            return None;
        }
        let mut prefix = prefix;
        self.descend(scratch, &mut prefix, &mut best);
        best
    }

    fn descend(
        &self,
        scratch: &mut Scratch,
        prefix: &mut Vec<usize>,
        best: &mut Option<Candidate>,
    ) {
        let k = self.space.steps();
        let labels = self.space.labels();
        let last = prefix.last().map(|&l| self.space.coordinate(l));
        let leaf = prefix.len() + 1 == k;
        let mut children: Vec<(f64, usize)> = Vec::with_capacity(labels);
        for label in 0..labels {
            if self.skip_repeated && last == Some(self.space.coordinate(label)) {
                continue;
            }
            if !self.shared.charge() {
                return;
            }
            prefix.push(label);
            let value = if leaf {
                self.space.evaluate(scratch, prefix)
            } else {
                self.lower_bound(scratch, prefix)
            };
            if leaf && value.is_finite() {
                self.shared.offer(value);
                if best
                    .as_ref()
                    .map_or(true, |b| better((value, prefix), (b.0, &b.1)))
                {
                    *best = Some((value, prefix.clone()));
                }
            }
            prefix.pop();
            if !leaf && !self.shared.prunes(value) {
                children.push((value, label));
            }
        }
        if leaf {
            return;
        }
        children.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (lower, label) in children {
            if self.shared.prunes(lower) {
                continue;
            }
            prefix.push(label);
            self.descend(scratch, prefix, best);
            prefix.pop();
            if self.shared.aborted.load(Ordering::Relaxed) {
                return;
            }
        }
    }

    fn lower_bound(&self, scratch: &mut Scratch, prefix: &[usize]) -> f64 {
        let space = self.space;
        let k = space.steps();
        let m = prefix.len();
        let mask = prefix
            .iter()
            .fold(0u64, |acc, &l| acc | 1 << space.coordinate(l));
        if let Some(offset) = space.endpoint_offset() {
            let missing = offset
                .iter()
                .enumerate()
                .filter(|&(c, v)| *v != 0.0 && mask >> c & 1 == 0)
                .count();
            if missing > k - m {
                return f64::INFINITY;
            }
            if space.mode() == StepMode::Unit {
                let mut moved = vec![0.0; offset.len()];
                for &l in prefix {
                    moved[space.coordinate(l)] += Space::sign(l);
                }
                let distance: f64 = moved.iter().zip(offset).map(|(a, b)| (a - b).abs()).sum();
                if distance > (k - m) as f64 + 1e-9 {
                    return f64::INFINITY;
                }
            }
        }
        let head = space.evaluate(scratch, prefix);
        let weights = space.weights();
        let rest: f64 = (m + 1..=k)
            .map(|step| {
                let floor = if step == k && space.endpoint_offset().is_some() {
                    space.endpoint_cost()
                } else {
                    self.tail.min_cost(mask, step - m)
                };
                weights[step - 1] * floor
            })
            .sum();
        head + rest
    }
}

/// Prefixes at the shallowest depth with at least `FRONTIER_TARGET` nodes.
fn frontier(space: &Space, skip_repeated: bool) -> Vec<Vec<usize>> {
    let mut level: Vec<Vec<usize>> = vec![Vec::new()];
    while level.len() < FRONTIER_TARGET && level[0].len() < space.steps() {
        level = level
            .into_iter()
            .flat_map(|prefix| {
                (0..space.labels()).filter_map(move |label| {
                    let last = prefix.last().map(|&l| space.coordinate(l));
                    if skip_repeated && last == Some(space.coordinate(label)) {
                        return None;
                    }
                    let mut next = prefix.clone();
                    next.push(label);
                    Some(next)
                })
            })
            .collect();
    }
    level
}

/// `min_cost(mask, r)`: the lowest cost of a model differing from the base
/// only on `mask` plus at most `r` further coordinates.
struct TailBound {
    d: usize,
    table: Option<Vec<f64>>,
    floor: f64,
}

impl TailBound {
    fn new(space: &Space) -> Self {
        let engine = space.engine();
        let stats = engine.stats();
        let base = engine.base();
        let d = engine.d();
        let all = if d == 64 { u64::MAX } else { (1u64 << d) - 1 };
        let floor = stats.restricted_optimum(base, all);
        if d > TABLE_MAX_D {
            return Self {
                d,
                table: None,
                floor,
            };
        }
        let n = 1usize << d;
        let width = d + 1;
        let exact: Vec<f64> = (0..n as u64)
            .into_par_iter()
            .map(|mask| stats.restricted_optimum(base, mask))
            .collect();
        let mut table = vec![f64::INFINITY; n * width];
        // supersets first: decreasing popcount
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|m| std::cmp::Reverse(m.count_ones()));
        for &mask in &order {
            table[mask * width] = exact[mask];
            for r in 1..width {
                let mut v = exact[mask];
                for j in 0..d {
                    if mask >> j & 1 == 0 {
                        v = v.min(table[(mask | 1 << j) * width + r - 1]);
                    }
                }
                table[mask * width + r] = v;
            }
        }
        Self {
            d,
            table: Some(table),
            floor,
        }
    }

    fn min_cost(&self, mask: u64, extra: usize) -> f64 {
        match &self.table {
            Some(table) => table[mask as usize * (self.d + 1) + extra.min(self.d)],
            None => self.floor,
        }
    }
}

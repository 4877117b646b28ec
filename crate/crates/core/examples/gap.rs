//! Exact search versus local improvement on random instances shaped like a
//! small survey table (100 rows, 6 features, paths of 10 steps).
//!
//! ```text
//! cargo run --release -p pathlens --example gap -- [instances] [T for q=1] [T for q=2]
//! ```

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use pathlens::{
    exact_path, local_improvement, Dataset, OptimizerConfig, SufficientStats, WeightSchedule,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn instance(seed: u64) -> SufficientStats {
    let (n, d) = (100, 6);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut x = DMatrix::zeros(n, d);
    for r in 0..n {
        let factor: f64 = rng.sample(StandardNormal);
        for c in 0..4 {
            let e: f64 = rng.sample(StandardNormal);
            x[(r, c)] = 0.8 * factor + 0.6 * e;
        }
        let group = rng.gen_range(0..3);
        x[(r, 4)] = f64::from(group == 1);
        x[(r, 5)] = f64::from(group == 2);
    }
    let beta: Vec<f64> = (0..d)
        .map(|_| rng.sample::<f64, _>(StandardNormal))
        .collect();
    let y = DVector::from_fn(n, |r, _| {
        (0..d).map(|c| x[(r, c)] * beta[c]).sum::<f64>()
            + 0.7 * rng.sample::<f64, _>(StandardNormal)
    });
    let names = (1..=d).map(|i| format!("x{i}")).collect();
    let ds = Dataset::new(x, y, names).unwrap();
    SufficientStats::from_dataset(&ds.standardize().unwrap().0)
}

fn main() {
    let arg = |i: usize, default: usize| {
        std::env::args()
            .nth(i)
            .and_then(|a| a.parse().ok())
            .unwrap_or(default)
    };
    let (count, t1, t2) = (arg(1, 20) as u64, arg(2, 100), arg(3, 400));
    let schedule = WeightSchedule::geometric(1.0).unwrap();
    for seed in 0..count {
        let stats = instance(seed);
        let base = stats.zero_model();
        let cfg = OptimizerConfig::new(10, schedule.clone()).with_seed(seed);
        let t = Instant::now();
        let exact = exact_path(&stats, &base, &cfg).unwrap();
        let te = t.elapsed();
        let mut line = format!(
            "seed {seed:2}: exact {:.6} ({:>7} solves, {:>8.1?})",
            exact.objective, exact.evaluations, te
        );
        for (q, iterations) in [(1, t1), (2, t2)] {
            let cfg = cfg.clone().with_batch(q).with_iterations(iterations);
            let t = Instant::now();
            let local = local_improvement(&stats, &base, None, &cfg).unwrap();
            let tl = t.elapsed();
            let gap = 100.0 * (local.objective - exact.objective) / exact.objective;
            line += &format!("  q={q}: gap {gap:.4}% ({tl:.1?})");
        }
        println!("{line}");
    }
}

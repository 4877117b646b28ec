mod common;

use common::{index_vectors, normal, quad, random_stats, rng};
use nalgebra::DMatrix;
use pathlens::pareto::log_grid;
use pathlens::{
    direct_path, exact_path, expected_cost_path, greedy_path, greedy_step, local_improvement,
    solve_fixed_endpoint, solve_free, solve_tradeoff, sweep, toy, Dataset, IndexVector,
    OptimizerConfig, SolverKind, StepMode, SufficientStats, WeightSchedule,
};
use rand::Rng;

fn gamma(g: f64) -> WeightSchedule {
    WeightSchedule::geometric(g).unwrap()
}

#[test]
fn greedy_step_matches_coordinate_grid_search() {
    for seed in 0..5 {
        let s = random_stats(seed, 4);
        let mut r = rng(seed);
        let current: Vec<f64> = (0..4).map(|_| normal(&mut r)).collect();
        let step = greedy_step(&s, &common::model(&s, current.clone())).unwrap();
        // 10⁴ points per coordinate around the current value
        let mut best = (f64::INFINITY, 0, 0.0);
        for i in 0..4 {
            let mut beta = current.clone();
            for n in 0..10_000 {
                beta[i] = current[i] - 5.0 + 10.0 * n as f64 / 9_999.0;
                let c = quad(&s, &beta);
                if c < best.0 {
                    best = (c, i, beta[i]);
                }
            }
        }
        assert!(step.cost <= best.0 + 1e-12);
        assert!(best.0 - step.cost <= 1e-5, "{} vs {}", best.0, step.cost);
        assert_eq!(step.index, best.1);
        assert!((step.value - best.2).abs() <= 2e-3);
    }
}

#[test]
fn greedy_path_follows_greedy_steps() {
    let s = toy::stats();
    let path = greedy_path(&s, &s.zero_model(), 2).unwrap();
    let costs = path.cost_sequence(&s).unwrap();
    assert_eq!(path.steps()[0].index, 0);
    assert!((path.steps()[0].value - 1.274).abs() < 1e-12);
    assert!((costs.values()[0] - 0.42).abs() <= 0.005);
    assert!((costs.values()[1] - 0.39).abs() <= 0.005);
}

#[test]
fn exact_search_matches_enumeration_of_index_vectors() {
    for seed in 0..4 {
        let s = random_stats(seed, 3);
        let schedule = gamma([1.0, 0.5, 2.0, 1.0][seed as usize]);
        for k in 1..=4 {
            let cfg = OptimizerConfig::new(k, schedule.clone());
            let exact = exact_path(&s, &s.zero_model(), &cfg).unwrap();
            let best = index_vectors(3, k)
                .into_iter()
                .map(|iv| {
                    let iv = IndexVector::new(iv, 3).unwrap();
                    solve_free(&s, &s.zero_model(), &iv, &schedule)
                        .unwrap()
                        .objective
                })
                .fold(f64::INFINITY, f64::min);
            assert!(
                (exact.objective - best).abs() <= 1e-10 * best,
                "seed {seed} K {k}"
            );
        }
    }
}

#[test]
fn exact_search_with_endpoint_matches_enumeration() {
    for seed in 0..3 {
        let s = random_stats(seed, 3);
        let target = s.ols();
        for k in 3..=5 {
            let cfg = OptimizerConfig::new(k, gamma(1.0)).with_endpoint(target.clone());
            let exact = exact_path(&s, &s.zero_model(), &cfg).unwrap();
            let best = index_vectors(3, k)
                .into_iter()
                .filter_map(|iv| {
                    let iv = IndexVector::new(iv, 3).unwrap();
                    solve_fixed_endpoint(&s, &s.zero_model(), &iv, &gamma(1.0), &target)
                        .ok()
                        .map(|sol| sol.objective)
                })
                .fold(f64::INFINITY, f64::min);
            assert!((exact.objective - best).abs() <= 1e-10 * best);
            let end = exact.path.final_model();
            for (a, b) in end.coefficients().iter().zip(target.coefficients()) {
                assert!((a - b).abs() <= 1e-8);
            }
        }
    }
}

#[test]
fn exact_search_beats_random_search() {
    let s = random_stats(11, 3);
    let alpha = [1.0, 1.0, 1.0];
    let cfg = OptimizerConfig::new(3, gamma(1.0));
    let exact = exact_path(&s, &s.zero_model(), &cfg).unwrap();
    let mut r = rng(11);
    let mut sampled = f64::INFINITY;
    for _ in 0..100_000 {
        let iv: Vec<usize> = (0..3).map(|_| r.gen_range(0..3)).collect();
        let delta: Vec<f64> = (0..3).map(|_| 1.5 * normal(&mut r)).collect();
        sampled = sampled.min(common::path_objective(&s, &[0.0; 3], &iv, &alpha, &delta));
    }
    assert!(exact.objective <= sampled);
}

#[test]
fn exact_search_is_exhaustive_in_unit_mode() {
    let s = random_stats(5, 3);
    let cfg = OptimizerConfig::new(4, gamma(1.0)).with_step_mode(StepMode::Unit);
    let exact = exact_path(&s, &s.zero_model(), &cfg).unwrap();
    let mut best = f64::INFINITY;
    for iv in index_vectors(3, 4) {
        for signs in 0..16u32 {
            let delta: Vec<f64> = (0..4)
                .map(|k| if signs >> k & 1 == 1 { -1.0 } else { 1.0 })
                .collect();
            best = best.min(common::path_objective(
                &s, &[0.0; 3], &iv, &[1.0; 4], &delta,
            ));
        }
    }
    assert!((exact.objective - best).abs() <= 1e-12 * best.max(1.0));
    for step in exact.path.steps() {
        assert_eq!(step.value.fract(), 0.0);
    }
}

#[test]
fn budget_is_enforced() {
    let s = random_stats(2, 6);
    let cfg = OptimizerConfig::new(8, gamma(1.0)).with_budget(50);
    assert!(matches!(
        exact_path(&s, &s.zero_model(), &cfg),
        Err(pathlens::Error::BudgetExceeded { .. })
    ));
}

#[test]
fn local_improvement_never_beats_exact() {
    for seed in 0..5 {
        let s = random_stats(seed, 4);
        let cfg = OptimizerConfig::new(5, gamma(1.0)).with_seed(seed);
        let exact = exact_path(&s, &s.zero_model(), &cfg).unwrap();
        let local =
            local_improvement(&s, &s.zero_model(), None, &cfg.clone().with_batch(2)).unwrap();
        assert!(exact.objective <= local.objective * (1.0 + 1e-12));
        assert!(local.trace.windows(2).all(|w| w[1] <= w[0]));
        // a full-width batch scans every index vector in one iteration
        let full = local_improvement(
            &s,
            &s.zero_model(),
            None,
            &cfg.clone().with_batch(5).with_iterations(1),
        )
        .unwrap();
        assert!((full.objective - exact.objective).abs() <= 1e-10 * exact.objective);
    }
}

#[test]
fn standardized_fit_recovers_raw_fit_with_intercept() {
    let ds = common::correlated_dataset(3, 60, 3, 0.4, 0.5);
    let raw = ds.with_intercept_column("intercept").unwrap();
    let direct = common::normal_equations(raw.features(), raw.target());
    let (z, scaling) = ds.standardize().unwrap();
    let fit = SufficientStats::from_dataset(&z).ols();
    let (slopes, intercept) = scaling.unstandardize(&fit).unwrap();
    for j in 0..3 {
        assert!((slopes[j] - direct[j]).abs() <= 1e-9 * direct[j].abs().max(1.0));
    }
    assert!((intercept - direct[3]).abs() <= 1e-9 * direct[3].abs().max(1.0));
}

#[test]
fn standardized_columns_have_unit_variance() {
    let x = DMatrix::from_row_slice(3, 1, &[1.0, 2.0, 3.0]);
    let ds = Dataset::new(
        x,
        nalgebra::DVector::from_vec(vec![1.0, 0.0, 2.0]),
        vec!["a".into()],
    )
    .unwrap();
    let (z, _) = ds.standardize().unwrap();
    let col = z.features().column(0);
    assert!(col.mean().abs() < 1e-15);
    assert!((col.map(|v| v * v).mean() - 1.0).abs() < 1e-15);
    let constant = Dataset::new(
        DMatrix::from_element(3, 1, 5.0),
        nalgebra::DVector::from_vec(vec![1.0, 0.0, 2.0]),
        vec!["c".into()],
    )
    .unwrap();
    assert!(matches!(constant.standardize(), Err(pathlens::Error::ZeroVariance(c)) if c == "c"));
}

#[test]
fn hand_computed_moments() {
    let ds = Dataset::new(
        DMatrix::identity(2, 2),
        nalgebra::DVector::from_vec(vec![1.0, 1.0]),
        vec!["a".into(), "b".into()],
    )
    .unwrap();
    let s = SufficientStats::from_dataset(&ds);
    assert_eq!(
        s.gram(),
        &DMatrix::from_row_slice(2, 2, &[0.5, 0.0, 0.0, 0.5])
    );
    assert_eq!(s.cross().as_slice(), &[0.5, 0.5]);
}

#[test]
fn explanations_need_exactly_the_support_size() {
    let s = random_stats(9, 3);
    let targets = [
        vec![0.0, 0.0, 0.0],
        vec![0.7, 0.0, 0.0],
        vec![0.0, -1.1, 0.4],
        vec![0.3, 0.2, -0.5],
    ];
    for t in targets {
        let target = common::model(&s, t.clone());
        let nnz = t.iter().filter(|v| **v != 0.0).count();
        let shortest = (0..=4)
            .find(|&k| {
                k == 0 && nnz == 0
                    || k > 0
                        && index_vectors(3, k).into_iter().any(|iv| {
                            let iv = IndexVector::new(iv, 3).unwrap();
                            solve_fixed_endpoint(&s, &s.zero_model(), &iv, &gamma(1.0), &target)
                                .is_ok()
                        })
            })
            .unwrap();
        assert_eq!(shortest, nnz);
        assert_eq!(
            pathlens::model_complexity(&s.zero_model(), &target).unwrap(),
            nnz
        );
    }
}

#[test]
fn two_step_paths_trade_early_for_late_cost() {
    // weighting the second step more moves the path from the greedy shape
    // towards the least-squares endpoint
    let s = toy::stats();
    let iv = IndexVector::new(vec![0, 1], 2).unwrap();
    let mut last = (0.0, f64::INFINITY);
    for w in [0.01, 0.1, 0.5, 1.0, 2.0, 10.0, 100.0] {
        let schedule = WeightSchedule::explicit(vec![1.0, w]).unwrap();
        let sol = solve_free(&s, &s.zero_model(), &iv, &schedule).unwrap();
        let costs = sol.path(&s.zero_model(), &iv).cost_sequence(&s).unwrap();
        let (c1, c2) = (costs.values()[0], costs.values()[1]);
        assert!(c1 >= last.0 - 1e-12 && c2 <= last.1 + 1e-12);
        last = (c1, c2);
    }
    let greedy_like = solve_free(
        &s,
        &s.zero_model(),
        &iv,
        &WeightSchedule::explicit(vec![1.0, 1e-9]).unwrap(),
    )
    .unwrap();
    let c = greedy_like
        .path(&s.zero_model(), &iv)
        .cost_sequence(&s)
        .unwrap();
    assert!((c.values()[0] - 0.4169).abs() < 1e-3);
    let direct_like = solve_free(
        &s,
        &s.zero_model(),
        &iv,
        &WeightSchedule::explicit(vec![0.0, 1.0]).unwrap(),
    )
    .unwrap();
    let c = direct_like
        .path(&s.zero_model(), &iv)
        .cost_sequence(&s)
        .unwrap();
    assert!((c.values()[1] - s.cost(&s.ols()).unwrap()).abs() < 1e-9);
}

#[test]
fn last_step_weight_reaches_least_squares() {
    let s = random_stats(4, 4);
    let iv = IndexVector::new(vec![2, 0, 3, 1], 4).unwrap();
    let schedule = WeightSchedule::explicit(vec![0.0, 0.0, 0.0, 1.0]).unwrap();
    let sol = solve_free(&s, &s.zero_model(), &iv, &schedule).unwrap();
    let end = sol.path(&s.zero_model(), &iv).final_model();
    for (a, b) in end.coefficients().iter().zip(s.ols().coefficients()) {
        assert!((a - b).abs() <= 1e-6);
    }
}

#[test]
fn sweep_is_monotone_in_lambda() {
    let s = random_stats(21, 3);
    let cfg = OptimizerConfig::new(0, gamma(1.0));
    let lambdas = log_grid(1e-3, 1e3, 25).unwrap();
    let report = sweep(&s, &s.zero_model(), &cfg, &lambdas, 3, SolverKind::Exact).unwrap();
    // grid ascending: cost rises and loss falls as lambda grows
    for w in report.solutions.windows(2) {
        assert!(w[1].cost >= w[0].cost - 1e-10);
        assert!(w[1].interp_loss <= w[0].interp_loss + 1e-10);
    }
    let zero = solve_tradeoff(&s, &s.zero_model(), &cfg, 0.0, 3, SolverKind::Exact).unwrap();
    assert!((zero.cost - s.cost(&s.ols()).unwrap()).abs() <= 1e-6);
}

#[test]
fn expected_cost_paths() {
    let s = toy::stats();
    let cfg = OptimizerConfig::new(0, gamma(1.0));
    let two =
        expected_cost_path(&s, &s.zero_model(), &[0.5, 0.5], &cfg, SolverKind::Exact).unwrap();
    assert!(two.expected_cost <= (0.4169 + 0.3875) / 2.0);
    // a point mass on the last step is the final-cost problem
    let mass = expected_cost_path(
        &s,
        &s.zero_model(),
        &[0.0, 0.0, 1.0],
        &cfg,
        SolverKind::Exact,
    )
    .unwrap();
    let last = exact_path(
        &s,
        &s.zero_model(),
        &OptimizerConfig::new(3, WeightSchedule::explicit(vec![0.0, 0.0, 1.0]).unwrap()),
    )
    .unwrap();
    assert!((mass.expected_cost - last.objective).abs() <= 1e-12);

    let wide = random_stats(30, 7);
    let uniform = WeightSchedule::uniform(7).unwrap();
    let p = uniform.weights(7).unwrap();
    let best = expected_cost_path(
        &wide,
        &wide.zero_model(),
        &p,
        &cfg.clone().with_batch(2).with_iterations(60),
        SolverKind::Local,
    )
    .unwrap();
    let direct = direct_path(&wide, &wide.zero_model(), 7).unwrap();
    assert!(best.expected_cost <= direct.weighted_loss(&wide, &uniform).unwrap());
}

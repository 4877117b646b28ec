mod common;

use common::{fd_gradient, normal, path_objective, quad, random_stats, rng};
use pathlens::inner::system;
use pathlens::{
    solve_fixed_endpoint, solve_free, CoordinatePath, IndexVector, LinearModel, Step,
    SufficientStats, WeightSchedule,
};
use proptest::prelude::*;
use rand::Rng;

fn random_beta(r: &mut rand_chacha::ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| 2.0 * normal(r)).collect()
}

fn random_iv(r: &mut rand_chacha::ChaCha8Rng, d: usize, k: usize) -> IndexVector {
    IndexVector::new((0..k).map(|_| r.gen_range(0..d)).collect(), d).unwrap()
}

fn random_weights(r: &mut rand_chacha::ChaCha8Rng, k: usize) -> Vec<f64> {
    let mut w: Vec<f64> = (0..k)
        .map(|_| {
            if r.gen_bool(0.2) {
                0.0
            } else {
                r.gen_range(0.0..2.0)
            }
        })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[k - 1] = 1.0;
    }
    w
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cost_is_convex(seed in any::<u64>(), t in 0.0f64..=1.0) {
        let s = random_stats(seed, 4);
        let mut r = rng(seed ^ 1);
        let (a, b) = (random_beta(&mut r, 4), random_beta(&mut r, 4));
        let mid: Vec<f64> = a.iter().zip(&b).map(|(x, y)| t * x + (1.0 - t) * y).collect();
        prop_assert!(s.cost_of(&mid) <= t * s.cost_of(&a) + (1.0 - t) * s.cost_of(&b) + 1e-9);
    }

    #[test]
    fn moments_cost_equals_residual_mse(seed in any::<u64>()) {
        let ds = common::correlated_dataset(seed, 20, 4, 0.5, 1.0);
        let s = SufficientStats::from_dataset(&ds);
        prop_assert_eq!(s.cost(&s.zero_model()).unwrap(), s.target_second_moment());
        let mut r = rng(seed);
        let beta = random_beta(&mut r, 4);
        let direct = ds.residual_mse(&beta).unwrap();
        let via = s.cost_of(&beta);
        prop_assert!((direct - via).abs() <= 1e-9 * direct.abs().max(1e-12));
    }

    #[test]
    fn gradient_matches_finite_differences(seed in any::<u64>()) {
        let s = random_stats(seed, 5);
        let mut r = rng(seed);
        let beta = random_beta(&mut r, 5);
        let analytic = s.gradient(&common::model(&s, beta.clone())).unwrap();
        let numeric = fd_gradient(&|b| quad(&s, b), &beta, 1e-4);
        let scale = analytic.iter().map(|v| v.abs()).fold(1e-8, f64::max);
        for (a, n) in analytic.iter().zip(&numeric) {
            prop_assert!((a - n).abs() <= 1e-5 * scale, "{} vs {}", a, n);
        }
    }

    #[test]
    fn least_squares_beats_random_probes(seed in any::<u64>()) {
        let s = random_stats(seed, 4);
        let best = s.cost(&s.ols()).unwrap();
        let grad = s.gradient(&s.ols()).unwrap();
        prop_assert!(grad.iter().map(|v| v * v).sum::<f64>().sqrt() <= 1e-8);
        let mut r = rng(seed);
        for _ in 0..100 {
            prop_assert!(best <= s.cost_of(&random_beta(&mut r, 4)) + 1e-12);
        }
    }

    #[test]
    fn inner_system_is_psd(seed in any::<u64>(), k in 1usize..7) {
        let s = random_stats(seed, 4);
        let mut r = rng(seed);
        let iv = random_iv(&mut r, 4, k);
        let w = random_weights(&mut r, k);
        let (h, _) = system(&s, &s.zero_model(), &iv, &w).unwrap();
        prop_assert!((h.clone() - h.transpose()).abs().max() <= 1e-14);
        let eig = h.symmetric_eigenvalues();
        let top = eig.max().abs().max(1.0);
        prop_assert!(eig.min() >= -1e-10 * top, "eigenvalues {}", eig);
    }

    #[test]
    fn free_solution_is_a_global_minimum(seed in any::<u64>(), k in 1usize..7) {
        let s = random_stats(seed, 4);
        let mut r = rng(seed);
        let base = random_beta(&mut r, 4);
        let iv = random_iv(&mut r, 4, k);
        let w = random_weights(&mut r, k);
        let schedule = WeightSchedule::explicit(w.clone()).unwrap();
        let base_model = common::model(&s, base.clone());
        let sol = solve_free(&s, &base_model, &iv, &schedule).unwrap();
        let f = |delta: &[f64]| path_objective(&s, &base, iv.as_slice(), &w, delta);
        let direct = f(sol.deltas.as_slice());
        prop_assert!((direct - sol.objective).abs() <= 1e-9 * direct.abs().max(1e-12));
        let via_api = pathlens::inner::objective(&s, &base_model, &iv, &sol.deltas, &w).unwrap();
        prop_assert!((via_api - direct).abs() <= 1e-9 * direct.abs().max(1e-12));
        for g in fd_gradient(&f, sol.deltas.as_slice(), 1e-4) {
            prop_assert!(g.abs() <= 1e-7, "gradient entry {}", g);
        }
        for _ in 0..100 {
            let probe: Vec<f64> = (0..k).map(|_| 1.5 * normal(&mut r)).collect();
            prop_assert!(sol.objective <= f(&probe) + 1e-12);
        }
    }

    #[test]
    fn fixed_endpoint_solution_is_feasible_and_stationary(seed in any::<u64>(), k in 3usize..7) {
        let s = random_stats(seed, 3);
        let mut r = rng(seed);
        let base = random_beta(&mut r, 3);
        // every coordinate appears at least once
        let mut idx: Vec<usize> = (0..k).map(|_| r.gen_range(0..3)).collect();
        idx[..3].copy_from_slice(&[0, 1, 2]);
        let iv = IndexVector::new(idx.clone(), 3).unwrap();
        let w = random_weights(&mut r, k);
        let schedule = WeightSchedule::explicit(w.clone()).unwrap();
        let target = random_beta(&mut r, 3);
        let sol = solve_fixed_endpoint(
            &s,
            &common::model(&s, base.clone()),
            &iv,
            &schedule,
            &common::model(&s, target.clone()),
        )
        .unwrap();
        let end = sol.path(&common::model(&s, base.clone()), &iv).final_model();
        for (e, t) in end.coefficients().iter().zip(&target) {
            prop_assert!((e - t).abs() <= 1e-8);
        }
        // stationary on the constraint set: equal partials within each coordinate
        let f = |delta: &[f64]| path_objective(&s, &base, &idx, &w, delta);
        let grad = fd_gradient(&f, sol.deltas.as_slice(), 1e-4);
        for c in 0..3 {
            let group: Vec<f64> = (0..k).filter(|&j| idx[j] == c).map(|j| grad[j]).collect();
            for g in &group {
                prop_assert!((g - group[0]).abs() <= 1e-7, "{:?}", group);
            }
        }
        prop_assert!((f(sol.deltas.as_slice()) - sol.objective).abs() <= 1e-9 * sol.objective.max(1e-12));
    }

    #[test]
    fn path_json_round_trips(seed in any::<u64>(), k in 0usize..6) {
        let s = random_stats(seed, 3);
        let mut r = rng(seed);
        let base = common::model(&s, random_beta(&mut r, 3).iter().map(|v| v / 3.0).collect());
        let steps = (0..k).map(|_| Step::new(r.gen_range(0..3), normal(&mut r) / 7.0)).collect();
        let path = CoordinatePath::new(base, steps).unwrap();
        let text = path.to_json();
        let back = CoordinatePath::from_json(&text, s.feature_names()).unwrap();
        prop_assert_eq!(&back, &path);
        prop_assert_eq!(back.to_json(), text);
        let m = path.final_model();
        prop_assert_eq!(LinearModel::from_json(&m.to_json()).unwrap().to_json(), m.to_json());
    }
}

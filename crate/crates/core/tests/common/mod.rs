//! Instance generators and independent reference computations shared by the
//! integration tests. The references deliberately avoid the crate's solvers:
//! they work from the raw quadratic form or from plain enumeration.

#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use pathlens::{Dataset, LinearModel, SufficientStats};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

/// Gaussian design with columns sharing a common factor (correlation about
/// `rho`), and a noisy linear target.
pub fn correlated_dataset(seed: u64, n: usize, d: usize, rho: f64, noise: f64) -> Dataset {
    let mut r = rng(seed);
    let (a, b) = (rho.sqrt(), (1.0 - rho).sqrt());
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        let f = normal(&mut r);
        for j in 0..d {
            x[(i, j)] = a * f + b * normal(&mut r) + 0.5 * j as f64;
        }
    }
    let beta: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
    let y = DVector::from_fn(n, |i, _| {
        (0..d).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + noise * normal(&mut r)
    });
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    Dataset::new(x, y, names).unwrap()
}

pub fn random_stats(seed: u64, d: usize) -> SufficientStats {
    let ds = correlated_dataset(seed, 40, d, 0.6, 0.8);
    SufficientStats::from_dataset(&ds.standardize().unwrap().0)
}

/// Standardized instance shaped like a small survey table: four correlated
/// continuous features and a three-level category coded as two indicators.
pub fn survey_like(seed: u64) -> SufficientStats {
    let (n, d) = (100, 6);
    let mut r = rng(seed);
    let mut x = DMatrix::zeros(n, d);
    for i in 0..n {
        let f = normal(&mut r);
        for j in 0..4 {
            x[(i, j)] = 0.8 * f + 0.6 * normal(&mut r);
        }
        let group = r.gen_range(0..3);
        x[(i, 4)] = f64::from(group == 1);
        x[(i, 5)] = f64::from(group == 2);
    }
    let beta: Vec<f64> = (0..d).map(|_| normal(&mut r)).collect();
    let y = DVector::from_fn(n, |i, _| {
        (0..d).map(|j| x[(i, j)] * beta[j]).sum::<f64>() + 0.7 * normal(&mut r)
    });
    let names = (1..=d).map(|j| format!("x{j}")).collect();
    let ds = Dataset::new(x, y, names).unwrap();
    SufficientStats::from_dataset(&ds.standardize().unwrap().0)
}

/// `tsm − 2βᵀg + βᵀGβ`, written out from the raw moments.
pub fn quad(stats: &SufficientStats, beta: &[f64]) -> f64 {
    let (g, c) = (stats.gram(), stats.cross());
    let d = beta.len();
    let mut v = stats.target_second_moment();
    for i in 0..d {
        v -= 2.0 * beta[i] * c[i];
        for j in 0..d {
            v += beta[i] * g[(i, j)] * beta[j];
        }
    }
    v
}

/// `Σ α_k c(β_k)` for the path `base + Σ_{j≤k} δ_j e_{i_j}`.
pub fn path_objective(
    stats: &SufficientStats,
    base: &[f64],
    iv: &[usize],
    alpha: &[f64],
    delta: &[f64],
) -> f64 {
    let mut beta = base.to_vec();
    let mut total = 0.0;
    for k in 0..iv.len() {
        beta[iv[k]] += delta[k];
        total += alpha[k] * quad(stats, &beta);
    }
    total
}

pub fn fd_gradient(f: &dyn Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            probe[i] = x[i] + h;
            let up = f(&probe);
            probe[i] = x[i] - h;
            let down = f(&probe);
            probe[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}

/// Accelerated gradient descent with finite-difference gradients, Armijo
/// backtracking and restarts. Returns the best point and value seen.
pub fn fd_minimize(f: &dyn Fn(&[f64]) -> f64, x0: &[f64], iterations: usize) -> (Vec<f64>, f64) {
    let h = 1e-5;
    let mut x = x0.to_vec();
    let mut y = x.clone();
    let mut fx = f(&x);
    let mut step = 1.0;
    let mut t = 1.0f64;
    let mut stalled = 0;
    for _ in 0..iterations {
        if stalled >= 100 {
            break;
        }
        let gy = fd_gradient(f, &y, h);
        let gnorm2: f64 = gy.iter().map(|v| v * v).sum();
        if gnorm2 < 1e-26 {
            break;
        }
        let fy = f(&y);
        let mut candidate;
        loop {
            candidate = y
                .iter()
                .zip(&gy)
                .map(|(a, g)| a - step * g)
                .collect::<Vec<_>>();
            if f(&candidate) <= fy - 0.5 * step * gnorm2 || step < 1e-14 {
                break;
            }
            step *= 0.5;
        }
        let fc = f(&candidate);
        if fc > fx {
            // restart momentum
            y = x.clone();
            t = 1.0;
            step *= 2.0;
            stalled += 1;
            continue;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        y = candidate
            .iter()
            .zip(&x)
            .map(|(c, p)| c + (t - 1.0) / t_next * (c - p))
            .collect();
        stalled = if fx - fc <= 1e-15 * fx.abs() {
            stalled + 1
        } else {
            0
        };
        x = candidate;
        fx = fc;
        t = t_next;
        step *= 1.5;
    }
    (x, fx)
}

/// All index vectors in `{0..d}^k`, lexicographically.
pub fn index_vectors(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..d).map(move |i| {
                    let mut w = v.clone();
                    w.push(i);
                    w
                })
            })
            .collect();
    }
    out
}

/// Least-squares coefficients of `y` on the columns of `x` through the
/// normal equations, solved by nalgebra's LU.
pub fn normal_equations(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
    let xtx = x.transpose() * x;
    let xty = x.transpose() * y;
    xtx.lu().solve(&xty).expect("full-rank design")
}

pub fn model(stats: &SufficientStats, coefficients: Vec<f64>) -> LinearModel {
    stats.model(coefficients).unwrap()
}

pub fn rel_gap(value: f64, reference: f64) -> f64 {
    (value - reference) / reference.abs().max(1e-300)
}

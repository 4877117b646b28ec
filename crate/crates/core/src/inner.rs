//! Exact solves of the inner problem: for a fixed sequence of step
//! coordinates, choose the step sizes minimizing the weighted path cost.
//!
//! With `β_k = β₀ + Σ_{j≤k} δ_j e_{i_j}` the objective
//! `C(δ) = Σ_k α_k c(β_k)` is a convex quadratic in `δ`. Writing
//! `w_j = Σ_{m≥j} α_m` for the tail sums of the weights, its stationarity
//! conditions are the `K × K` system `H δ = b` with
//!
//! ```text
//! H_jl = w_max(j,l) · G[i_j, i_l]
//! b_j  = w_j · (g − Gβ₀)[i_j]
//! ```
//!
//! When the endpoint is fixed, each coordinate `c` touched by the path
//! carries the linear constraint `Σ_{j: i_j = c} δ_j = (β_target − β₀)_c`.
//! The last step on each coordinate is eliminated through its constraint and
//! the remaining free step sizes solve the reduced (null-space) system.
//! Singular systems get the minimum-norm solution.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::path::{CoordinatePath, Step, WeightSchedule};
use crate::stats::{LinearModel, SufficientStats};

/// The coordinate changed at each step (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexVector(Vec<usize>);

impl IndexVector {
    pub fn new(indices: Vec<usize>, d: usize) -> Result<Self> {
        if let Some(&index) = indices.iter().find(|&&i| i >= d) {
            return Err(Error::IndexOutOfRange { index, dim: d });
        }
        Ok(Self(indices))
    }

    pub(crate) fn from_raw(indices: Vec<usize>) -> Self {
        Self(indices)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The coordinates a path visits, in step order.
    pub fn of_path(path: &CoordinatePath) -> Self {
        Self(path.steps().iter().map(|s| s.index).collect())
    }
}

/// The change applied at each step.
#[derive(Debug, Clone, PartialEq)]
pub struct DeltaVector(pub Vec<f64>);

impl DeltaVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InnerSolution {
    pub deltas: DeltaVector,
    /// `Σ_k α_k c(β_k)` of the materialized path.
    pub objective: f64,
}

impl InnerSolution {
    pub fn path(&self, base: &LinearModel, iv: &IndexVector) -> CoordinatePath {
        build_path(base, iv.as_slice(), self.deltas.as_slice())
    }
}

pub(crate) fn build_path(base: &LinearModel, iv: &[usize], deltas: &[f64]) -> CoordinatePath {
    let mut beta = base.coefficients().to_vec();
    let steps = iv
        .iter()
        .zip(deltas)
        .map(|(&i, &delta)| {
            beta[i] += delta;
            Step::new(i, beta[i])
        })
        .collect();
    CoordinatePath::new(base.clone(), steps).expect("indices validated by caller")
}

/// The `(H, b)` pair of the free inner problem; see the module docs.
pub fn system(
    stats: &SufficientStats,
    base: &LinearModel,
    iv: &IndexVector,
    weights: &[f64],
) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let engine = Engine::new(stats, base)?;
    check_iv(stats, iv, weights.len())?;
    let tails = tail_sums(weights);
    let k = iv.len();
    let idx = iv.as_slice();
    let h = DMatrix::from_fn(k, k, |j, l| tails[j.max(l)] * engine.g(idx[j], idx[l]));
    let b = DVector::from_fn(k, |j, _| tails[j] * engine.base_resid[idx[j]]);
    Ok((h, b))
}

/// Directly evaluates `Σ_k α_k c(β_k)` for the path `(iv, deltas)`.
pub fn objective(
    stats: &SufficientStats,
    base: &LinearModel,
    iv: &IndexVector,
    deltas: &DeltaVector,
    weights: &[f64],
) -> Result<f64> {
    check_iv(stats, iv, weights.len())?;
    if deltas.0.len() != iv.len() {
        return Err(Error::DimensionMismatch {
            expected: iv.len(),
            found: deltas.0.len(),
        });
    }
    let path = build_path(base, iv.as_slice(), deltas.as_slice());
    let costs = path.cost_sequence(stats)?;
    Ok(costs.values().iter().zip(weights).map(|(c, a)| a * c).sum())
}

fn check_iv(stats: &SufficientStats, iv: &IndexVector, n_weights: usize) -> Result<()> {
    if let Some(&index) = iv.as_slice().iter().find(|&&i| i >= stats.d()) {
        return Err(Error::IndexOutOfRange {
            index,
            dim: stats.d(),
        });
    }
    if n_weights != iv.len() {
        return Err(Error::DimensionMismatch {
            expected: iv.len(),
            found: n_weights,
        });
    }
    Ok(())
}

fn schedule_weights(schedule: &WeightSchedule, k: usize) -> Result<Vec<f64>> {
    let weights = schedule.weights(k)?;
    if k > 0 && weights.iter().all(|w| *w == 0.0) {
        return Err(Error::InvalidSchedule("every step weight is zero".into()));
    }
    Ok(weights)
}

/// Globally minimizes `C(iv, ·)` with a free endpoint.
pub fn solve_free(
    stats: &SufficientStats,
    base: &LinearModel,
    iv: &IndexVector,
    schedule: &WeightSchedule,
) -> Result<InnerSolution> {
    let engine = Engine::new(stats, base)?;
    let weights = schedule_weights(schedule, iv.len())?;
    check_iv(stats, iv, weights.len())?;
    let mut ws = Workspace::default();
    let mut deltas = Vec::new();
    let objective = engine.solve_free(&mut ws, iv.as_slice(), &weights, &mut deltas);
    Ok(InnerSolution {
        deltas: DeltaVector(deltas),
        objective,
    })
}

/// Minimizes `C(iv, ·)` subject to the last model equal to `target`.
///
/// Returns [`Error::Infeasible`] when `target` differs from `base` on a
/// coordinate that `iv` never touches.
pub fn solve_fixed_endpoint(
    stats: &SufficientStats,
    base: &LinearModel,
    iv: &IndexVector,
    schedule: &WeightSchedule,
    target: &LinearModel,
) -> Result<InnerSolution> {
    let engine = Engine::new(stats, base)?;
    stats.check_dim(target.d())?;
    let weights = schedule_weights(schedule, iv.len())?;
    check_iv(stats, iv, weights.len())?;
    let offset = endpoint_offset(base, target);
    let mut ws = Workspace::default();
    let mut deltas = Vec::new();
    match engine.solve_fixed(&mut ws, iv.as_slice(), &weights, &offset, &mut deltas) {
        Some(objective) => Ok(InnerSolution {
            deltas: DeltaVector(deltas),
            objective,
        }),
        None => Err(Error::Infeasible(format!(
            "the index vector does not touch every coordinate where the target differs from the base ({} steps)",
            iv.len()
        ))),
    }
}

pub(crate) fn endpoint_offset(base: &LinearModel, target: &LinearModel) -> Vec<f64> {
    target
        .coefficients()
        .iter()
        .zip(base.coefficients())
        .map(|(t, b)| t - b)
        .collect()
}

/// Result of one greedy coordinate step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GreedyStep {
    pub index: usize,
    pub value: f64,
    pub cost: f64,
}

/// The single-coordinate change that lowers the cost the most.
///
/// Coordinate `i` improves the cost by `(g − Gβ)_i² / G_ii`; ties go to the
/// lowest index.
pub fn greedy_step(stats: &SufficientStats, current: &LinearModel) -> Result<GreedyStep> {
    stats.check_dim(current.d())?;
    let beta = current.coefficients();
    let tol = stats.diag_tol();
    let resid = stats.residual_correlation(beta);
    let gram = stats.gram();
    let mut best: Option<(usize, f64)> = None;
    for (i, r) in resid.iter().enumerate() {
        let gii = gram[(i, i)];
        if !(gii > tol) {
            continue;
        }
        let gain = r * r / gii;
        if best.map_or(true, |(_, g)| gain > g) {
            best = Some((i, gain));
        }
    }
    let (index, _) = best.ok_or(Error::DegenerateGram)?;
    let value = beta[index] + resid[index] / gram[(index, index)];
    let mut next = beta.to_vec();
    next[index] = value;
    Ok(GreedyStep {
        index,
        value,
        cost: stats.cost_of(&next),
    })
}

fn tail_sums(weights: &[f64]) -> Vec<f64> {
    let mut tails = vec![0.0; weights.len()];
    let mut acc = 0.0;
    for j in (0..weights.len()).rev() {
        acc += weights[j];
        tails[j] = acc;
    }
    tails
}

/// Scratch buffers for repeated inner solves; one per worker thread.
#[derive(Debug, Default)]
pub(crate) struct Workspace {
    h: Vec<f64>,
    rhs: Vec<f64>,
    scratch: Vec<f64>,
    sol: Vec<f64>,
    tails: Vec<f64>,
    resid: Vec<f64>,
    z: Vec<f64>,
    hz: Vec<f64>,
    free: Vec<usize>,
    last: Vec<usize>,
    full: Vec<f64>,
}

/// A problem prepared for many inner solves from one base model.
#[derive(Debug, Clone)]
pub(crate) struct Engine<'a> {
    stats: &'a SufficientStats,
    d: usize,
    gram: Vec<f64>,
    base: Vec<f64>,
    base_cost: f64,
    base_resid: Vec<f64>,
}

impl<'a> Engine<'a> {
    pub(crate) fn new(stats: &'a SufficientStats, base: &LinearModel) -> Result<Self> {
        stats.check_dim(base.d())?;
        let d = stats.d();
        let g = stats.gram();
        let gram = (0..d * d).map(|k| g[(k / d, k % d)]).collect();
        let base = base.coefficients().to_vec();
        Ok(Self {
            stats,
            d,
            gram,
            base_cost: stats.cost_of(&base),
            base_resid: stats.residual_correlation(&base),
            base,
        })
    }

    pub(crate) fn stats(&self) -> &'a SufficientStats {
        self.stats
    }

    pub(crate) fn d(&self) -> usize {
        self.d
    }

    pub(crate) fn base(&self) -> &[f64] {
        &self.base
    }

    #[inline]
    fn g(&self, a: usize, b: usize) -> f64 {
        self.gram[a * self.d + b]
    }

    /// `Σ α_k c(β_k)` by incremental updates of `g − Gβ`.
    pub(crate) fn evaluate(
        &self,
        ws: &mut Workspace,
        iv: &[usize],
        deltas: &[f64],
        weights: &[f64],
    ) -> f64 {
        let d = self.d;
        ws.resid.clear();
        ws.resid.extend_from_slice(&self.base_resid);
        let mut cost = self.base_cost;
        let mut total = 0.0;
        for ((&i, &delta), &alpha) in iv.iter().zip(deltas).zip(weights) {
            if delta != 0.0 {
                cost += delta * (delta * self.g(i, i) - 2.0 * ws.resid[i]);
                let row = &self.gram[i * d..(i + 1) * d];
                for (r, gij) in ws.resid.iter_mut().zip(row) {
                    *r -= delta * gij;
                }
            }
            total += alpha * cost.max(0.0);
        }
        total
    }

    pub(crate) fn solve_free(
        &self,
        ws: &mut Workspace,
        iv: &[usize],
        weights: &[f64],
        deltas: &mut Vec<f64>,
    ) -> f64 {
        let k_all = iv.len();
        deltas.clear();
        deltas.resize(k_all, 0.0);
        // steps after the last positive weight do not affect the objective;
        // the minimum-norm choice leaves them at zero.
        let k = weights.iter().rposition(|w| *w > 0.0).map_or(0, |p| p + 1);
        if k == 0 {
            return 0.0;
        }
        ws.tails.clear();
        ws.tails.extend(tail_sums(&weights[..k]));
        ws.h.clear();
        ws.h.resize(k * k, 0.0);
        ws.rhs.clear();
        for j in 0..k {
            let wj = ws.tails[j];
            ws.h[j * k + j] = wj * self.g(iv[j], iv[j]);
            for l in j + 1..k {
                let v = ws.tails[l] * self.g(iv[j], iv[l]);
                ws.h[j * k + l] = v;
                ws.h[l * k + j] = v;
            }
            ws.rhs.push(wj * self.base_resid[iv[j]]);
        }
        linalg::psd_solve(&ws.h, k, &ws.rhs, &mut ws.scratch, &mut ws.sol);
        deltas[..k].copy_from_slice(&ws.sol);
        self.evaluate(ws, iv, deltas, weights)
    }

    /// Fixed-endpoint solve; `None` when infeasible.
    pub(crate) fn solve_fixed(
        &self,
        ws: &mut Workspace,
        iv: &[usize],
        weights: &[f64],
        offset: &[f64],
        deltas: &mut Vec<f64>,
    ) -> Option<f64> {
        let d = self.d;
        let k = iv.len();
        for c in 0..d {
            if offset[c] != 0.0 && !iv.contains(&c) {
                return None;
            }
        }
        // last position touching each coordinate
        ws.last.clear();
        ws.last.resize(d, usize::MAX);
        for (j, &c) in iv.iter().enumerate() {
            ws.last[c] = j;
        }
        ws.free.clear();
        ws.free.extend((0..k).filter(|&j| ws.last[iv[j]] != j));
        let f = ws.free.len();

        // particular solution: each coordinate's whole offset on its last step
        ws.full.clear();
        ws.full.resize(k, 0.0);
        for (j, &c) in iv.iter().enumerate() {
            if ws.last[c] == j {
                ws.full[j] = offset[c];
            }
        }
        deltas.clear();
        deltas.extend_from_slice(&ws.full);
        if f == 0 {
            return Some(self.evaluate(ws, iv, deltas, weights));
        }

        ws.tails.clear();
        ws.tails.extend(tail_sums(weights));
        let h_at = |j: usize, l: usize| ws.tails[j.max(l)] * self.g(iv[j], iv[l]);

        // Z: k × f, column m is e_free[m] − e_last(coord of free[m])
        ws.z.clear();
        ws.z.resize(k * f, 0.0);
        for (m, &j) in ws.free.iter().enumerate() {
            ws.z[j * f + m] = 1.0;
            ws.z[ws.last[iv[j]] * f + m] = -1.0;
        }
        // HZ: k × f
        ws.hz.clear();
        ws.hz.resize(k * f, 0.0);
        for (m, &j) in ws.free.iter().enumerate() {
            let p = ws.last[iv[j]];
            for r in 0..k {
                ws.hz[r * f + m] = h_at(r, j) - h_at(r, p);
            }
        }
        // reduced system Zᵀ H Z u = Zᵀ (b − H δ_p)
        ws.h.clear();
        ws.h.resize(f * f, 0.0);
        for a in 0..f {
            for bcol in 0..f {
                let mut v = 0.0;
                for r in 0..k {
                    v += ws.z[r * f + a] * ws.hz[r * f + bcol];
                }
                ws.h[a * f + bcol] = v;
            }
        }
        for a in 0..f {
            for bcol in 0..a {
                let v = 0.5 * (ws.h[a * f + bcol] + ws.h[bcol * f + a]);
                ws.h[a * f + bcol] = v;
                ws.h[bcol * f + a] = v;
            }
        }
        ws.scratch.clear();
        for r in 0..k {
            let mut v = ws.tails[r] * self.base_resid[iv[r]];
            for (c, &dp) in ws.full.iter().enumerate() {
                if dp != 0.0 {
                    v -= h_at(r, c) * dp;
                }
            }
            ws.scratch.push(v);
        }
        ws.rhs.clear();
        for a in 0..f {
            let mut v = 0.0;
            for r in 0..k {
                v += ws.z[r * f + a] * ws.scratch[r];
            }
            ws.rhs.push(v);
        }
        let mut factor = std::mem::take(&mut ws.scratch);
        linalg::psd_solve(&ws.h, f, &ws.rhs, &mut factor, &mut ws.sol);
        ws.scratch = factor;
        for (m, &j) in ws.free.iter().enumerate() {
            let u = ws.sol[m];
            deltas[j] += u;
            deltas[ws.last[iv[j]]] -= u;
        }
        Some(self.evaluate(ws, iv, deltas, weights))
    }
}

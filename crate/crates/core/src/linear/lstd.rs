use alloc::vec;
use alloc::vec::Vec;

use super::{ExperienceBatch, FeatureKind, FeatureMap, WeightVector};
use crate::error::{check_discount, check_unit_interval, Error, Result};
use crate::linalg;
use crate::mdp::TabularPolicy;

/// Ridge used by [`LstdConfig::with_ridge`].
pub const DEFAULT_RIDGE: f64 = 1e-6;

/// Solver options. With `ridge = Some(ε)`, a singular `A` is retried as
/// `A + εI`; with `None` (the default) it is an error.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LstdConfig {
    pub ridge: Option<f64>,
}

impl LstdConfig {
    pub fn with_ridge() -> Self {
        Self {
            ridge: Some(DEFAULT_RIDGE),
        }
    }
}

/// Weights and solve diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LstdSolution {
    pub w: WeightVector,
    /// The ridge actually added, if the plain system was singular.
    pub ridge_applied: Option<f64>,
    /// `‖A w - b‖∞` against the unregularized `A`.
    pub residual: f64,
}

/// `A = Σ z_t (x_t - γ x'_t)ᵀ` and `b = Σ z_t r_t`, row-major.
struct System {
    a: Vec<f64>,
    b: Vec<f64>,
    dim: usize,
}

/// Accumulates the LSTD system. `current(i)` and `next(i)` give the feature
/// vectors of record `i`; `next` is the zero vector after a terminal step.
///
/// With `traced = false`, `z_t = x_t`. With `traced = true`,
/// `z_t = γλ z_{t-1} + x_t`, reset after each terminal record.
fn accumulate<'a>(
    batch: &ExperienceBatch,
    dim: usize,
    gamma: f64,
    lambda: f64,
    traced: bool,
    current: impl Fn(usize) -> Result<&'a [f64]>,
    next: impl Fn(usize) -> Result<Vec<f64>>,
) -> Result<System> {
    if batch.is_empty() {
        return Err(Error::EmptyBatch);
    }
    let mut a = vec![0.0; dim * dim];
    let mut b = vec![0.0; dim];
    let mut z = vec![0.0; dim];
    let mut diff = vec![0.0; dim];
    for (i, rec) in batch.records().iter().enumerate() {
        let x = current(i)?;
        if traced {
            let decay = gamma * lambda;
            for (zj, &xj) in z.iter_mut().zip(x) {
                *zj = decay * *zj + xj;
            }
        } else {
            z.copy_from_slice(x);
        }
        let x_next = next(i)?;
        for j in 0..dim {
            diff[j] = x[j] - gamma * x_next[j];
        }
        for (j, &zj) in z.iter().enumerate() {
            if zj == 0.0 {
                continue;
            }
            let row = &mut a[j * dim..(j + 1) * dim];
            for (aij, &dk) in row.iter_mut().zip(&diff) {
                *aij += zj * dk;
            }
            b[j] += zj * rec.r;
        }
        if rec.done {
            z.iter_mut().for_each(|x| *x = 0.0);
        }
    }
    Ok(System { a, b, dim })
}

fn solve_system(sys: System, config: LstdConfig) -> Result<LstdSolution> {
    let n = sys.dim;
    let (w, ridge_applied) = match linalg::solve(&sys.a, n, &sys.b) {
        Some(w) => (w, None),
        None => {
            let eps = config.ridge.ok_or(Error::Singular(
                "LSTD matrix A is singular (enable a ridge or add data)",
            ))?;
            let mut reg = sys.a.clone();
            for j in 0..n {
                reg[j * n + j] += eps;
            }
            let w = linalg::solve(&reg, n, &sys.b)
                .ok_or(Error::Singular("LSTD matrix A + εI is singular"))?;
            (w, Some(eps))
        }
    };
    let residual = linalg::residual_inf(&sys.a, n, &w, &sys.b);
    Ok(LstdSolution {
        w: WeightVector::from_vec(w)?,
        ridge_applied,
        residual,
    })
}

fn check_batch_states(batch: &ExperienceBatch, fm: &FeatureMap) -> Result<()> {
    for rec in batch.records() {
        for s in [rec.s, rec.s_next] {
            if s >= fm.n_states() {
                return Err(Error::StateOutOfRange {
                    index: s,
                    n_states: fm.n_states(),
                });
            }
        }
    }
    Ok(())
}

/// LSTD(λ) for state values.
///
/// Solves `A w = b` with `A = Σ z_t (x(S_t) - γ x(S_{t+1}))ᵀ` and
/// `b = Σ z_t R_{t+1}`. Next features are zero after a terminal record.
/// `z_t = x(S_t)` when `λ = 0`; otherwise `z_t = γλ z_{t-1} + x(S_t)`, reset
/// at episode boundaries.
pub fn lstd_solve(
    batch: &ExperienceBatch,
    fm: &FeatureMap,
    gamma: f64,
    lambda: f64,
    config: LstdConfig,
) -> Result<LstdSolution> {
    check_discount(gamma)?;
    check_unit_interval("lambda", lambda)?;
    fm.expect(FeatureKind::State)?;
    check_batch_states(batch, fm)?;
    let sys = lstd_system(batch, fm, gamma, lambda, lambda > 0.0)?;
    solve_system(sys, config)
}

fn lstd_system(
    batch: &ExperienceBatch,
    fm: &FeatureMap,
    gamma: f64,
    lambda: f64,
    traced: bool,
) -> Result<System> {
    let recs = batch.records();
    let dim = fm.dim();
    accumulate(
        batch,
        dim,
        gamma,
        lambda,
        traced,
        |i| fm.state(recs[i].s),
        |i| {
            let rec = recs[i];
            if rec.done {
                Ok(vec![0.0; dim])
            } else {
                Ok(fm.state(rec.s_next)?.to_vec())
            }
        },
    )
}

/// LSTDQ(λ) for the action values of `target_policy`.
///
/// As [`lstd_solve`] over pair features, with next features
/// `Σ_{a'} π(a'|S_{t+1}) x(S_{t+1}, a')`. For a deterministic policy this is
/// `x(S_{t+1}, π(S_{t+1}))`. The recorded `a_next` is not used.
pub fn lstdq_solve(
    batch: &ExperienceBatch,
    fm: &FeatureMap,
    target_policy: &TabularPolicy,
    gamma: f64,
    lambda: f64,
    config: LstdConfig,
) -> Result<LstdSolution> {
    check_discount(gamma)?;
    check_unit_interval("lambda", lambda)?;
    fm.expect(FeatureKind::StateAction)?;
    check_batch_states(batch, fm)?;
    if target_policy.n_states() != fm.n_states() {
        return Err(Error::DimensionMismatch {
            expected: fm.n_states(),
            found: target_policy.n_states(),
        });
    }
    if target_policy.n_actions() != fm.n_actions() {
        return Err(Error::DimensionMismatch {
            expected: fm.n_actions(),
            found: target_policy.n_actions(),
        });
    }
    let sys = lstdq_system(batch, fm, target_policy, gamma, lambda, lambda > 0.0)?;
    solve_system(sys, config)
}

fn lstdq_system(
    batch: &ExperienceBatch,
    fm: &FeatureMap,
    policy: &TabularPolicy,
    gamma: f64,
    lambda: f64,
    traced: bool,
) -> Result<System> {
    let recs = batch.records();
    let dim = fm.dim();
    accumulate(
        batch,
        dim,
        gamma,
        lambda,
        traced,
        |i| fm.pair(recs[i].s, recs[i].a),
        |i| {
            let rec = recs[i];
            let mut x = vec![0.0; dim];
            if !rec.done {
                for (a, &p) in policy.row(rec.s_next).iter().enumerate() {
                    if p == 0.0 {
                        continue;
                    }
                    for (xj, &f) in x.iter_mut().zip(fm.pair(rec.s_next, a)?) {
                        *xj += p * f;
                    }
                }
            }
            Ok(x)
        },
    )
}

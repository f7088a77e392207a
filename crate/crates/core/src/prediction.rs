//! Model-free policy evaluation.
//!
//! Updates mutate a caller-owned [`ValueTable`] in place. A bootstrap state
//! of `None` means the transition ended the episode, and its value is read
//! as zero. Every update checks its result for finiteness before writing.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_discount, check_step_size, check_unit_interval, Error, Result};
use crate::math;
use crate::mdp::{Trajectory, ValueTable};

/// Accumulating eligibility trace over states.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceTable {
    e: Vec<f64>,
    lambda: f64,
    gamma: f64,
}

impl TraceTable {
    pub fn new(n_states: usize, lambda: f64, gamma: f64) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        check_discount(gamma)?;
        Ok(Self {
            e: vec![0.0; n_states],
            lambda,
            gamma,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn values(&self) -> &[f64] {
        &self.e
    }

    pub fn get(&self, s: usize) -> f64 {
        self.e[s]
    }

    pub fn reset(&mut self) {
        self.e.iter_mut().for_each(|x| *x = 0.0);
    }

    /// `E(x) <- γλ E(x) + 1(x = s)`.
    pub fn visit(&mut self, s: usize) -> Result<()> {
        if s >= self.e.len() {
            return Err(Error::StateOutOfRange {
                index: s,
                n_states: self.e.len(),
            });
        }
        let decay = self.gamma * self.lambda;
        self.e.iter_mut().for_each(|x| *x *= decay);
        self.e[s] += 1.0;
        Ok(())
    }
}

/// Step-size rule: a constant, or `1 / (k + 1)` where `k` counts earlier
/// visits to the same key.
#[derive(Debug, Clone, PartialEq)]
pub enum StepSize {
    Constant(f64),
    InverseVisits(Vec<u64>),
}

impl StepSize {
    pub fn constant(alpha: f64) -> Result<Self> {
        check_step_size(alpha)?;
        Ok(Self::Constant(alpha))
    }

    /// Per-key visit-count schedule over `n_keys` states (or pairs).
    pub fn inverse_visits(n_keys: usize) -> Self {
        Self::InverseVisits(vec![0; n_keys])
    }

    /// Step size for the next update of `key`; advances the visit count.
    pub fn next(&mut self, key: usize) -> f64 {
        match self {
            Self::Constant(a) => *a,
            Self::InverseVisits(counts) => {
                let k = counts[key];
                counts[key] += 1;
                1.0 / (k as f64 + 1.0)
            }
        }
    }
}

/// `μ_k = μ_{k-1} + (x_k - μ_{k-1}) / k`. For `k = 1` the result is `x_k`
/// whatever `mu_prev` holds.
pub fn incremental_mean(mu_prev: f64, x_k: f64, k: usize) -> Result<f64> {
    match k {
        0 => Err(Error::InvalidParameter {
            name: "k",
            value: 0.0,
            expected: "a sample count >= 1",
        }),
        1 => Ok(x_k),
        _ => Ok(mu_prev + (x_k - mu_prev) / k as f64),
    }
}

pub(crate) fn bootstrap_value(v: &ValueTable, next: Option<usize>) -> Result<f64> {
    match next {
        None => Ok(0.0),
        Some(s) => {
            v.check_state(s)?;
            Ok(if v.is_terminal(s) { 0.0 } else { v[s] })
        }
    }
}

/// One TD(0) update of `V(s)` toward `r + γ V(s')`. Returns the TD error.
pub fn td0_update(
    v: &mut ValueTable,
    s: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    check_step_size(alpha)?;
    check_discount(gamma)?;
    v.check_updatable(s)?;
    let delta = r + gamma * bootstrap_value(v, next)? - v[s];
    let updated = v[s] + alpha * delta;
    v.values_mut()[s] = crate::error::check_finite("td0_update", updated)?;
    Ok(delta)
}

fn check_time(traj: &Trajectory, t: usize) -> Result<()> {
    if t < traj.len() {
        Ok(())
    } else {
        Err(Error::TimeOutOfRange { t, len: traj.len() })
    }
}

/// `G_t^(n)`: up to `n` discounted rewards plus `γ^n V(S_{t+n})`.
///
/// A terminal step inside the window drops the bootstrap. A trajectory that
/// stops early without terminating bootstraps from its last next-state.
pub fn n_step_return(
    traj: &Trajectory,
    t: usize,
    n: usize,
    v: &ValueTable,
    gamma: f64,
) -> Result<f64> {
    check_time(traj, t)?;
    check_discount(gamma)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let end = traj.len().min(t + n);
    let steps = &traj.steps()[t..end];
    let mut g = bootstrap_value(v, steps[steps.len() - 1].bootstrap_state())?;
    for step in steps.iter().rev() {
        g = step.reward + gamma * g;
    }
    Ok(g)
}

/// `G_t^λ = (1-λ) Σ_{n=1}^{H-1} λ^{n-1} G_t^(n) + λ^{H-1} G_t` with
/// `H = T - t` steps left in the episode.
///
/// Computed as the weighted sum of every n-step return; the trajectory must
/// be a complete episode.
pub fn lambda_return(
    traj: &Trajectory,
    t: usize,
    v: &ValueTable,
    lambda: f64,
    gamma: f64,
) -> Result<f64> {
    check_unit_interval("lambda", lambda)?;
    check_time(traj, t)?;
    if !traj.is_complete() {
        return Err(Error::IncompleteEpisode);
    }
    let horizon = traj.len() - t;
    let mut g = 0.0;
    for n in 1..horizon {
        g += (1.0 - lambda) * math::powi(lambda, n - 1) * n_step_return(traj, t, n, v, gamma)?;
    }
    g += math::powi(lambda, horizon - 1) * n_step_return(traj, t, horizon, v, gamma)?;
    Ok(g)
}

/// λ-returns for every step of a complete episode by the recursion
/// `G_t^λ = R_{t+1} + γ((1-λ) V(S_{t+1}) + λ G_{t+1}^λ)`.
pub(crate) fn lambda_returns(
    traj: &Trajectory,
    v: &ValueTable,
    lambda: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; traj.len()];
    let mut next_g = 0.0;
    for (t, step) in traj.steps().iter().enumerate().rev() {
        let g = match step.bootstrap_state() {
            None => step.reward,
            Some(s) => {
                let vs = bootstrap_value(v, Some(s))?;
                step.reward + gamma * ((1.0 - lambda) * vs + lambda * next_g)
            }
        };
        out[t] = g;
        next_g = g;
    }
    Ok(out)
}

fn check_episode(traj: &Trajectory, v: &ValueTable) -> Result<()> {
    if !traj.is_complete() {
        return Err(Error::IncompleteEpisode);
    }
    for step in traj.steps() {
        v.check_updatable(step.state)?;
    }
    Ok(())
}

fn apply_increments(v: &mut ValueTable, inc: &[f64], what: &'static str) -> Result<()> {
    if v.values().iter().zip(inc).any(|(x, d)| !(x + d).is_finite()) {
        return Err(Error::NonFinite(what));
    }
    for (x, d) in v.values_mut().iter_mut().zip(inc) {
        *x += d;
    }
    Ok(())
}

/// Forward-view TD(λ) over one complete episode.
///
/// Every target `G_t^λ` and every error `G_t^λ - V(S_t)` is computed from
/// the value table as it was before the episode; the increments
/// `α (G_t^λ - V(S_t))` are summed and applied at the end.
pub fn td_lambda_forward_episode(
    traj: &Trajectory,
    v: &mut ValueTable,
    alpha: f64,
    lambda: f64,
    gamma: f64,
) -> Result<()> {
    check_step_size(alpha)?;
    check_unit_interval("lambda", lambda)?;
    check_discount(gamma)?;
    check_episode(traj, v)?;
    let targets = lambda_returns(traj, v, lambda, gamma)?;
    let mut inc = vec![0.0; v.len()];
    for (step, g) in traj.steps().iter().zip(targets) {
        inc[step.state] += alpha * (g - v[step.state]);
    }
    apply_increments(v, &inc, "td_lambda_forward_episode")
}

/// `E(x) <- γλ E(x) + 1(x = s)`.
pub fn trace_update_tabular(e: &mut TraceTable, s: usize) -> Result<()> {
    e.visit(s)
}

/// One online backward-view TD(λ) step. Returns the TD error.
///
/// The trace is bumped at `s`, then every state moves by `α δ E(x)`. The
/// product `α δ` is formed once, so with `λ = 0` the update of `V(s)` is the
/// same floating-point operation as [`td0_update`]. The trace is cleared
/// when `next` is `None`.
pub fn td_lambda_backward_step(
    v: &mut ValueTable,
    e: &mut TraceTable,
    s: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
) -> Result<f64> {
    check_step_size(alpha)?;
    v.check_updatable(s)?;
    if e.e.len() != v.len() {
        return Err(Error::DimensionMismatch {
            expected: v.len(),
            found: e.e.len(),
        });
    }
    let delta = r + e.gamma * bootstrap_value(v, next)? - v[s];
    e.visit(s)?;
    let step = alpha * delta;
    let values = v.values();
    if e
        .e
        .iter()
        .zip(values)
        .any(|(&ex, &x)| ex != 0.0 && !(x + step * ex).is_finite())
    {
        return Err(Error::NonFinite("td_lambda_backward_step"));
    }
    let values = v.values_mut();
    for (x, &ex) in values.iter_mut().zip(&e.e) {
        if ex != 0.0 {
            *x += step * ex;
        }
    }
    if next.is_none() {
        e.reset();
    }
    Ok(delta)
}

/// Backward-view TD(λ) over one episode with updates held until the end.
///
/// TD errors are computed against the pre-episode table and the summed
/// increments `α δ_t E_t` applied once. On a complete episode this equals
/// [`td_lambda_forward_episode`] up to round-off.
pub fn td_lambda_backward_offline(
    traj: &Trajectory,
    v: &mut ValueTable,
    alpha: f64,
    lambda: f64,
    gamma: f64,
) -> Result<()> {
    check_step_size(alpha)?;
    check_episode(traj, v)?;
    let mut e = TraceTable::new(v.len(), lambda, gamma)?;
    let mut inc = vec![0.0; v.len()];
    for step in traj.steps() {
        let delta =
            step.reward + gamma * bootstrap_value(v, step.bootstrap_state())? - v[step.state];
        e.visit(step.state)?;
        let scaled = alpha * delta;
        for (d, &ex) in inc.iter_mut().zip(&e.e) {
            *d += scaled * ex;
        }
    }
    apply_increments(v, &inc, "td_lambda_backward_offline")
}

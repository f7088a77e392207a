//! Model-free control over a caller-owned [`QTable`].
//!
//! Bootstraps are passed as `Option`s: `None` marks a transition that ended
//! the episode, whose successor value is zero.

use alloc::vec;
use alloc::vec::Vec;
use rand_core::RngCore;

use crate::error::{check_discount, check_finite, check_step_size, check_unit_interval};
use crate::error::{Error, Result};
use crate::mdp::{QTable, Trajectory};
use crate::rng;

/// Accumulating eligibility trace over state-action pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct QTraceTable {
    n_actions: usize,
    e: Vec<f64>,
    lambda: f64,
    gamma: f64,
}

impl QTraceTable {
    pub fn new(n_states: usize, n_actions: usize, lambda: f64, gamma: f64) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        check_discount(gamma)?;
        Ok(Self {
            n_actions,
            e: vec![0.0; n_states * n_actions],
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

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.e[s * self.n_actions + a]
    }

    pub fn reset(&mut self) {
        self.e.iter_mut().for_each(|x| *x = 0.0);
    }

    /// `E(x, b) <- γλ E(x, b) + 1(x = s, b = a)`.
    pub fn visit(&mut self, s: usize, a: usize) -> Result<()> {
        if a >= self.n_actions {
            return Err(Error::ActionOutOfRange {
                index: a,
                n_actions: self.n_actions,
            });
        }
        let i = s * self.n_actions + a;
        if i >= self.e.len() {
            return Err(Error::StateOutOfRange {
                index: s,
                n_states: self.e.len() / self.n_actions,
            });
        }
        let decay = self.gamma * self.lambda;
        self.e.iter_mut().for_each(|x| *x *= decay);
        self.e[i] += 1.0;
        Ok(())
    }
}

/// `ε_k = max(ε_min, ε_0 decay^k)` for episode index `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExplorationSchedule {
    pub initial: f64,
    pub decay: f64,
    pub min: f64,
}

impl Default for ExplorationSchedule {
    /// Constant `ε = 0.1`.
    fn default() -> Self {
        Self {
            initial: 0.1,
            decay: 1.0,
            min: 0.0,
        }
    }
}

impl ExplorationSchedule {
    pub fn constant(epsilon: f64) -> Result<Self> {
        Self::decaying(epsilon, 1.0, 0.0)
    }

    pub fn decaying(initial: f64, decay: f64, min: f64) -> Result<Self> {
        check_unit_interval("epsilon", initial)?;
        check_unit_interval("epsilon_decay", decay)?;
        check_unit_interval("epsilon_min", min)?;
        Ok(Self {
            initial,
            decay,
            min,
        })
    }

    pub fn epsilon(&self, episode: usize) -> f64 {
        let decayed = self.initial * libm::pow(self.decay, episode as f64);
        decayed.max(self.min).min(1.0)
    }
}

/// ε-greedy distribution at `s`: `ε/m` on every action plus `1 - ε` on the
/// greedy one (lowest index on ties).
pub fn epsilon_greedy(q: &QTable, s: usize, epsilon: f64) -> Result<Vec<f64>> {
    check_unit_interval("epsilon", epsilon)?;
    q.check_pair(s, 0)?;
    let m = q.n_actions();
    let mut probs = vec![epsilon / m as f64; m];
    probs[q.greedy_action(s)] += 1.0 - epsilon;
    Ok(probs)
}

/// Draws one action from [`epsilon_greedy`].
pub fn sample_epsilon_greedy<R: RngCore + ?Sized>(
    q: &QTable,
    s: usize,
    epsilon: f64,
    rng: &mut R,
) -> Result<usize> {
    let probs = epsilon_greedy(q, s, epsilon)?;
    Ok(rng::categorical(rng, &probs))
}

fn pair_value(q: &QTable, next: Option<(usize, usize)>) -> Result<f64> {
    match next {
        None => Ok(0.0),
        Some((s, a)) => {
            q.check_pair(s, a)?;
            Ok(if q.is_terminal(s) { 0.0 } else { q.get(s, a) })
        }
    }
}

fn write(q: &mut QTable, s: usize, a: usize, value: f64, what: &'static str) -> Result<()> {
    let n_a = q.n_actions();
    q.values_mut()[s * n_a + a] = check_finite(what, value)?;
    Ok(())
}

/// `Q(s,a) <- Q(s,a) + α(r + γ Q(s',a') - Q(s,a))`. Returns the TD error.
pub fn sarsa0_update(
    q: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    next: Option<(usize, usize)>,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    check_step_size(alpha)?;
    check_discount(gamma)?;
    q.check_updatable(s, a)?;
    let delta = r + gamma * pair_value(q, next)? - q.get(s, a);
    write(q, s, a, q.get(s, a) + alpha * delta, "sarsa0_update")?;
    Ok(delta)
}

/// `Q(s,a) <- Q(s,a) + α(r + γ max_b Q(s',b) - Q(s,a))`. Returns the TD error.
pub fn q_learning_update(
    q: &mut QTable,
    s: usize,
    a: usize,
    r: f64,
    next: Option<usize>,
    alpha: f64,
    gamma: f64,
) -> Result<f64> {
    check_step_size(alpha)?;
    check_discount(gamma)?;
    q.check_updatable(s, a)?;
    let target = match next {
        None => 0.0,
        Some(s2) => {
            q.check_pair(s2, 0)?;
            if q.is_terminal(s2) {
                0.0
            } else {
                q.max(s2)
            }
        }
    };
    let delta = r + gamma * target - q.get(s, a);
    write(q, s, a, q.get(s, a) + alpha * delta, "q_learning_update")?;
    Ok(delta)
}

/// The pair to bootstrap from after step `i`: the next step's state and
/// action, `None` after a terminal step.
fn successor(traj: &Trajectory, i: usize) -> Result<Option<(usize, usize)>> {
    let steps = traj.steps();
    if steps[i].done {
        return Ok(None);
    }
    match steps.get(i + 1) {
        Some(next) => Ok(Some((next.state, next.action))),
        None => Err(Error::IncompleteEpisode),
    }
}

/// `q_t^(n)`: up to `n` discounted rewards plus `γ^n Q(S_{t+n}, A_{t+n})`.
///
/// The bootstrap uses the action actually taken at `t + n`, so it needs that
/// step to be in the trajectory; a truncated trajectory that does not reach
/// it yields [`Error::IncompleteEpisode`].
pub fn n_step_q_return(
    traj: &Trajectory,
    t: usize,
    n: usize,
    q: &QTable,
    gamma: f64,
) -> Result<f64> {
    if t >= traj.len() {
        return Err(Error::TimeOutOfRange { t, len: traj.len() });
    }
    check_discount(gamma)?;
    if n == 0 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: 0.0,
            expected: "n >= 1",
        });
    }
    let steps = traj.steps();
    let end = traj.len().min(t + n);
    let mut g = if steps[end - 1].done {
        0.0
    } else if end == t + n {
        pair_value(q, successor(traj, end - 1)?)?
    } else {
        return Err(Error::IncompleteEpisode);
    };
    for step in steps[t..end].iter().rev() {
        g = step.reward + gamma * g;
    }
    Ok(g)
}

/// λ-weighted Q-returns for every step of a complete episode by the
/// recursion `q_t^λ = R_{t+1} + γ((1-λ) Q(S_{t+1}, A_{t+1}) + λ q_{t+1}^λ)`.
pub(crate) fn q_lambda_returns(
    traj: &Trajectory,
    q: &QTable,
    lambda: f64,
    gamma: f64,
) -> Result<Vec<f64>> {
    let mut out = vec![0.0; traj.len()];
    let mut next_g = 0.0;
    for t in (0..traj.len()).rev() {
        let step = traj.steps()[t];
        out[t] = match successor(traj, t)? {
            None => step.reward,
            Some(pair) => {
                let qn = pair_value(q, Some(pair))?;
                step.reward + gamma * ((1.0 - lambda) * qn + lambda * next_g)
            }
        };
        next_g = out[t];
    }
    Ok(out)
}

fn check_episode(traj: &Trajectory, q: &QTable) -> Result<()> {
    if !traj.is_complete() {
        return Err(Error::IncompleteEpisode);
    }
    traj.steps()
        .iter()
        .try_for_each(|step| q.check_updatable(step.state, step.action))
}

fn apply_increments(q: &mut QTable, inc: &[f64], what: &'static str) -> Result<()> {
    if q.values().iter().zip(inc).any(|(x, d)| !(x + d).is_finite()) {
        return Err(Error::NonFinite(what));
    }
    for (x, d) in q.values_mut().iter_mut().zip(inc) {
        *x += d;
    }
    Ok(())
}

/// Forward-view SARSA(λ) over one complete episode, with targets and errors
/// taken from the pre-episode table and the summed increments applied at
/// the end.
pub fn sarsa_lambda_forward_episode(
    traj: &Trajectory,
    q: &mut QTable,
    alpha: f64,
    lambda: f64,
    gamma: f64,
) -> Result<()> {
    check_step_size(alpha)?;
    check_unit_interval("lambda", lambda)?;
    check_discount(gamma)?;
    check_episode(traj, q)?;
    let targets = q_lambda_returns(traj, q, lambda, gamma)?;
    let n_a = q.n_actions();
    let mut inc = vec![0.0; q.values().len()];
    for (step, g) in traj.steps().iter().zip(targets) {
        inc[step.state * n_a + step.action] += alpha * (g - q.get(step.state, step.action));
    }
    apply_increments(q, &inc, "sarsa_lambda_forward_episode")
}

/// One online backward-view SARSA(λ) step. Returns the TD error.
///
/// With `λ = 0` the update of `Q(s,a)` is the same floating-point operation
/// as [`sarsa0_update`]. The trace is cleared when `next` is `None`.
pub fn sarsa_lambda_backward_step(
    q: &mut QTable,
    e: &mut QTraceTable,
    s: usize,
    a: usize,
    r: f64,
    next: Option<(usize, usize)>,
    alpha: f64,
) -> Result<f64> {
    check_step_size(alpha)?;
    q.check_updatable(s, a)?;
    if e.e.len() != q.values().len() {
        return Err(Error::DimensionMismatch {
            expected: q.values().len(),
            found: e.e.len(),
        });
    }
    let delta = r + e.gamma * pair_value(q, next)? - q.get(s, a);
    e.visit(s, a)?;
    let step = alpha * delta;
    if e
        .e
        .iter()
        .zip(q.values())
        .any(|(&ex, &x)| ex != 0.0 && !(x + step * ex).is_finite())
    {
        return Err(Error::NonFinite("sarsa_lambda_backward_step"));
    }
    for (x, &ex) in q.values_mut().iter_mut().zip(&e.e) {
        if ex != 0.0 {
            *x += step * ex;
        }
    }
    if next.is_none() {
        e.reset();
    }
    Ok(delta)
}

/// Backward-view SARSA(λ) over one complete episode with updates held
/// until the end; equals [`sarsa_lambda_forward_episode`] up to round-off.
pub fn sarsa_lambda_backward_offline(
    traj: &Trajectory,
    q: &mut QTable,
    alpha: f64,
    lambda: f64,
    gamma: f64,
) -> Result<()> {
    check_step_size(alpha)?;
    check_episode(traj, q)?;
    let mut e = QTraceTable::new(q.n_states(), q.n_actions(), lambda, gamma)?;
    let mut inc = vec![0.0; q.values().len()];
    for (t, step) in traj.steps().iter().enumerate() {
        let target = pair_value(q, successor(traj, t)?)?;
        let delta = step.reward + gamma * target - q.get(step.state, step.action);
        e.visit(step.state, step.action)?;
        let scaled = alpha * delta;
        for (d, &ex) in inc.iter_mut().zip(&e.e) {
            *d += scaled * ex;
        }
    }
    apply_increments(q, &inc, "sarsa_lambda_backward_offline")
}

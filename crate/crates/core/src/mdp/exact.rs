use alloc::vec;
use alloc::vec::Vec;

use super::{QTable, TabularMdp, TabularPolicy, ValueTable};
use crate::error::{Error, Result};
use crate::linalg;
use crate::math::argmax;

/// Largest state count accepted by the dense exact solvers.
pub const MAX_EXACT_STATES: usize = 10_000;

/// Sweep cap for [`value_iteration_exact`].
pub const VALUE_ITERATION_MAX_SWEEPS: usize = 100_000;

fn check_size(mdp: &TabularMdp) -> Result<()> {
    if mdp.n_states() > MAX_EXACT_STATES {
        return Err(Error::TooLarge {
            n_states: mdp.n_states(),
            cap: MAX_EXACT_STATES,
        });
    }
    Ok(())
}

/// Solves the Bellman expectation equation `v = r_π + γ P_π v` directly.
///
/// Terminal rows are replaced by `v(s) = 0`. Fails with
/// [`Error::Singular`] when `I - γ P_π` is singular on the non-terminal
/// states, which for `γ = 1` means some state never reaches a terminal.
pub fn policy_evaluation_exact(mdp: &TabularMdp, policy: &TabularPolicy) -> Result<ValueTable> {
    check_size(mdp)?;
    mdp.check_policy(policy)?;
    let n = mdp.n_states();
    let gamma = mdp.gamma();
    let (p, r) = mdp.policy_kernel(policy);

    let mut a = vec![0.0; n * n];
    let mut b = vec![0.0; n];
    for s in 0..n {
        if mdp.is_terminal(s) {
            a[s * n + s] = 1.0;
            continue;
        }
        for t in 0..n {
            a[s * n + t] = -gamma * p[s * n + t];
        }
        a[s * n + s] += 1.0;
        b[s] = r[s];
    }
    let v = linalg::solve(&a, n, &b)
        .ok_or(Error::Singular("I - γP_π is singular (improper policy with γ = 1?)"))?;
    let scale = v.iter().fold(1.0f64, |m, x| m.max(x.abs()));
    if linalg::residual_inf(&a, n, &v, &b) > 1e-9 * scale {
        return Err(Error::Singular("Bellman system is too ill-conditioned"));
    }
    ValueTable::from_values(v, mdp.terminal_mask())
}

/// One-step lookahead `q(s,a) = R^a_s + γ Σ_{s'} P^a_{ss'} v(s')`.
pub fn action_values(mdp: &TabularMdp, v: &[f64]) -> QTable {
    let (ns, na) = (mdp.n_states(), mdp.n_actions());
    let mut q = vec![0.0; ns * na];
    for s in 0..ns {
        if mdp.is_terminal(s) {
            continue;
        }
        for a in 0..na {
            let future: f64 = mdp
                .outcomes(s, a)
                .iter()
                .map(|o| o.prob * v[o.next])
                .sum();
            q[s * na + a] = mdp.expected_reward(s, a) + mdp.gamma() * future;
        }
    }
    // terminal rows are already zero and every entry is finite for finite v
    QTable::from_values(ns, na, q, mdp.terminal_mask()).expect("finite lookahead")
}

/// Value iteration to a sup-norm change of at most `tol`.
///
/// Returns `(v*, q*)` with `v*(s) = max_a q*(s,a)` holding exactly: the last
/// sweep computes `q*` from the previous iterate and takes `v*` as its row
/// maxima.
pub fn value_iteration_exact(mdp: &TabularMdp, tol: f64) -> Result<(ValueTable, QTable)> {
    check_size(mdp)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter {
            name: "tol",
            value: tol,
            expected: "a tolerance > 0",
        });
    }
    let n = mdp.n_states();
    let mut v = vec![0.0; n];
    let mut delta = f64::INFINITY;
    for _ in 0..VALUE_ITERATION_MAX_SWEEPS {
        let q = action_values(mdp, &v);
        let next: Vec<f64> = (0..n)
            .map(|s| if mdp.is_terminal(s) { 0.0 } else { q.max(s) })
            .collect();
        delta = next
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        if !delta.is_finite() {
            break;
        }
        v = next;
        if delta <= tol {
            return Ok((ValueTable::from_values(v, mdp.terminal_mask())?, q));
        }
    }
    Err(Error::NotConverged {
        sweeps: VALUE_ITERATION_MAX_SWEEPS,
        delta,
    })
}

/// Deterministic greedy policy; ties go to the lowest action index.
pub fn greedy_policy_from_q(q: &QTable) -> TabularPolicy {
    let actions: Vec<usize> = (0..q.n_states()).map(|s| argmax(q.row(s))).collect();
    TabularPolicy::deterministic(&actions, q.n_actions()).expect("argmax is in range")
}

/// Stationary distribution `d` of the chain induced by `policy`.
///
/// Solves `(I - P_π + 1 1ᵀ)ᵀ d = 1`, whose matrix is nonsingular exactly when
/// the chain has a single recurrent class, i.e. a unique stationary
/// distribution.
pub fn stationary_distribution(mdp: &TabularMdp, policy: &TabularPolicy) -> Result<Vec<f64>> {
    check_size(mdp)?;
    mdp.check_policy(policy)?;
    let n = mdp.n_states();
    let (p, _) = mdp.policy_kernel(policy);
    // transpose of (I - P + E)
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let identity = if i == j { 1.0 } else { 0.0 };
            a[j * n + i] = identity - p[i * n + j] + 1.0;
        }
    }
    let ones = vec![1.0; n];
    let mut d = linalg::solve(&a, n, &ones).ok_or(Error::NoUniqueStationary)?;
    for x in d.iter_mut() {
        if *x < -1e-12 {
            return Err(Error::NoUniqueStationary);
        }
        *x = x.max(0.0);
    }
    let sum: f64 = d.iter().sum();
    for x in d.iter_mut() {
        *x /= sum;
    }
    let residual = (0..n)
        .map(|j| {
            let flow: f64 = (0..n).map(|i| d[i] * p[i * n + j]).sum();
            (flow - d[j]).abs()
        })
        .fold(0.0, f64::max);
    if residual > 1e-10 {
        return Err(Error::NoUniqueStationary);
    }
    Ok(d)
}

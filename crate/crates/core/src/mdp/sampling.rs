use alloc::vec::Vec;

use rand_core::RngCore;

use super::{Step, TabularMdp, TabularPolicy, Trajectory};
use crate::error::{Error, Result};
use crate::rng;

/// Samples `(next_state, reward)` for taking `a` in `s`.
///
/// The reward is the outcome's reward plus Gaussian noise when the MDP has a
/// nonzero [`TabularMdp::reward_noise`].
pub fn sample_transition<R: RngCore>(
    mdp: &TabularMdp,
    s: usize,
    a: usize,
    rng: &mut R,
) -> (usize, f64) {
    let outcomes = mdp.outcomes(s, a);
    let u = rng::uniform(rng);
    let mut acc = 0.0;
    let mut chosen = outcomes[outcomes.len() - 1];
    for o in outcomes {
        acc += o.prob;
        if u < acc {
            chosen = *o;
            break;
        }
    }
    let mut reward = chosen.reward;
    if mdp.reward_noise() > 0.0 {
        reward += mdp.reward_noise() * rng::standard_normal(rng);
    }
    (chosen.next, reward)
}

/// Rolls out `policy` from `start` until a terminal state or `max_steps`.
///
/// Each step draws the action from `π(·|s)` and then the successor from
/// `P^a_{s·}`, both from one ChaCha8 stream seeded with `seed`.
pub fn sample_episode(
    mdp: &TabularMdp,
    policy: &TabularPolicy,
    start: usize,
    seed: u64,
    max_steps: usize,
) -> Result<Trajectory> {
    mdp.check_state(start)?;
    mdp.check_policy(policy)?;
    if mdp.is_terminal(start) {
        return Err(Error::TerminalState(start));
    }
    if max_steps == 0 {
        return Err(Error::InvalidParameter {
            name: "max_steps",
            value: 0.0,
            expected: "at least one step",
        });
    }
    let mut rng = rng::seeded(seed);
    let mut steps = Vec::new();
    let mut s = start;
    for _ in 0..max_steps {
        let a = rng::categorical(&mut rng, policy.row(s));
        let (next, reward) = sample_transition(mdp, s, a, &mut rng);
        let done = mdp.is_terminal(next);
        steps.push(Step {
            state: s,
            action: a,
            reward,
            next_state: next,
            done,
        });
        if done {
            break;
        }
        s = next;
    }
    Trajectory::new(steps, seed)
}

/// `Σ_k γ^k R_{k+1}`, accumulated right to left. Empty input gives 0.
pub fn discounted_return(rewards: &[f64], gamma: f64) -> f64 {
    rewards.iter().rev().fold(0.0, |g, &r| r + gamma * g)
}

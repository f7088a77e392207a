//! Tabular and linear reinforcement learning with exact oracles.
//!
//! `tdrl-core` is `no_std` (it needs `alloc`). It contains:
//!
//! * [`mdp`]: finite MDPs, policies, trajectories, and the exact
//!   dynamic-programming solvers every learner is checked against.
//! * [`prediction`]: TD(0), n-step and λ-returns, forward and backward TD(λ).
//! * [`control`]: ε-greedy, SARSA(0), forward and backward SARSA(λ), Q-learning.
//! * [`linear`]: linear value functions, semi-gradient updates, feature traces,
//!   LSTD and LSTDQ.
//! * [`policy_gradient`]: softmax policies, score functions, objectives and
//!   their exact gradients, actor-critic and advantage actor-critic.
//! * [`env`]: random walk, gridworld and a toy trading environment with a
//!   differential Sharpe ratio reward.
//! * [`agents`]: episode drivers that bind the update rules to an
//!   [`env::Environment`].
//!
//! Everything is deterministic given an explicit seed; see [`rng`].

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agents;
pub mod control;
pub mod env;
mod error;
pub mod linear;
mod linalg;
mod math;
pub mod mdp;
pub mod policy_gradient;
pub mod prediction;
pub mod rng;

pub use error::{Error, Result};

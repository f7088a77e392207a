//! Finite MDPs, policies, trajectories, and exact dynamic-programming
//! solvers.
//!
//! Terminal states are absorbing zero-reward self-loops and their values are
//! pinned at zero, which keeps undiscounted (`γ = 1`) episodic chains
//! well-posed. Argmax ties are broken toward the lowest action index
//! everywhere.

mod exact;
mod model;
mod sampling;

pub use exact::{
    action_values, greedy_policy_from_q, policy_evaluation_exact, stationary_distribution,
    value_iteration_exact, MAX_EXACT_STATES, VALUE_ITERATION_MAX_SWEEPS,
};
pub use model::{
    MdpBuilder, Outcome, QTable, Step, TabularMdp, TabularPolicy, Trajectory, ValueTable,
    STOCHASTIC_TOLERANCE,
};
pub use sampling::{discounted_return, sample_episode, sample_transition};

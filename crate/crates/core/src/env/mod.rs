//! Benchmark environments.
//!
//! Every environment exposes discrete state and action indices through
//! [`Environment`]. The random walk and gridworld are backed by a
//! [`TabularMdp`] that is also handed out for oracle use; the trading
//! environment replays a price series and has no exact model.

mod dsr;
mod gridworld;
mod prices;
mod random_walk;
mod trading;

pub use dsr::{dsr_update, DsrAccumulator, DSR_VARIANCE_FLOOR};
pub use gridworld::{gridworld_mdp, make_gridworld, GridAction};
pub use prices::{random_walk_prices, sine_prices};
pub use random_walk::{make_random_walk, random_walk_mdp};
pub use trading::{
    trading_step, Position, TradingEnv, TradingReward, TradingState,
};

use crate::error::{Error, Result};
use crate::mdp::{sample_transition, TabularMdp};
use crate::rng::{self, Rng};

/// Result of one environment step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub next_state: usize,
    pub reward: f64,
    pub done: bool,
}

/// The agent-environment interface.
///
/// `reset` starts a new episode and must be called before the first `step`.
/// Stepping a finished episode fails with [`Error::EpisodeFinished`].
pub trait Environment {
    fn n_states(&self) -> usize;

    fn n_actions(&self) -> usize;

    /// Starts a new episode and returns the initial state.
    fn reset(&mut self, seed: u64) -> usize;

    fn step(&mut self, action: usize) -> Result<StepOutcome>;

    /// The exact model, when the environment has one.
    fn model(&self) -> Option<&TabularMdp> {
        None
    }
}

/// How a [`TabularEnv`] chooses its initial state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Start {
    Fixed(usize),
    /// Uniform over the non-terminal states.
    UniformNonTerminal,
}

/// An environment that samples a [`TabularMdp`].
#[derive(Debug, Clone)]
pub struct TabularEnv {
    mdp: TabularMdp,
    start: Start,
    rng: Rng,
    state: usize,
    done: bool,
}

impl TabularEnv {
    pub fn new(mdp: TabularMdp, start: Start) -> Result<Self> {
        match start {
            Start::Fixed(s) => {
                mdp.check_state(s)?;
                if mdp.is_terminal(s) {
                    return Err(Error::TerminalState(s));
                }
            }
            Start::UniformNonTerminal => {
                if mdp.terminal_states().count() == mdp.n_states() {
                    return Err(Error::InvalidParameter {
                        name: "start",
                        value: 0.0,
                        expected: "at least one non-terminal state",
                    });
                }
            }
        }
        Ok(Self {
            mdp,
            start,
            rng: rng::seeded(0),
            state: 0,
            done: true,
        })
    }

    pub fn mdp(&self) -> &TabularMdp {
        &self.mdp
    }

    pub fn state(&self) -> usize {
        self.state
    }
}

impl Environment for TabularEnv {
    fn n_states(&self) -> usize {
        self.mdp.n_states()
    }

    fn n_actions(&self) -> usize {
        self.mdp.n_actions()
    }

    fn reset(&mut self, seed: u64) -> usize {
        self.rng = rng::seeded(seed);
        self.state = match self.start {
            Start::Fixed(s) => s,
            Start::UniformNonTerminal => {
                let candidates: alloc::vec::Vec<usize> = (0..self.mdp.n_states())
                    .filter(|&s| !self.mdp.is_terminal(s))
                    .collect();
                candidates[rng::index(&mut self.rng, candidates.len())]
            }
        };
        self.done = false;
        self.state
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        self.mdp.check_action(action)?;
        let (next, reward) = sample_transition(&self.mdp, self.state, action, &mut self.rng);
        self.state = next;
        self.done = self.mdp.is_terminal(next);
        Ok(StepOutcome {
            next_state: next,
            reward,
            done: self.done,
        })
    }

    fn model(&self) -> Option<&TabularMdp> {
        Some(&self.mdp)
    }
}

use alloc::collections::VecDeque;
use alloc::vec::Vec;

use super::{DsrAccumulator, Environment, StepOutcome};
use crate::error::{Error, Result};

/// Held position: short, flat or long one unit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Position {
    Short,
    Flat,
    Long,
}

impl Position {
    pub fn units(self) -> i64 {
        match self {
            Position::Short => -1,
            Position::Flat => 0,
            Position::Long => 1,
        }
    }

    /// Action index used by [`TradingEnv`]: 0 short, 1 flat, 2 long.
    pub fn index(self) -> usize {
        (self.units() + 1) as usize
    }

    pub fn from_index(i: usize) -> Result<Self> {
        Self::try_from(i as i64 - 1)
    }
}

impl TryFrom<i64> for Position {
    type Error = Error;

    fn try_from(units: i64) -> Result<Self> {
        match units {
            -1 => Ok(Position::Short),
            0 => Ok(Position::Flat),
            1 => Ok(Position::Long),
            other => Err(Error::InvalidPosition(other)),
        }
    }
}

/// Position, recent price window and per-unit transaction cost.
#[derive(Debug, Clone, PartialEq)]
pub struct TradingState {
    position: Position,
    window: VecDeque<f64>,
    cost: f64,
}

impl TradingState {
    pub fn new(position: Position, window: &[f64], cost: f64) -> Result<Self> {
        if window.is_empty() {
            return Err(Error::InvalidParameter {
                name: "window",
                value: 0.0,
                expected: "at least one price",
            });
        }
        if let Some(&p) = window.iter().find(|p| !(**p > 0.0 && p.is_finite())) {
            return Err(Error::InvalidParameter {
                name: "price",
                value: p,
                expected: "a positive price",
            });
        }
        if !(cost >= 0.0 && cost.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "cost",
                value: cost,
                expected: "a transaction cost >= 0",
            });
        }
        Ok(Self {
            position,
            window: window.iter().copied().collect(),
            cost,
        })
    }

    pub fn position(&self) -> Position {
        self.position
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn window(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        self.window.iter().copied()
    }

    pub fn last_price(&self) -> f64 {
        *self.window.back().expect("window is non-empty")
    }
}

/// Moves to position `action` and marks to `next_price`.
///
/// The reward is `position_prev (p_t - p_{t-1}) - cost |action - position_prev|`:
/// the held position earns the price move, and changing position pays the
/// cost per unit traded. The window drops its oldest price and appends
/// `next_price`.
pub fn trading_step(
    state: &TradingState,
    action: i64,
    next_price: f64,
) -> Result<(TradingState, f64)> {
    let target = Position::try_from(action)?;
    if !(next_price > 0.0 && next_price.is_finite()) {
        return Err(Error::InvalidParameter {
            name: "price",
            value: next_price,
            expected: "a positive price",
        });
    }
    let prev = state.position.units();
    let price_change = next_price - state.last_price();
    let traded = (target.units() - prev).abs() as f64;
    let reward = prev as f64 * price_change - state.cost * traded;

    let mut window = state.window.clone();
    window.pop_front();
    window.push_back(next_price);
    Ok((
        TradingState {
            position: target,
            window,
            cost: state.cost,
        },
        reward,
    ))
}

/// Reward signal emitted by [`TradingEnv`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TradingReward {
    /// Position-weighted price change net of costs.
    Raw,
    /// Differential Sharpe ratio of the raw reward stream.
    DifferentialSharpe { eta: f64 },
}

/// Replays a price series; one episode walks the whole series once.
///
/// The observed state encodes the sign of each of the `window - 1` most
/// recent price changes (down, unchanged, up) and the current position, for
/// `3^(window-1) * 3` states. Actions are 0 short, 1 flat, 2 long.
#[derive(Debug, Clone)]
pub struct TradingEnv {
    prices: Vec<f64>,
    window: usize,
    cost: f64,
    reward: TradingReward,
    state: Option<TradingState>,
    t: usize,
    dsr: Option<DsrAccumulator>,
    done: bool,
}

impl TradingEnv {
    pub fn new(prices: Vec<f64>, window: usize, cost: f64, reward: TradingReward) -> Result<Self> {
        if window < 2 {
            return Err(Error::InvalidParameter {
                name: "window",
                value: window as f64,
                expected: "a window of at least 2 prices",
            });
        }
        if window > 12 {
            return Err(Error::InvalidParameter {
                name: "window",
                value: window as f64,
                expected: "a window of at most 12 prices",
            });
        }
        if prices.len() <= window {
            return Err(Error::InvalidParameter {
                name: "prices",
                value: prices.len() as f64,
                expected: "more prices than the window length",
            });
        }
        // validates prices and cost
        TradingState::new(Position::Flat, &prices, cost)?;
        let dsr = match reward {
            TradingReward::Raw => None,
            TradingReward::DifferentialSharpe { eta } => Some(DsrAccumulator::new(eta)?),
        };
        Ok(Self {
            prices,
            window,
            cost,
            reward,
            state: None,
            t: 0,
            dsr,
            done: true,
        })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn reward_mode(&self) -> TradingReward {
        self.reward
    }

    pub fn trading_state(&self) -> Option<&TradingState> {
        self.state.as_ref()
    }

    fn encode(&self, state: &TradingState) -> usize {
        let prices: Vec<f64> = state.window().collect();
        let mut code = 0;
        for w in prices.windows(2) {
            let sign = if w[1] > w[0] {
                2
            } else if w[1] < w[0] {
                0
            } else {
                1
            };
            code = code * 3 + sign;
        }
        code * 3 + state.position().index()
    }
}

impl Environment for TradingEnv {
    fn n_states(&self) -> usize {
        3usize.pow(self.window as u32)
    }

    fn n_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, _seed: u64) -> usize {
        let state = TradingState::new(Position::Flat, &self.prices[..self.window], self.cost)
            .expect("validated at construction");
        self.t = self.window - 1;
        if let Some(acc) = self.dsr.as_mut() {
            acc.reset();
        }
        self.done = false;
        let s = self.encode(&state);
        self.state = Some(state);
        s
    }

    fn step(&mut self, action: usize) -> Result<StepOutcome> {
        if self.done {
            return Err(Error::EpisodeFinished);
        }
        let target = Position::from_index(action)?;
        let current = self.state.as_ref().expect("reset before step");
        let (next, raw) = trading_step(current, target.units(), self.prices[self.t + 1])?;
        self.t += 1;
        let reward = match self.dsr.as_mut() {
            Some(acc) => acc.update(raw),
            None => raw,
        };
        self.done = self.t + 1 == self.prices.len();
        let s = self.encode(&next);
        self.state = Some(next);
        Ok(StepOutcome {
            next_state: s,
            reward,
            done: self.done,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::random_walk_prices;
    use crate::rng;

    fn state(position: Position, prices: &[f64], cost: f64) -> TradingState {
        TradingState::new(position, prices, cost).unwrap()
    }

    #[test]
    fn reversal_pays_cost_on_two_units() {
        let s = state(Position::Long, &[10.0, 10.0], 0.1);
        let (next, r) = trading_step(&s, -1, 12.0).unwrap();
        assert!((r - 1.8).abs() < 1e-12);
        assert_eq!(next.position(), Position::Short);
        assert_eq!(next.window().collect::<Vec<_>>(), [10.0, 12.0]);
    }

    #[test]
    fn flat_without_trade_earns_nothing() {
        let s = state(Position::Flat, &[5.0, 7.0, 6.0], 0.3);
        let (_, r) = trading_step(&s, 0, 9.5).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn invalid_action_and_price() {
        let s = state(Position::Flat, &[5.0], 0.0);
        assert_eq!(trading_step(&s, 2, 5.0).unwrap_err(), Error::InvalidPosition(2));
        assert!(trading_step(&s, 1, -1.0).is_err());
    }

    #[test]
    fn round_trip_earns_price_change_while_long() {
        let prices = [100.0, 101.5, 99.0, 104.0, 103.0, 107.5];
        let mut s = state(Position::Flat, &prices[..1], 0.0);
        let mut total = 0.0;
        // long from index 1 through 4, then flat
        let plan = [1, 1, 1, 1, 0];
        for (i, &a) in plan.iter().enumerate() {
            let (next, r) = trading_step(&s, a, prices[i + 1]).unwrap();
            total += r;
            s = next;
        }
        // entered long at 101.5 (after the first step), exited at 107.5
        assert!((total - (107.5 - 101.5)).abs() < 1e-12);
    }

    #[test]
    fn env_state_encoding_and_episode_length() {
        let prices = alloc::vec![1.0, 2.0, 2.0, 1.5, 3.0];
        let mut env = TradingEnv::new(prices, 3, 0.0, TradingReward::Raw).unwrap();
        assert_eq!(env.n_states(), 27);
        // changes: up, flat -> code (2*3 + 1) * 3 + flat(1)
        assert_eq!(env.reset(0), 22);
        let o = env.step(2).unwrap();
        // window [2, 2, 1.5]: flat, down; now long
        assert_eq!(o.next_state, (1 * 3 + 0) * 3 + 2);
        assert!(!o.done);
        let o = env.step(2).unwrap();
        assert!(o.done);
        assert!((o.reward - 1.5).abs() < 1e-12);
        assert_eq!(env.step(1), Err(Error::EpisodeFinished));
    }

    #[test]
    fn zero_cost_accounting_telescopes() {
        let prices = random_walk_prices(50.0, 0.0, 0.02, 10_002, 4).unwrap();
        let mut env = TradingEnv::new(prices.clone(), 2, 0.0, TradingReward::Raw).unwrap();
        env.reset(0);
        let mut r = rng::seeded(8);
        let mut total = 0.0;
        let mut expected = 0.0;
        let mut prev = 0i64;
        // the first decision is made at index 1, after the initial window
        for t in 2..prices.len() {
            let a = rng::index(&mut r, 3);
            let o = env.step(a).unwrap();
            total += o.reward;
            expected += prev as f64 * (prices[t] - prices[t - 1]);
            prev = a as i64 - 1;
        }
        assert!((total - expected).abs() <= 1e-9);
    }

    #[test]
    fn dsr_reward_mode_is_zero_during_warmup() {
        let prices = random_walk_prices(50.0, 0.0, 0.02, 100, 1).unwrap();
        let mut env =
            TradingEnv::new(prices, 2, 0.0, TradingReward::DifferentialSharpe { eta: 0.1 }).unwrap();
        env.reset(0);
        for _ in 0..30 {
            assert_eq!(env.step(2).unwrap().reward, 0.0);
        }
        assert_ne!(env.step(2).unwrap().reward, 0.0);
    }
}

use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use crate::error::{check_discount, Error, Result};

/// Tolerance on row sums of transition kernels and policies.
pub const STOCHASTIC_TOLERANCE: f64 = 1e-12;

/// One possible result of taking an action: successor, probability and the
/// reward received on that transition.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub next: usize,
    pub prob: f64,
    pub reward: f64,
}

/// A finite MDP with terminal states modelled as zero-reward self-loops.
///
/// Transitions are stored sparsely per `(s, a)`. Each outcome carries its own
/// reward; the expected reward `R^a_s` is the probability-weighted mean.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularMdp {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    outcomes: Vec<Vec<Outcome>>,
    expected_reward: Vec<f64>,
    terminal: Vec<bool>,
    reward_noise: f64,
}

impl TabularMdp {
    pub fn builder(n_states: usize, n_actions: usize, gamma: f64) -> MdpBuilder {
        MdpBuilder {
            n_states,
            n_actions,
            gamma,
            terminal: vec![false; n_states],
            bad_terminal: None,
            records: Vec::new(),
        }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Returns a copy with a different discount.
    pub fn with_gamma(&self, gamma: f64) -> Result<Self> {
        check_discount(gamma)?;
        Ok(Self {
            gamma,
            ..self.clone()
        })
    }

    /// Standard deviation of additive Gaussian noise on sampled rewards.
    /// Zero means sampled rewards are the per-outcome rewards exactly.
    pub fn reward_noise(&self) -> f64 {
        self.reward_noise
    }

    pub fn with_reward_noise(mut self, sigma: f64) -> Result<Self> {
        if !(sigma >= 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "reward_noise",
                value: sigma,
                expected: "a finite standard deviation >= 0",
            });
        }
        self.reward_noise = sigma;
        Ok(self)
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub fn terminal_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.terminal
            .iter()
            .enumerate()
            .filter_map(|(s, &t)| t.then_some(s))
    }

    pub fn terminal_mask(&self) -> &[bool] {
        &self.terminal
    }

    pub fn outcomes(&self, s: usize, a: usize) -> &[Outcome] {
        &self.outcomes[s * self.n_actions + a]
    }

    /// `R^a_s`, the expected immediate reward.
    pub fn expected_reward(&self, s: usize, a: usize) -> f64 {
        self.expected_reward[s * self.n_actions + a]
    }

    /// `P^a_{ss'}`.
    pub fn prob(&self, s: usize, a: usize, next: usize) -> f64 {
        self.outcomes(s, a)
            .iter()
            .filter(|o| o.next == next)
            .map(|o| o.prob)
            .sum()
    }

    pub fn check_state(&self, s: usize) -> Result<()> {
        if s < self.n_states {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                index: s,
                n_states: self.n_states,
            })
        }
    }

    pub fn check_action(&self, a: usize) -> Result<()> {
        if a < self.n_actions {
            Ok(())
        } else {
            Err(Error::ActionOutOfRange {
                index: a,
                n_actions: self.n_actions,
            })
        }
    }

    pub(crate) fn check_policy(&self, policy: &TabularPolicy) -> Result<()> {
        if policy.n_states() != self.n_states {
            return Err(Error::DimensionMismatch {
                expected: self.n_states,
                found: policy.n_states(),
            });
        }
        if policy.n_actions() != self.n_actions {
            return Err(Error::DimensionMismatch {
                expected: self.n_actions,
                found: policy.n_actions(),
            });
        }
        Ok(())
    }

    /// Dense row-major `P_π` and `r_π` under a policy.
    pub(crate) fn policy_kernel(&self, policy: &TabularPolicy) -> (Vec<f64>, Vec<f64>) {
        let n = self.n_states;
        let mut p = vec![0.0; n * n];
        let mut r = vec![0.0; n];
        for s in 0..n {
            for a in 0..self.n_actions {
                let pa = policy.prob(s, a);
                if pa == 0.0 {
                    continue;
                }
                r[s] += pa * self.expected_reward(s, a);
                for o in self.outcomes(s, a) {
                    p[s * n + o.next] += pa * o.prob;
                }
            }
        }
        (p, r)
    }
}

/// Incremental constructor for [`TabularMdp`]; [`MdpBuilder::build`]
/// validates the kernel.
#[derive(Debug, Clone)]
pub struct MdpBuilder {
    n_states: usize,
    n_actions: usize,
    gamma: f64,
    terminal: Vec<bool>,
    bad_terminal: Option<usize>,
    records: Vec<(usize, usize, Outcome)>,
}

impl MdpBuilder {
    pub fn terminal(mut self, s: usize) -> Self {
        self.set_terminal(s);
        self
    }

    pub fn set_terminal(&mut self, s: usize) {
        match self.terminal.get_mut(s) {
            Some(t) => *t = true,
            None => self.bad_terminal = Some(s),
        }
    }

    pub fn transition(mut self, s: usize, a: usize, next: usize, prob: f64, reward: f64) -> Self {
        self.add(s, a, next, prob, reward);
        self
    }

    pub fn add(&mut self, s: usize, a: usize, next: usize, prob: f64, reward: f64) {
        self.records.push((s, a, Outcome { next, prob, reward }));
    }

    pub fn build(self) -> Result<TabularMdp> {
        let Self {
            n_states,
            n_actions,
            gamma,
            terminal,
            bad_terminal,
            records,
        } = self;
        if let Some(s) = bad_terminal {
            return Err(Error::StateOutOfRange { index: s, n_states });
        }
        if n_states == 0 {
            return Err(Error::InvalidParameter {
                name: "n_states",
                value: 0.0,
                expected: "at least one state",
            });
        }
        if n_actions == 0 {
            return Err(Error::InvalidParameter {
                name: "n_actions",
                value: 0.0,
                expected: "at least one action",
            });
        }
        check_discount(gamma)?;

        let mut outcomes = vec![Vec::new(); n_states * n_actions];
        for (s, a, o) in records {
            if s >= n_states {
                return Err(Error::StateOutOfRange { index: s, n_states });
            }
            if o.next >= n_states {
                return Err(Error::StateOutOfRange {
                    index: o.next,
                    n_states,
                });
            }
            if a >= n_actions {
                return Err(Error::ActionOutOfRange {
                    index: a,
                    n_actions,
                });
            }
            if !(o.prob >= 0.0 && o.prob.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "probability",
                    value: o.prob,
                    expected: "a finite probability >= 0",
                });
            }
            if !o.reward.is_finite() {
                return Err(Error::NonFinite("transition reward"));
            }
            if terminal[s] {
                // terminal self-loops are installed below; only the same
                // zero-reward self-loop may be given explicitly
                if o.next != s || o.reward != 0.0 {
                    return Err(Error::InvalidParameter {
                        name: "terminal transition",
                        value: s as f64,
                        expected: "terminal states to be zero-reward self-loops",
                    });
                }
                continue;
            }
            if o.prob > 0.0 {
                outcomes[s * n_actions + a].push(o);
            }
        }

        let mut expected_reward = vec![0.0; n_states * n_actions];
        for s in 0..n_states {
            for a in 0..n_actions {
                let idx = s * n_actions + a;
                if terminal[s] {
                    outcomes[idx] = vec![Outcome {
                        next: s,
                        prob: 1.0,
                        reward: 0.0,
                    }];
                    continue;
                }
                let sum: f64 = outcomes[idx].iter().map(|o| o.prob).sum();
                if (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                    return Err(Error::NotStochastic {
                        what: "transition",
                        row: idx,
                        sum,
                    });
                }
                expected_reward[idx] = outcomes[idx].iter().map(|o| o.prob * o.reward).sum();
            }
        }

        Ok(TabularMdp {
            n_states,
            n_actions,
            gamma,
            outcomes,
            expected_reward,
            terminal,
            reward_noise: 0.0,
        })
    }
}

/// A stochastic policy `π(a|s)` stored as a dense row-major table.
#[derive(Debug, Clone, PartialEq)]
pub struct TabularPolicy {
    n_states: usize,
    n_actions: usize,
    probs: Vec<f64>,
}

impl TabularPolicy {
    pub fn from_rows(n_states: usize, n_actions: usize, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch {
                expected: n_states * n_actions,
                found: probs.len(),
            });
        }
        for s in 0..n_states {
            let row = &probs[s * n_actions..(s + 1) * n_actions];
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(*p >= 0.0)) || (sum - 1.0).abs() > STOCHASTIC_TOLERANCE {
                return Err(Error::NotStochastic {
                    what: "policy",
                    row: s,
                    sum,
                });
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            probs,
        })
    }

    pub fn uniform(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            probs: vec![1.0 / n_actions as f64; n_states * n_actions],
        }
    }

    /// Deterministic policy choosing `actions[s]` in state `s`.
    pub fn deterministic(actions: &[usize], n_actions: usize) -> Result<Self> {
        let mut probs = vec![0.0; actions.len() * n_actions];
        for (s, &a) in actions.iter().enumerate() {
            if a >= n_actions {
                return Err(Error::ActionOutOfRange {
                    index: a,
                    n_actions,
                });
            }
            probs[s * n_actions + a] = 1.0;
        }
        Ok(Self {
            n_states: actions.len(),
            n_actions,
            probs,
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn prob(&self, s: usize, a: usize) -> f64 {
        self.probs[s * self.n_actions + a]
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.probs[s * self.n_actions..(s + 1) * self.n_actions]
    }

    /// The action of a deterministic row, if the row is deterministic.
    pub fn action(&self, s: usize) -> Option<usize> {
        let row = self.row(s);
        row.iter().position(|&p| p == 1.0)
    }
}

/// One transition `(S_t, A_t, R_{t+1}, S_{t+1}, done)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub done: bool,
}

impl Step {
    /// The state to bootstrap from, or `None` when the step ended the episode.
    pub fn bootstrap_state(&self) -> Option<usize> {
        (!self.done).then_some(self.next_state)
    }
}

/// An ordered sequence of steps and the seed that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    steps: Vec<Step>,
    seed: u64,
}

impl Trajectory {
    /// Validates chaining (`next_state` of step t is `state` of step t+1)
    /// and that only the last step may be terminal.
    pub fn new(steps: Vec<Step>, seed: u64) -> Result<Self> {
        for w in steps.windows(2) {
            if w[0].next_state != w[1].state {
                return Err(Error::MalformedTrajectory("next_state does not chain"));
            }
            if w[0].done {
                return Err(Error::MalformedTrajectory("done before the last step"));
            }
        }
        Ok(Self { steps, seed })
    }

    pub fn steps(&self) -> &[Step] {
        &self.steps
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// True when the last step reached a terminal state.
    pub fn is_complete(&self) -> bool {
        self.steps.last().is_some_and(|s| s.done)
    }

    pub fn rewards(&self) -> impl Iterator<Item = f64> + '_ {
        self.steps.iter().map(|s| s.reward)
    }
}

/// State values `V(s)`. Terminal entries are pinned at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct ValueTable {
    v: Vec<f64>,
    terminal: Vec<bool>,
}

impl ValueTable {
    pub fn zeros(n_states: usize) -> Self {
        Self {
            v: vec![0.0; n_states],
            terminal: vec![false; n_states],
        }
    }

    /// Zero table that knows which states of `mdp` are terminal.
    pub fn for_mdp(mdp: &TabularMdp) -> Self {
        Self {
            v: vec![0.0; mdp.n_states()],
            terminal: mdp.terminal_mask().to_vec(),
        }
    }

    /// Builds a table from values; terminal entries are forced to zero.
    pub fn from_values(mut v: Vec<f64>, terminal: &[bool]) -> Result<Self> {
        if v.len() != terminal.len() {
            return Err(Error::DimensionMismatch {
                expected: terminal.len(),
                found: v.len(),
            });
        }
        for (x, &t) in v.iter_mut().zip(terminal) {
            if t {
                *x = 0.0;
            }
            if !x.is_finite() {
                return Err(Error::NonFinite("value table"));
            }
        }
        Ok(Self {
            v,
            terminal: terminal.to_vec(),
        })
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.v
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    pub(crate) fn check_updatable(&self, s: usize) -> Result<()> {
        if s >= self.v.len() {
            return Err(Error::StateOutOfRange {
                index: s,
                n_states: self.v.len(),
            });
        }
        if self.terminal[s] {
            return Err(Error::TerminalState(s));
        }
        Ok(())
    }

    pub(crate) fn check_state(&self, s: usize) -> Result<()> {
        if s < self.v.len() {
            Ok(())
        } else {
            Err(Error::StateOutOfRange {
                index: s,
                n_states: self.v.len(),
            })
        }
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.v
    }
}

impl Index<usize> for ValueTable {
    type Output = f64;

    fn index(&self, s: usize) -> &f64 {
        &self.v[s]
    }
}

/// Action values `Q(s, a)`, row-major. Terminal rows are pinned at zero.
#[derive(Debug, Clone, PartialEq)]
pub struct QTable {
    n_states: usize,
    n_actions: usize,
    q: Vec<f64>,
    terminal: Vec<bool>,
}

impl QTable {
    pub fn zeros(n_states: usize, n_actions: usize) -> Self {
        Self {
            n_states,
            n_actions,
            q: vec![0.0; n_states * n_actions],
            terminal: vec![false; n_states],
        }
    }

    pub fn for_mdp(mdp: &TabularMdp) -> Self {
        Self {
            n_states: mdp.n_states(),
            n_actions: mdp.n_actions(),
            q: vec![0.0; mdp.n_states() * mdp.n_actions()],
            terminal: mdp.terminal_mask().to_vec(),
        }
    }

    pub fn from_values(
        n_states: usize,
        n_actions: usize,
        mut q: Vec<f64>,
        terminal: &[bool],
    ) -> Result<Self> {
        if q.len() != n_states * n_actions {
            return Err(Error::DimensionMismatch {
                expected: n_states * n_actions,
                found: q.len(),
            });
        }
        if terminal.len() != n_states {
            return Err(Error::DimensionMismatch {
                expected: n_states,
                found: terminal.len(),
            });
        }
        for s in 0..n_states {
            for a in 0..n_actions {
                let x = &mut q[s * n_actions + a];
                if terminal[s] {
                    *x = 0.0;
                }
                if !x.is_finite() {
                    return Err(Error::NonFinite("q table"));
                }
            }
        }
        Ok(Self {
            n_states,
            n_actions,
            q,
            terminal: terminal.to_vec(),
        })
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn values(&self) -> &[f64] {
        &self.q
    }

    pub fn row(&self, s: usize) -> &[f64] {
        &self.q[s * self.n_actions..(s + 1) * self.n_actions]
    }

    pub fn get(&self, s: usize, a: usize) -> f64 {
        self.q[s * self.n_actions + a]
    }

    pub fn is_terminal(&self, s: usize) -> bool {
        self.terminal[s]
    }

    /// Greedy action, ties to the lowest index.
    pub fn greedy_action(&self, s: usize) -> usize {
        crate::math::argmax(self.row(s))
    }

    /// `max_a Q(s, a)`.
    pub fn max(&self, s: usize) -> f64 {
        self.row(s).iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub(crate) fn check_pair(&self, s: usize, a: usize) -> Result<()> {
        if s >= self.n_states {
            return Err(Error::StateOutOfRange {
                index: s,
                n_states: self.n_states,
            });
        }
        if a >= self.n_actions {
            return Err(Error::ActionOutOfRange {
                index: a,
                n_actions: self.n_actions,
            });
        }
        Ok(())
    }

    pub(crate) fn check_updatable(&self, s: usize, a: usize) -> Result<()> {
        self.check_pair(s, a)?;
        if self.terminal[s] {
            return Err(Error::TerminalState(s));
        }
        Ok(())
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.q
    }
}

impl Index<(usize, usize)> for QTable {
    type Output = f64;

    fn index(&self, (s, a): (usize, usize)) -> &f64 {
        &self.q[s * self.n_actions + a]
    }
}

//! Episode drivers that bind the update rules to an [`Environment`].
//!
//! Every agent owns its RNG (seeded at construction) for action selection;
//! the environment is reset with the seed passed to
//! [`Agent::run_episode`]. Episodes are truncated after `max_steps`, in
//! which case the last update bootstraps from the final state.

use alloc::vec;
use alloc::vec::Vec;

use crate::control::{
    epsilon_greedy, q_learning_update, sarsa0_update, sarsa_lambda_backward_offline,
    sarsa_lambda_backward_step, sarsa_lambda_forward_episode, ExplorationSchedule, QTraceTable,
};
use crate::env::Environment;
use crate::error::{check_discount, check_step_size, check_unit_interval, Error, Result};
use crate::linear::{
    linear_td0_step, linear_td_lambda_step, lstd_solve, lstdq_solve, q_hat,
    sarsa_lambda_approx_step, v_hat, Experience, ExperienceBatch, FeatureKind, FeatureMap,
    FeatureTrace, LstdConfig, WeightVector,
};
use crate::math;
use crate::mdp::{
    policy_evaluation_exact, value_iteration_exact, QTable, Step, TabularMdp, TabularPolicy,
    Trajectory, ValueTable,
};
use crate::policy_gradient::{
    actor_critic_step, advantage_actor_critic_step, score_function, softmax_policy, ActionValueCritic,
    ActorTrace, SoftmaxPolicy, StateValueCritic,
};
use crate::prediction::{
    n_step_return, td0_update, td_lambda_backward_offline, td_lambda_backward_step,
    td_lambda_forward_episode, StepSize, TraceTable,
};
use crate::rng::{self, Rng};

/// Undiscounted return and length of one episode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpisodeSummary {
    pub episode_return: f64,
    pub steps: usize,
}

/// What an agent's value estimate should be compared against.
#[derive(Debug, Clone, Copy)]
pub enum Oracle<'a> {
    /// `v_π` of a fixed policy.
    Policy(&'a TabularPolicy),
    /// `v*`.
    Optimal,
    None,
}

pub trait Agent {
    fn run_episode(
        &mut self,
        env: &mut dyn Environment,
        env_seed: u64,
        max_steps: usize,
    ) -> Result<EpisodeSummary>;

    /// Current state-value estimate: `V` for prediction agents, `max_a Q`
    /// for control agents.
    fn state_values(&self) -> Option<Vec<f64>>;

    fn oracle(&self) -> Oracle<'_>;
}

/// Exact values for an [`Oracle`] on `mdp`.
pub fn oracle_values(mdp: &TabularMdp, oracle: Oracle<'_>) -> Result<Option<Vec<f64>>> {
    match oracle {
        Oracle::Policy(pi) => Ok(Some(policy_evaluation_exact(mdp, pi)?.values().to_vec())),
        Oracle::Optimal => Ok(Some(value_iteration_exact(mdp, 1e-12)?.0.values().to_vec())),
        Oracle::None => Ok(None),
    }
}

/// Root-mean-square error over the non-terminal states.
pub fn rms_error(values: &[f64], oracle: &[f64], terminal: &[bool]) -> f64 {
    let mut sum = 0.0;
    let mut n = 0usize;
    for ((v, o), &t) in values.iter().zip(oracle).zip(terminal) {
        if !t {
            sum += (v - o) * (v - o);
            n += 1;
        }
    }
    if n == 0 {
        0.0
    } else {
        math::sqrt(sum / n as f64)
    }
}

fn check_spaces(env: &dyn Environment, n_states: usize, n_actions: usize) -> Result<()> {
    if env.n_states() != n_states {
        return Err(Error::DimensionMismatch {
            expected: n_states,
            found: env.n_states(),
        });
    }
    if env.n_actions() != n_actions {
        return Err(Error::DimensionMismatch {
            expected: n_actions,
            found: env.n_actions(),
        });
    }
    Ok(())
}

/// Acts, then updates, one step at a time. `update` gets the step and the
/// bootstrap state (`None` after a terminal step).
fn act_then_update<A>(
    agent: &mut A,
    env: &mut dyn Environment,
    env_seed: u64,
    max_steps: usize,
    choose: fn(&mut A, usize) -> Result<usize>,
    update: fn(&mut A, Step, Option<usize>) -> Result<()>,
) -> Result<EpisodeSummary> {
    let mut s = env.reset(env_seed);
    let mut summary = EpisodeSummary {
        episode_return: 0.0,
        steps: 0,
    };
    while summary.steps < max_steps {
        let a = choose(agent, s)?;
        let out = env.step(a)?;
        summary.episode_return += out.reward;
        summary.steps += 1;
        let step = Step {
            state: s,
            action: a,
            reward: out.reward,
            next_state: out.next_state,
            done: out.done,
        };
        update(agent, step, step.bootstrap_state())?;
        if out.done {
            break;
        }
        s = out.next_state;
    }
    Ok(summary)
}

/// SARSA-style loop: the next action is drawn before the update that uses
/// it.
fn sarsa_loop<A>(
    agent: &mut A,
    env: &mut dyn Environment,
    env_seed: u64,
    max_steps: usize,
    choose: fn(&mut A, usize) -> Result<usize>,
    update: fn(&mut A, Step, Option<(usize, usize)>) -> Result<()>,
) -> Result<EpisodeSummary> {
    let mut s = env.reset(env_seed);
    let mut a = choose(agent, s)?;
    let mut summary = EpisodeSummary {
        episode_return: 0.0,
        steps: 0,
    };
    while summary.steps < max_steps {
        let out = env.step(a)?;
        summary.episode_return += out.reward;
        summary.steps += 1;
        let step = Step {
            state: s,
            action: a,
            reward: out.reward,
            next_state: out.next_state,
            done: out.done,
        };
        if out.done {
            update(agent, step, None)?;
            break;
        }
        let a_next = choose(agent, out.next_state)?;
        update(agent, step, Some((out.next_state, a_next)))?;
        s = out.next_state;
        a = a_next;
    }
    Ok(summary)
}

/// Rolls out a full episode without learning; fails if it is truncated.
fn collect_episode<A>(
    agent: &mut A,
    env: &mut dyn Environment,
    env_seed: u64,
    max_steps: usize,
    choose: fn(&mut A, usize) -> Result<usize>,
) -> Result<(Trajectory, EpisodeSummary)> {
    let mut s = env.reset(env_seed);
    let mut steps = Vec::new();
    let mut total = 0.0;
    while steps.len() < max_steps {
        let a = choose(agent, s)?;
        let out = env.step(a)?;
        total += out.reward;
        steps.push(Step {
            state: s,
            action: a,
            reward: out.reward,
            next_state: out.next_state,
            done: out.done,
        });
        if out.done {
            break;
        }
        s = out.next_state;
    }
    let summary = EpisodeSummary {
        episode_return: total,
        steps: steps.len(),
    };
    let traj = Trajectory::new(steps, env_seed)?;
    if !traj.is_complete() {
        return Err(Error::IncompleteEpisode);
    }
    Ok((traj, summary))
}

fn greedy_values(q: &QTable) -> Vec<f64> {
    (0..q.n_states())
        .map(|s| if q.is_terminal(s) { 0.0 } else { q.max(s) })
        .collect()
}

fn sample_policy(pi: &TabularPolicy, rng: &mut Rng, s: usize) -> usize {
    rng::categorical(rng, pi.row(s))
}

/// Tabular TD(0) under a fixed policy.
#[derive(Debug, Clone)]
pub struct Td0Agent {
    pub v: ValueTable,
    pub step_size: StepSize,
    pub gamma: f64,
    pub policy: TabularPolicy,
    rng: Rng,
}

impl Td0Agent {
    pub fn new(
        v: ValueTable,
        step_size: StepSize,
        gamma: f64,
        policy: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        check_discount(gamma)?;
        Ok(Self {
            v,
            step_size,
            gamma,
            policy,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.policy, &mut self.rng, s))
    }

    fn update(&mut self, step: Step, next: Option<usize>) -> Result<()> {
        let alpha = self.step_size.next(step.state);
        td0_update(&mut self.v, step.state, step.reward, next, alpha, self.gamma)?;
        Ok(())
    }
}

impl Agent for Td0Agent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.v.len(), self.policy.n_actions())?;
        act_then_update(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(self.v.values().to_vec())
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.policy)
    }
}

/// n-step TD applied at the end of each episode, one state at a time in
/// visit order, each target computed from the values updated so far.
#[derive(Debug, Clone)]
pub struct NStepTdAgent {
    pub v: ValueTable,
    pub n: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub policy: TabularPolicy,
    rng: Rng,
}

impl NStepTdAgent {
    pub fn new(
        v: ValueTable,
        n: usize,
        alpha: f64,
        gamma: f64,
        policy: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        check_step_size(alpha)?;
        check_discount(gamma)?;
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "n",
                value: 0.0,
                expected: "n >= 1",
            });
        }
        Ok(Self {
            v,
            n,
            alpha,
            gamma,
            policy,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.policy, &mut self.rng, s))
    }
}

impl Agent for NStepTdAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.v.len(), self.policy.n_actions())?;
        let (traj, summary) = collect_episode(self, env, env_seed, max_steps, Self::choose)?;
        for (t, step) in traj.steps().iter().enumerate() {
            let g = n_step_return(&traj, t, self.n, &self.v, self.gamma)?;
            let s = step.state;
            self.v.check_updatable(s)?;
            let updated = self.v[s] + self.alpha * (g - self.v[s]);
            self.v.values_mut()[s] = crate::error::check_finite("n-step TD", updated)?;
        }
        Ok(summary)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(self.v.values().to_vec())
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.policy)
    }
}

/// Which view of TD(λ) or SARSA(λ) an agent runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LambdaView {
    /// Online backward view with accumulating traces.
    Backward,
    /// Forward view, updates applied at the end of each episode.
    Forward,
    /// Backward view with updates held until the end of each episode.
    Offline,
}

/// Tabular TD(λ) under a fixed policy.
#[derive(Debug, Clone)]
pub struct TdLambdaAgent {
    pub v: ValueTable,
    pub trace: TraceTable,
    pub alpha: f64,
    pub view: LambdaView,
    pub policy: TabularPolicy,
    rng: Rng,
}

impl TdLambdaAgent {
    pub fn new(
        v: ValueTable,
        alpha: f64,
        lambda: f64,
        gamma: f64,
        view: LambdaView,
        policy: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        check_step_size(alpha)?;
        let trace = TraceTable::new(v.len(), lambda, gamma)?;
        Ok(Self {
            v,
            trace,
            alpha,
            view,
            policy,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.policy, &mut self.rng, s))
    }

    fn update(&mut self, step: Step, next: Option<usize>) -> Result<()> {
        td_lambda_backward_step(&mut self.v, &mut self.trace, step.state, step.reward, next, self.alpha)?;
        Ok(())
    }
}

impl Agent for TdLambdaAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.v.len(), self.policy.n_actions())?;
        let (lambda, gamma) = (self.trace.lambda(), self.trace.gamma());
        match self.view {
            LambdaView::Backward => {
                self.trace.reset();
                act_then_update(self, env, env_seed, max_steps, Self::choose, Self::update)
            }
            LambdaView::Forward => {
                let (traj, summary) = collect_episode(self, env, env_seed, max_steps, Self::choose)?;
                td_lambda_forward_episode(&traj, &mut self.v, self.alpha, lambda, gamma)?;
                Ok(summary)
            }
            LambdaView::Offline => {
                let (traj, summary) = collect_episode(self, env, env_seed, max_steps, Self::choose)?;
                td_lambda_backward_offline(&traj, &mut self.v, self.alpha, lambda, gamma)?;
                Ok(summary)
            }
        }
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(self.v.values().to_vec())
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.policy)
    }
}

/// Tabular SARSA(0) with an ε-greedy behaviour policy.
#[derive(Debug, Clone)]
pub struct SarsaAgent {
    pub q: QTable,
    pub alpha: f64,
    pub gamma: f64,
    pub schedule: ExplorationSchedule,
    episode: usize,
    epsilon: f64,
    rng: Rng,
}

impl SarsaAgent {
    pub fn new(q: QTable, alpha: f64, gamma: f64, schedule: ExplorationSchedule, seed: u64) -> Result<Self> {
        check_step_size(alpha)?;
        check_discount(gamma)?;
        Ok(Self {
            q,
            alpha,
            gamma,
            schedule,
            episode: 0,
            epsilon: schedule.epsilon(0),
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(rng::categorical(&mut self.rng, &epsilon_greedy(&self.q, s, self.epsilon)?))
    }

    fn update(&mut self, step: Step, next: Option<(usize, usize)>) -> Result<()> {
        sarsa0_update(&mut self.q, step.state, step.action, step.reward, next, self.alpha, self.gamma)?;
        Ok(())
    }
}

impl Agent for SarsaAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.q.n_states(), self.q.n_actions())?;
        self.epsilon = self.schedule.epsilon(self.episode);
        self.episode += 1;
        sarsa_loop(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(greedy_values(&self.q))
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Optimal
    }
}

/// Tabular SARSA(λ) with an ε-greedy behaviour policy.
#[derive(Debug, Clone)]
pub struct SarsaLambdaAgent {
    pub q: QTable,
    pub trace: QTraceTable,
    pub alpha: f64,
    pub view: LambdaView,
    pub schedule: ExplorationSchedule,
    episode: usize,
    epsilon: f64,
    rng: Rng,
}

impl SarsaLambdaAgent {
    pub fn new(
        q: QTable,
        alpha: f64,
        lambda: f64,
        gamma: f64,
        view: LambdaView,
        schedule: ExplorationSchedule,
        seed: u64,
    ) -> Result<Self> {
        check_step_size(alpha)?;
        let trace = QTraceTable::new(q.n_states(), q.n_actions(), lambda, gamma)?;
        Ok(Self {
            q,
            trace,
            alpha,
            view,
            schedule,
            episode: 0,
            epsilon: schedule.epsilon(0),
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(rng::categorical(&mut self.rng, &epsilon_greedy(&self.q, s, self.epsilon)?))
    }

    fn update(&mut self, step: Step, next: Option<(usize, usize)>) -> Result<()> {
        sarsa_lambda_backward_step(&mut self.q, &mut self.trace, step.state, step.action, step.reward, next, self.alpha)?;
        Ok(())
    }
}

impl Agent for SarsaLambdaAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.q.n_states(), self.q.n_actions())?;
        self.epsilon = self.schedule.epsilon(self.episode);
        self.episode += 1;
        let (lambda, gamma) = (self.trace.lambda(), self.trace.gamma());
        match self.view {
            LambdaView::Backward => {
                self.trace.reset();
                sarsa_loop(self, env, env_seed, max_steps, Self::choose, Self::update)
            }
            LambdaView::Forward => {
                let (traj, summary) = collect_episode(self, env, env_seed, max_steps, Self::choose)?;
                sarsa_lambda_forward_episode(&traj, &mut self.q, self.alpha, lambda, gamma)?;
                Ok(summary)
            }
            LambdaView::Offline => {
                let (traj, summary) = collect_episode(self, env, env_seed, max_steps, Self::choose)?;
                sarsa_lambda_backward_offline(&traj, &mut self.q, self.alpha, lambda, gamma)?;
                Ok(summary)
            }
        }
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(greedy_values(&self.q))
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Optimal
    }
}

/// Tabular Q-learning with an ε-greedy behaviour policy.
#[derive(Debug, Clone)]
pub struct QLearningAgent {
    pub q: QTable,
    pub alpha: f64,
    pub gamma: f64,
    pub schedule: ExplorationSchedule,
    episode: usize,
    epsilon: f64,
    rng: Rng,
}

impl QLearningAgent {
    pub fn new(q: QTable, alpha: f64, gamma: f64, schedule: ExplorationSchedule, seed: u64) -> Result<Self> {
        check_step_size(alpha)?;
        check_discount(gamma)?;
        Ok(Self {
            q,
            alpha,
            gamma,
            schedule,
            episode: 0,
            epsilon: schedule.epsilon(0),
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(rng::categorical(&mut self.rng, &epsilon_greedy(&self.q, s, self.epsilon)?))
    }

    fn update(&mut self, step: Step, next: Option<usize>) -> Result<()> {
        q_learning_update(&mut self.q, step.state, step.action, step.reward, next, self.alpha, self.gamma)?;
        Ok(())
    }
}

impl Agent for QLearningAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.q.n_states(), self.q.n_actions())?;
        self.epsilon = self.schedule.epsilon(self.episode);
        self.episode += 1;
        act_then_update(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        Some(greedy_values(&self.q))
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Optimal
    }
}

/// Semi-gradient TD(λ) with linear state features under a fixed policy;
/// `λ = 0` is linear TD(0).
#[derive(Debug, Clone)]
pub struct LinearTdAgent {
    pub w: WeightVector,
    pub fm: FeatureMap,
    pub trace: FeatureTrace,
    pub alpha: f64,
    pub policy: TabularPolicy,
    rng: Rng,
}

impl LinearTdAgent {
    pub fn new(
        fm: FeatureMap,
        alpha: f64,
        lambda: f64,
        gamma: f64,
        policy: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        fm.expect(FeatureKind::State)?;
        check_step_size(alpha)?;
        let trace = FeatureTrace::new(fm.dim(), lambda, gamma)?;
        Ok(Self {
            w: WeightVector::zeros(fm.dim()),
            fm,
            trace,
            alpha,
            policy,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.policy, &mut self.rng, s))
    }

    fn update(&mut self, step: Step, next: Option<usize>) -> Result<()> {
        if self.trace.lambda() == 0.0 {
            linear_td0_step(&mut self.w, &self.fm, step.state, step.reward, next, self.alpha, self.trace.gamma())?;
        } else {
            linear_td_lambda_step(&mut self.w, &mut self.trace, &self.fm, step.state, step.reward, next, self.alpha)?;
        }
        Ok(())
    }
}

impl Agent for LinearTdAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.fm.n_states(), self.policy.n_actions())?;
        self.trace.reset();
        act_then_update(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        (0..self.fm.n_states()).map(|s| v_hat(&self.fm, s, &self.w).ok()).collect()
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.policy)
    }
}

/// Semi-gradient SARSA(λ) with linear pair features and an ε-greedy
/// behaviour policy over `q̂`.
#[derive(Debug, Clone)]
pub struct LinearSarsaLambdaAgent {
    pub w: WeightVector,
    pub fm: FeatureMap,
    pub trace: FeatureTrace,
    pub alpha: f64,
    pub schedule: ExplorationSchedule,
    terminal: Vec<bool>,
    episode: usize,
    epsilon: f64,
    rng: Rng,
}

impl LinearSarsaLambdaAgent {
    /// `terminal` marks states whose `q̂` is reported as zero.
    pub fn new(
        fm: FeatureMap,
        alpha: f64,
        lambda: f64,
        gamma: f64,
        schedule: ExplorationSchedule,
        terminal: Vec<bool>,
        seed: u64,
    ) -> Result<Self> {
        fm.expect(FeatureKind::StateAction)?;
        check_step_size(alpha)?;
        if terminal.len() != fm.n_states() {
            return Err(Error::DimensionMismatch {
                expected: fm.n_states(),
                found: terminal.len(),
            });
        }
        let trace = FeatureTrace::new(fm.dim(), lambda, gamma)?;
        Ok(Self {
            w: WeightVector::zeros(fm.dim()),
            fm,
            trace,
            alpha,
            schedule,
            terminal,
            episode: 0,
            epsilon: schedule.epsilon(0),
            rng: rng::seeded(seed),
        })
    }

    fn q_row(&self, s: usize) -> Result<Vec<f64>> {
        (0..self.fm.n_actions()).map(|a| q_hat(&self.fm, s, a, &self.w)).collect()
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        let row = self.q_row(s)?;
        let m = row.len();
        let mut probs = vec![self.epsilon / m as f64; m];
        probs[math::argmax(&row)] += 1.0 - self.epsilon;
        Ok(rng::categorical(&mut self.rng, &probs))
    }

    fn update(&mut self, step: Step, next: Option<(usize, usize)>) -> Result<()> {
        sarsa_lambda_approx_step(&mut self.w, &mut self.trace, &self.fm, step.state, step.action, step.reward, next, self.alpha)?;
        Ok(())
    }
}

impl Agent for LinearSarsaLambdaAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.fm.n_states(), self.fm.n_actions())?;
        self.epsilon = self.schedule.epsilon(self.episode);
        self.episode += 1;
        self.trace.reset();
        sarsa_loop(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        (0..self.fm.n_states())
            .map(|s| {
                if self.terminal[s] {
                    return Some(0.0);
                }
                let row = self.q_row(s).ok()?;
                Some(row.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect()
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Optimal
    }
}

/// LSTD(λ) re-solved on all experience gathered so far at the end of each
/// episode, under a fixed policy.
#[derive(Debug, Clone)]
pub struct LstdAgent {
    pub fm: FeatureMap,
    pub batch: ExperienceBatch,
    pub w: WeightVector,
    pub gamma: f64,
    pub lambda: f64,
    pub config: LstdConfig,
    pub policy: TabularPolicy,
    rng: Rng,
}

impl LstdAgent {
    pub fn new(
        fm: FeatureMap,
        gamma: f64,
        lambda: f64,
        config: LstdConfig,
        policy: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        fm.expect(FeatureKind::State)?;
        check_discount(gamma)?;
        check_unit_interval("lambda", lambda)?;
        Ok(Self {
            w: WeightVector::zeros(fm.dim()),
            fm,
            batch: ExperienceBatch::default(),
            gamma,
            lambda,
            config,
            policy,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.policy, &mut self.rng, s))
    }

    fn record(&mut self, step: Step, _next: Option<usize>) -> Result<()> {
        self.batch.push(experience(step, None));
        Ok(())
    }
}

fn experience(step: Step, a_next: Option<usize>) -> Experience {
    Experience {
        s: step.state,
        a: step.action,
        r: step.reward,
        s_next: step.next_state,
        a_next,
        done: step.done,
    }
}

impl Agent for LstdAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.fm.n_states(), self.policy.n_actions())?;
        let summary = act_then_update(self, env, env_seed, max_steps, Self::choose, Self::record)?;
        self.w = lstd_solve(&self.batch, &self.fm, self.gamma, self.lambda, self.config)?.w;
        Ok(summary)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        (0..self.fm.n_states()).map(|s| v_hat(&self.fm, s, &self.w).ok()).collect()
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.policy)
    }
}

/// LSTDQ(λ) evaluation of a target policy from experience gathered under a
/// behaviour policy, re-solved at the end of each episode.
#[derive(Debug, Clone)]
pub struct LstdqAgent {
    pub fm: FeatureMap,
    pub batch: ExperienceBatch,
    pub w: WeightVector,
    pub gamma: f64,
    pub lambda: f64,
    pub config: LstdConfig,
    pub target: TabularPolicy,
    pub behaviour: TabularPolicy,
    rng: Rng,
}

impl LstdqAgent {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        fm: FeatureMap,
        gamma: f64,
        lambda: f64,
        config: LstdConfig,
        target: TabularPolicy,
        behaviour: TabularPolicy,
        seed: u64,
    ) -> Result<Self> {
        fm.expect(FeatureKind::StateAction)?;
        check_discount(gamma)?;
        check_unit_interval("lambda", lambda)?;
        Ok(Self {
            w: WeightVector::zeros(fm.dim()),
            fm,
            batch: ExperienceBatch::default(),
            gamma,
            lambda,
            config,
            target,
            behaviour,
            rng: rng::seeded(seed),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(sample_policy(&self.behaviour, &mut self.rng, s))
    }

    fn record(&mut self, step: Step, _next: Option<usize>) -> Result<()> {
        self.batch.push(experience(step, None));
        Ok(())
    }
}

impl Agent for LstdqAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.fm.n_states(), self.fm.n_actions())?;
        let summary = act_then_update(self, env, env_seed, max_steps, Self::choose, Self::record)?;
        self.w = lstdq_solve(&self.batch, &self.fm, &self.target, self.gamma, self.lambda, self.config)?.w;
        Ok(summary)
    }

    /// `Σ_a π(a|s) q̂(s,a)` under the target policy.
    fn state_values(&self) -> Option<Vec<f64>> {
        (0..self.fm.n_states())
            .map(|s| {
                let mut v = 0.0;
                for (a, &p) in self.target.row(s).iter().enumerate() {
                    v += p * q_hat(&self.fm, s, a, &self.w).ok()?;
                }
                Some(v)
            })
            .collect()
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::Policy(&self.target)
    }
}

/// Running mean and variance (Welford) of vector gradient samples
/// `score · weight`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GradientStats {
    n: usize,
    mean: Vec<f64>,
    m2: Vec<f64>,
}

impl GradientStats {
    pub fn push(&mut self, score: &[f64], weight: f64) {
        if self.mean.is_empty() {
            self.mean = vec![0.0; score.len()];
            self.m2 = vec![0.0; score.len()];
        }
        self.n += 1;
        let n = self.n as f64;
        for ((m, m2), &g) in self.mean.iter_mut().zip(self.m2.iter_mut()).zip(score) {
            let x = g * weight;
            let d = x - *m;
            *m += d / n;
            *m2 += d * (x - *m);
        }
    }

    pub fn count(&self) -> usize {
        self.n
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    /// Trace of the sample covariance; 0 with fewer than two samples.
    pub fn total_variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        self.m2.iter().sum::<f64>() / (self.n - 1) as f64
    }
}

/// Action-value actor-critic.
#[derive(Debug, Clone)]
pub struct ActorCriticAgent {
    pub policy: SoftmaxPolicy,
    pub critic: ActionValueCritic,
    pub alpha_actor: f64,
    pub alpha_critic: f64,
    pub gamma: f64,
    rng: Rng,
    gradient_stats: GradientStats,
}

impl ActorCriticAgent {
    pub fn new(
        policy: SoftmaxPolicy,
        critic: ActionValueCritic,
        alpha_actor: f64,
        alpha_critic: f64,
        gamma: f64,
        seed: u64,
    ) -> Result<Self> {
        check_step_size(alpha_actor)?;
        check_step_size(alpha_critic)?;
        check_discount(gamma)?;
        Ok(Self {
            policy,
            critic,
            alpha_actor,
            alpha_critic,
            gamma,
            rng: rng::seeded(seed),
            gradient_stats: GradientStats::default(),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(rng::categorical(&mut self.rng, &softmax_policy(&self.policy, s)?))
    }

    fn update(&mut self, step: Step, next: Option<(usize, usize)>) -> Result<()> {
        let score = score_function(&self.policy, step.state, step.action)?;
        let out = actor_critic_step(
            &mut self.policy,
            &mut self.critic,
            step.state,
            step.action,
            step.reward,
            next,
            self.alpha_actor,
            self.alpha_critic,
            self.gamma,
        )?;
        self.gradient_stats.push(&score, out.actor_weight);
        Ok(())
    }

    /// Statistics of the samples `score(s,a) Q_w(s,a)` seen so far.
    pub fn gradient_stats(&self) -> &GradientStats {
        &self.gradient_stats
    }
}

impl Agent for ActorCriticAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.policy.n_states(), self.policy.n_actions())?;
        sarsa_loop(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        None
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::None
    }
}

/// Advantage actor-critic with a state-value critic and an optional actor
/// trace.
#[derive(Debug, Clone)]
pub struct AdvantageActorCriticAgent {
    pub policy: SoftmaxPolicy,
    pub critic: StateValueCritic,
    pub trace: Option<ActorTrace>,
    pub alpha_actor: f64,
    pub alpha_critic: f64,
    pub gamma: f64,
    rng: Rng,
    gradient_stats: GradientStats,
}

impl AdvantageActorCriticAgent {
    pub fn new(
        policy: SoftmaxPolicy,
        critic: StateValueCritic,
        trace: Option<ActorTrace>,
        alpha_actor: f64,
        alpha_critic: f64,
        gamma: f64,
        seed: u64,
    ) -> Result<Self> {
        check_step_size(alpha_actor)?;
        check_step_size(alpha_critic)?;
        check_discount(gamma)?;
        Ok(Self {
            policy,
            critic,
            trace,
            alpha_actor,
            alpha_critic,
            gamma,
            rng: rng::seeded(seed),
            gradient_stats: GradientStats::default(),
        })
    }

    fn choose(&mut self, s: usize) -> Result<usize> {
        Ok(rng::categorical(&mut self.rng, &softmax_policy(&self.policy, s)?))
    }

    fn update(&mut self, step: Step, next: Option<usize>) -> Result<()> {
        let score = score_function(&self.policy, step.state, step.action)?;
        let out = advantage_actor_critic_step(
            &mut self.policy,
            &mut self.critic,
            self.trace.as_mut(),
            step.state,
            step.action,
            step.reward,
            next,
            self.alpha_actor,
            self.alpha_critic,
            self.gamma,
        )?;
        self.gradient_stats.push(&score, out.actor_weight);
        Ok(())
    }

    /// Statistics of the samples `score(s,a) δ` seen so far.
    pub fn gradient_stats(&self) -> &GradientStats {
        &self.gradient_stats
    }
}

impl Agent for AdvantageActorCriticAgent {
    fn run_episode(&mut self, env: &mut dyn Environment, env_seed: u64, max_steps: usize) -> Result<EpisodeSummary> {
        check_spaces(env, self.policy.n_states(), self.policy.n_actions())?;
        if let Some(t) = self.trace.as_mut() {
            t.reset();
        }
        act_then_update(self, env, env_seed, max_steps, Self::choose, Self::update)
    }

    fn state_values(&self) -> Option<Vec<f64>> {
        (0..self.critic.fm.n_states()).map(|s| self.critic.value(s).ok()).collect()
    }

    fn oracle(&self) -> Oracle<'_> {
        Oracle::None
    }
}

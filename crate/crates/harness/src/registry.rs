//! Name → constructor tables for environments and algorithms.

use tdrl_core::agents::{
    ActorCriticAgent, AdvantageActorCriticAgent, Agent, LambdaView, LinearSarsaLambdaAgent,
    LinearTdAgent, LstdAgent, LstdqAgent, NStepTdAgent, QLearningAgent, SarsaAgent,
    SarsaLambdaAgent, Td0Agent, TdLambdaAgent,
};
use tdrl_core::control::ExplorationSchedule;
use tdrl_core::env::{
    make_gridworld, make_random_walk, random_walk_prices, sine_prices, Environment, Start,
    TabularEnv, TradingEnv, TradingReward,
};
use tdrl_core::linear::{FeatureMap, LstdConfig};
use tdrl_core::mdp::{QTable, TabularMdp, TabularPolicy, ValueTable};
use tdrl_core::policy_gradient::{
    ActionValueCritic, ActorTrace, SoftmaxPolicy, StateValueCritic, TraceDecay,
    CRITIC_RATE_MULTIPLIER,
};
use tdrl_core::prediction::StepSize;

use crate::config::{AlgorithmConfig, EnvConfig};
use crate::error::{HarnessError, Result};
use crate::formats::{load_experience, load_mdp, load_prices};

pub const ENVIRONMENTS: &[&str] = &["random_walk", "gridworld", "bandit", "trading", "mdp_file"];

/// Every algorithm reachable from a config, grouped by family.
pub const ALGORITHMS: &[(&str, &[&str])] = &[
    (
        "prediction",
        &["td0", "n_step_td", "td_lambda", "td_lambda_forward", "td_lambda_offline"],
    ),
    (
        "control",
        &["sarsa", "sarsa_lambda", "sarsa_lambda_forward", "sarsa_lambda_offline", "q_learning"],
    ),
    (
        "linear",
        &["linear_td0", "linear_td_lambda", "linear_sarsa_lambda", "lstd", "lstdq"],
    ),
    ("policy_gradient", &["actor_critic", "advantage_actor_critic"]),
];

pub fn algorithm_names() -> impl Iterator<Item = &'static str> {
    ALGORITHMS.iter().flat_map(|(_, names)| names.iter().copied())
}

fn unknown(kind: &'static str, name: &str, known: impl Iterator<Item = &'static str>) -> HarnessError {
    HarnessError::UnknownName {
        kind,
        name: name.to_string(),
        known: known.collect::<Vec<_>>().join(", "),
    }
}

fn choice<'a>(kind: &'static str, value: Option<&'a str>, default: &'a str, allowed: &'static [&'static str]) -> Result<&'a str> {
    let v = value.unwrap_or(default);
    if allowed.contains(&v) {
        Ok(v)
    } else {
        Err(unknown(kind, v, allowed.iter().copied()))
    }
}

/// An environment plus its exact model, when it has one.
pub struct BuiltEnv {
    pub env: Box<dyn Environment + Send>,
    pub model: Option<TabularMdp>,
}

impl BuiltEnv {
    pub fn terminal_mask(&self) -> Vec<bool> {
        match &self.model {
            Some(m) => m.terminal_mask().to_vec(),
            None => vec![false; self.env.n_states()],
        }
    }
}

pub fn check_env_name(name: &str) -> Result<()> {
    if ENVIRONMENTS.contains(&name) {
        Ok(())
    } else {
        Err(unknown("environment", name, ENVIRONMENTS.iter().copied()))
    }
}

pub fn check_algorithm_name(name: &str) -> Result<()> {
    if algorithm_names().any(|n| n == name) {
        Ok(())
    } else {
        Err(unknown("algorithm", name, algorithm_names()))
    }
}

pub fn build_env(cfg: &EnvConfig) -> Result<BuiltEnv> {
    check_env_name(&cfg.name)?;
    match cfg.name.as_str() {
        "random_walk" => {
            let (env, mdp) = make_random_walk(cfg.n_states.unwrap_or(5))?;
            Ok(BuiltEnv {
                env: Box::new(env),
                model: Some(mdp),
            })
        }
        "gridworld" => {
            let w = cfg.width.unwrap_or(4);
            let h = cfg.height.unwrap_or(4);
            let terminals: Vec<(usize, usize)> = match &cfg.terminals {
                Some(t) => t.iter().map(|[x, y]| (*x, *y)).collect(),
                None => vec![(0, 0), (w.saturating_sub(1), h.saturating_sub(1))],
            };
            let (env, mdp) = make_gridworld(w, h, cfg.step_reward.unwrap_or(-1.0), &terminals)?;
            Ok(BuiltEnv {
                env: Box::new(env),
                model: Some(mdp),
            })
        }
        "bandit" => {
            let rewards = cfg.rewards.clone().unwrap_or_else(|| vec![1.0, 0.0]);
            let mut b = TabularMdp::builder(1, rewards.len(), 0.9);
            for (a, &r) in rewards.iter().enumerate() {
                b.add(0, a, 0, 1.0, r);
            }
            let mdp = b.build()?;
            Ok(BuiltEnv {
                env: Box::new(TabularEnv::new(mdp.clone(), Start::Fixed(0))?),
                model: Some(mdp),
            })
        }
        "mdp_file" => {
            let path = cfg.path.as_ref().ok_or(HarnessError::Missing("env.path"))?;
            let mdp = load_mdp(path)?;
            let start = cfg.start.map_or(Start::UniformNonTerminal, Start::Fixed);
            Ok(BuiltEnv {
                env: Box::new(TabularEnv::new(mdp.clone(), start)?),
                model: Some(mdp),
            })
        }
        "trading" => {
            let len = cfg.length.unwrap_or(500);
            let seed = cfg.price_seed.unwrap_or(0);
            let prices = match choice("price source", cfg.prices.as_deref(), "random_walk", &["random_walk", "sine", "csv"])? {
                "random_walk" => random_walk_prices(
                    cfg.initial_price.unwrap_or(100.0),
                    cfg.drift.unwrap_or(0.0),
                    cfg.volatility.unwrap_or(0.01),
                    len,
                    seed,
                )?,
                "sine" => sine_prices(
                    len,
                    cfg.base.unwrap_or(100.0),
                    cfg.amplitude.unwrap_or(5.0),
                    cfg.period.unwrap_or(50.0),
                    cfg.noise.unwrap_or(0.5),
                    seed,
                )?,
                _ => load_prices(cfg.price_file.as_ref().ok_or(HarnessError::Missing("env.price_file"))?)?,
            };
            let reward = match choice("trading reward", cfg.reward.as_deref(), "dsr", &["dsr", "raw"])? {
                "dsr" => TradingReward::DifferentialSharpe {
                    eta: cfg.eta.unwrap_or(0.05),
                },
                _ => TradingReward::Raw,
            };
            let env = TradingEnv::new(prices, cfg.window.unwrap_or(3), cfg.cost.unwrap_or(0.0), reward)?;
            Ok(BuiltEnv {
                env: Box::new(env),
                model: None,
            })
        }
        _ => unreachable!("checked above"),
    }
}

/// Discount for an algorithm on an environment: the configured value, else
/// the model's, else 0.9.
pub fn effective_gamma(cfg: &AlgorithmConfig, built: &BuiltEnv) -> f64 {
    cfg.gamma
        .or_else(|| built.model.as_ref().map(TabularMdp::gamma))
        .unwrap_or(0.9)
}

fn state_features(cfg: &AlgorithmConfig, n_states: usize) -> Result<FeatureMap> {
    match choice("feature map", cfg.features.as_deref(), "one_hot", &["one_hot", "aggregate"])? {
        "one_hot" => Ok(FeatureMap::one_hot_states(n_states)),
        _ => {
            let k = cfg.n_groups.ok_or(HarnessError::Missing("algorithm.n_groups"))?;
            if k == 0 || k > n_states {
                return Err(HarnessError::range("n_groups", k, "1 <= n_groups <= number of states"));
            }
            let groups: Vec<usize> = (0..n_states).map(|s| s * k / n_states).collect();
            Ok(FeatureMap::aggregation(&groups, k)?)
        }
    }
}

fn pair_features(cfg: &AlgorithmConfig, n_states: usize, n_actions: usize) -> Result<FeatureMap> {
    if cfg.features.as_deref().unwrap_or("one_hot") == "one_hot" {
        return Ok(FeatureMap::one_hot_pairs(n_states, n_actions));
    }
    Ok(FeatureMap::action_blocks(&state_features(cfg, n_states)?, n_actions)?)
}

fn schedule(cfg: &AlgorithmConfig) -> Result<ExplorationSchedule> {
    Ok(ExplorationSchedule::decaying(
        cfg.epsilon.unwrap_or(0.1),
        cfg.epsilon_decay.unwrap_or(1.0),
        cfg.epsilon_min.unwrap_or(0.0),
    )?)
}

fn lstd_config(cfg: &AlgorithmConfig) -> LstdConfig {
    LstdConfig { ridge: cfg.ridge }
}

/// Builds the named agent for `built`, seeding its RNG with `seed`.
pub fn build_agent(cfg: &AlgorithmConfig, built: &BuiltEnv, seed: u64) -> Result<Box<dyn Agent + Send>> {
    check_algorithm_name(&cfg.name)?;
    let n_s = built.env.n_states();
    let n_a = built.env.n_actions();
    let terminal = built.terminal_mask();
    let gamma = effective_gamma(cfg, built);
    let alpha = cfg.alpha.unwrap_or(0.1);
    let lambda = cfg.lambda.unwrap_or(0.5);
    let init = cfg.initial_value.unwrap_or(0.0);
    let uniform = TabularPolicy::uniform(n_s, n_a);
    let values = || ValueTable::from_values(vec![init; n_s], &terminal);
    let q_values = || QTable::from_values(n_s, n_a, vec![init; n_s * n_a], &terminal);
    let agent: Box<dyn Agent + Send> = match cfg.name.as_str() {
        "td0" => {
            let step = match choice("step size", cfg.step_size.as_deref(), "constant", &["constant", "inverse_visits"])? {
                "constant" => StepSize::constant(alpha)?,
                _ => StepSize::inverse_visits(n_s),
            };
            Box::new(Td0Agent::new(values()?, step, gamma, uniform, seed)?)
        }
        "n_step_td" => Box::new(NStepTdAgent::new(values()?, cfg.n.unwrap_or(3), alpha, gamma, uniform, seed)?),
        "td_lambda" | "td_lambda_forward" | "td_lambda_offline" => {
            let view = match cfg.name.as_str() {
                "td_lambda" => LambdaView::Backward,
                "td_lambda_forward" => LambdaView::Forward,
                _ => LambdaView::Offline,
            };
            Box::new(TdLambdaAgent::new(values()?, alpha, lambda, gamma, view, uniform, seed)?)
        }
        "sarsa" => Box::new(SarsaAgent::new(q_values()?, alpha, gamma, schedule(cfg)?, seed)?),
        "sarsa_lambda" | "sarsa_lambda_forward" | "sarsa_lambda_offline" => {
            let view = match cfg.name.as_str() {
                "sarsa_lambda" => LambdaView::Backward,
                "sarsa_lambda_forward" => LambdaView::Forward,
                _ => LambdaView::Offline,
            };
            Box::new(SarsaLambdaAgent::new(q_values()?, alpha, lambda, gamma, view, schedule(cfg)?, seed)?)
        }
        "q_learning" => Box::new(QLearningAgent::new(q_values()?, alpha, gamma, schedule(cfg)?, seed)?),
        "linear_td0" => Box::new(LinearTdAgent::new(state_features(cfg, n_s)?, alpha, 0.0, gamma, uniform, seed)?),
        "linear_td_lambda" => Box::new(LinearTdAgent::new(state_features(cfg, n_s)?, alpha, lambda, gamma, uniform, seed)?),
        "linear_sarsa_lambda" => Box::new(LinearSarsaLambdaAgent::new(
            pair_features(cfg, n_s, n_a)?,
            alpha,
            lambda,
            gamma,
            schedule(cfg)?,
            terminal,
            seed,
        )?),
        "lstd" => {
            let lambda = cfg.lambda.unwrap_or(0.0);
            let mut agent = LstdAgent::new(state_features(cfg, n_s)?, gamma, lambda, lstd_config(cfg), uniform, seed)?;
            if let Some(path) = &cfg.batch_file {
                for e in load_experience(path)?.records() {
                    agent.batch.push(*e);
                }
            }
            Box::new(agent)
        }
        "lstdq" => {
            let lambda = cfg.lambda.unwrap_or(0.0);
            let mut agent = LstdqAgent::new(
                pair_features(cfg, n_s, n_a)?,
                gamma,
                lambda,
                lstd_config(cfg),
                uniform.clone(),
                uniform,
                seed,
            )?;
            if let Some(path) = &cfg.batch_file {
                for e in load_experience(path)?.records() {
                    agent.batch.push(*e);
                }
            }
            Box::new(agent)
        }
        "actor_critic" | "advantage_actor_critic" => {
            let alpha_actor = cfg.alpha_actor.unwrap_or(0.05);
            let alpha_critic = cfg.alpha_critic.unwrap_or(CRITIC_RATE_MULTIPLIER * alpha_actor);
            let pairs = pair_features(cfg, n_s, n_a)?;
            let policy = SoftmaxPolicy::zeros(pairs.clone())?;
            if cfg.name == "actor_critic" {
                Box::new(ActorCriticAgent::new(policy, ActionValueCritic::zeros(pairs)?, alpha_actor, alpha_critic, gamma, seed)?)
            } else {
                let trace = match choice("actor trace", cfg.actor_trace.as_deref(), "none", &["none", "lambda", "gamma_lambda"])? {
                    "none" => None,
                    "lambda" => Some(ActorTrace::new(pairs.dim(), lambda, TraceDecay::Lambda)?),
                    _ => Some(ActorTrace::new(pairs.dim(), lambda, TraceDecay::GammaLambda { gamma })?),
                };
                let critic = StateValueCritic::zeros(state_features(cfg, n_s)?)?;
                Box::new(AdvantageActorCriticAgent::new(policy, critic, trace, alpha_actor, alpha_critic, gamma, seed)?)
            }
        }
        _ => unreachable!("checked above"),
    };
    Ok(agent)
}

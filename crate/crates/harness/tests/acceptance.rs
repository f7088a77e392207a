//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
//! failure.

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use tdrl_core::agents::{
    ActorCriticAgent, AdvantageActorCriticAgent, Agent, LambdaView, LinearSarsaLambdaAgent, LinearTdAgent,
    QLearningAgent, SarsaLambdaAgent, TdLambdaAgent,
};
use tdrl_core::control::{
    sarsa0_update, sarsa_lambda_backward_offline, sarsa_lambda_backward_step, sarsa_lambda_forward_episode,
    ExplorationSchedule, QTraceTable,
};
use tdrl_core::env::{
    make_gridworld, make_random_walk, random_walk_prices, DsrAccumulator, Environment, Start, TabularEnv,
    TradingEnv, TradingReward,
};
use tdrl_core::linear::{
    linear_td0_step, linear_td_lambda_step, lstd_solve, sarsa_lambda_approx_step, Experience, ExperienceBatch,
    FeatureMap, FeatureTrace, LstdConfig, WeightVector,
};
use tdrl_core::mdp::{
    greedy_policy_from_q, policy_evaluation_exact, value_iteration_exact, QTable, Step, TabularMdp,
    TabularPolicy, Trajectory, ValueTable,
};
use tdrl_core::policy_gradient::{
    objective_mean_reward, objective_mean_value, policy_gradient_estimate, score_function, softmax_policy,
    ActionValueCritic, GradientMode, Objective, QSource, SoftmaxPolicy, StateValueCritic, Weighting,
};
use tdrl_core::prediction::{
    td0_update, td_lambda_backward_offline, td_lambda_backward_step, td_lambda_forward_episode, TraceTable,
};
use tdrl_core::rng::{self, Rng};
use tdrl_harness::run::{records_to_csv, summary_to_csv};
use tdrl_harness::{run_experiment, ExperimentConfig};

type Check = Result<String, String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn configs_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

fn random_walk_td0() -> Check {
    let start = Instant::now();
    let cfg = ExperimentConfig::load(&configs_dir().join("td0_random_walk.toml")).map_err(fail)?;
    let out = run_experiment(&cfg).map_err(fail)?;
    let secs = start.elapsed().as_secs_f64();
    let last = out.records.last().ok_or("no records")?;
    let rms = last.rms_error.ok_or("no oracle")?;
    let detail = format!("RMS after {} episodes = {rms:.4} (<= 0.05), {secs:.2} s (< 2 s)", last.episode + 1);
    if rms <= 0.05 && secs < 2.0 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lambda_zero_reductions() -> Check {
    let mut r = rng::seeded(2);
    let (n_s, n_a, gamma, alpha) = (8, 3, 0.9, 0.1);
    let mut terminal = vec![false; n_s];
    terminal[n_s - 1] = true;
    let mut v_trace = ValueTable::from_values(vec![0.0; n_s], &terminal).map_err(fail)?;
    let mut v_td0 = v_trace.clone();
    let mut e = TraceTable::new(n_s, 0.0, gamma).map_err(fail)?;
    let mut q_trace = QTable::from_values(n_s, n_a, vec![0.0; n_s * n_a], &terminal).map_err(fail)?;
    let mut q_sarsa = q_trace.clone();
    let mut eq = QTraceTable::new(n_s, n_a, 0.0, gamma).map_err(fail)?;
    let n = 10_000;
    for _ in 0..n {
        let s = rng::index(&mut r, n_s - 1);
        let a = rng::index(&mut r, n_a);
        let s2 = rng::index(&mut r, n_s);
        let a2 = rng::index(&mut r, n_a);
        let reward = rng::standard_normal(&mut r);
        let next = (s2 != n_s - 1).then_some(s2);
        let d1 = td_lambda_backward_step(&mut v_trace, &mut e, s, reward, next, alpha).map_err(fail)?;
        let d2 = td0_update(&mut v_td0, s, reward, next, alpha, gamma).map_err(fail)?;
        if d1.to_bits() != d2.to_bits() || v_trace != v_td0 {
            return Err("TD(λ=0) diverged from TD(0)".into());
        }
        let next = next.map(|s2| (s2, a2));
        let d1 = sarsa_lambda_backward_step(&mut q_trace, &mut eq, s, a, reward, next, alpha).map_err(fail)?;
        let d2 = sarsa0_update(&mut q_sarsa, s, a, reward, next, alpha, gamma).map_err(fail)?;
        if d1.to_bits() != d2.to_bits() || q_trace != q_sarsa {
            return Err("SARSA(λ=0) diverged from SARSA(0)".into());
        }
    }
    Ok(format!("{n} transitions, bitwise equal for TD and SARSA"))
}

/// A complete random episode over `n_s - 1` non-terminal states ending in
/// state `n_s - 1`.
fn random_episode(r: &mut Rng, n_s: usize, n_a: usize, seed: u64) -> Trajectory {
    let len = 1 + rng::index(r, 10);
    let mut s = rng::index(r, n_s - 1);
    let mut steps = Vec::with_capacity(len);
    for t in 0..len {
        let done = t + 1 == len;
        let next = if done { n_s - 1 } else { rng::index(r, n_s - 1) };
        steps.push(Step {
            state: s,
            action: rng::index(r, n_a),
            reward: rng::standard_normal(r),
            next_state: next,
            done,
        });
        s = next;
    }
    Trajectory::new(steps, seed).expect("chained by construction")
}

fn forward_backward_equivalence() -> Check {
    let mut r = rng::seeded(3);
    let (n_s, n_a, alpha, gamma) = (6, 2, 0.1, 0.9);
    let mut terminal = vec![false; n_s];
    terminal[n_s - 1] = true;
    let mut worst = 0.0f64;
    for i in 0..100 {
        let traj = random_episode(&mut r, n_s, n_a, i);
        let v0: Vec<f64> = (0..n_s).map(|_| rng::standard_normal(&mut r)).collect();
        let q0: Vec<f64> = (0..n_s * n_a).map(|_| rng::standard_normal(&mut r)).collect();
        for lambda in [0.0, 0.3, 0.7, 1.0] {
            let mut f = ValueTable::from_values(v0.clone(), &terminal).map_err(fail)?;
            let mut b = f.clone();
            td_lambda_forward_episode(&traj, &mut f, alpha, lambda, gamma).map_err(fail)?;
            td_lambda_backward_offline(&traj, &mut b, alpha, lambda, gamma).map_err(fail)?;
            worst = worst.max(max_diff(f.values(), b.values()));
            let mut f = QTable::from_values(n_s, n_a, q0.clone(), &terminal).map_err(fail)?;
            let mut b = f.clone();
            sarsa_lambda_forward_episode(&traj, &mut f, alpha, lambda, gamma).map_err(fail)?;
            sarsa_lambda_backward_offline(&traj, &mut b, alpha, lambda, gamma).map_err(fail)?;
            worst = worst.max(max_diff(f.values(), b.values()));
        }
    }
    let detail = format!("100 episodes x λ ∈ {{0, 0.3, 0.7, 1}}: max |forward - backward| = {worst:.2e} (<= 1e-9)");
    if worst <= 1e-9 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn q_learning_gridworld() -> Check {
    let (mut env, mdp) = make_gridworld(4, 4, -1.0, &[(0, 0), (3, 3)]).map_err(fail)?;
    let (v_star, q_star) = value_iteration_exact(&mdp, 1e-12).map_err(fail)?;
    let schedule = ExplorationSchedule::constant(0.1).map_err(fail)?;
    let mut agent = QLearningAgent::new(QTable::for_mdp(&mdp), 0.1, 1.0, schedule, 0).map_err(fail)?;
    let budget = 50_000;
    let (mut total, mut k) = (0, 0);
    while total < budget {
        total += agent.run_episode(&mut env, k, budget - total).map_err(fail)?.steps;
        k += 1;
    }
    let q_err = max_diff(agent.q.values(), q_star.values());
    let v = policy_evaluation_exact(&mdp, &greedy_policy_from_q(&agent.q)).map_err(fail)?;
    let v_err = max_diff(v.values(), v_star.values());
    let detail = format!("{total} steps: max|Q - q*| = {q_err:.4}, max|v_greedy - v*| = {v_err:.4} (<= 0.1)");
    if q_err <= 0.1 && v_err <= 0.1 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn one_hot_embedding() -> Check {
    let mut r = rng::seeded(5);
    let (n_s, n_a, alpha, gamma) = (6, 3, 0.1, 0.9);
    let mut terminal = vec![false; n_s];
    terminal[n_s - 1] = true;
    let steps: Vec<(usize, usize, f64, Option<(usize, usize)>)> = (0..1000)
        .map(|_| {
            let s = rng::index(&mut r, n_s - 1);
            let a = rng::index(&mut r, n_a);
            let reward = rng::standard_normal(&mut r);
            let s2 = rng::index(&mut r, n_s);
            let a2 = rng::index(&mut r, n_a);
            (s, a, reward, (s2 != n_s - 1).then_some((s2, a2)))
        })
        .collect();
    let mut worst = 0.0f64;

    let fm = FeatureMap::one_hot_states(n_s);
    let mut w0 = WeightVector::zeros(n_s);
    let mut v0 = ValueTable::from_values(vec![0.0; n_s], &terminal).map_err(fail)?;
    for &(s, _, reward, next) in &steps {
        let next = next.map(|p| p.0);
        linear_td0_step(&mut w0, &fm, s, reward, next, alpha, gamma).map_err(fail)?;
        td0_update(&mut v0, s, reward, next, alpha, gamma).map_err(fail)?;
        worst = worst.max(max_diff(w0.as_slice(), v0.values()));
    }
    for lambda in [0.0, 0.5, 1.0] {
        let mut w = WeightVector::zeros(n_s);
        let mut fe = FeatureTrace::new(n_s, lambda, gamma).map_err(fail)?;
        let mut v = ValueTable::from_values(vec![0.0; n_s], &terminal).map_err(fail)?;
        let mut te = TraceTable::new(n_s, lambda, gamma).map_err(fail)?;
        for &(s, _, reward, next) in &steps {
            let next = next.map(|p| p.0);
            linear_td_lambda_step(&mut w, &mut fe, &fm, s, reward, next, alpha).map_err(fail)?;
            td_lambda_backward_step(&mut v, &mut te, s, reward, next, alpha).map_err(fail)?;
            worst = worst.max(max_diff(w.as_slice(), v.values()));
        }
        let pairs = FeatureMap::one_hot_pairs(n_s, n_a);
        let mut w = WeightVector::zeros(n_s * n_a);
        let mut fe = FeatureTrace::new(n_s * n_a, lambda, gamma).map_err(fail)?;
        let mut q = QTable::from_values(n_s, n_a, vec![0.0; n_s * n_a], &terminal).map_err(fail)?;
        let mut te = QTraceTable::new(n_s, n_a, lambda, gamma).map_err(fail)?;
        for &(s, a, reward, next) in &steps {
            sarsa_lambda_approx_step(&mut w, &mut fe, &pairs, s, a, reward, next, alpha).map_err(fail)?;
            sarsa_lambda_backward_step(&mut q, &mut te, s, a, reward, next, alpha).map_err(fail)?;
            worst = worst.max(max_diff(w.as_slice(), q.values()));
        }
    }

    // LSTD(0) with one-hot features is the certainty-equivalence estimate:
    // exact evaluation of the empirical model of the same transitions.
    let mut counts = vec![0usize; n_s * n_s];
    let mut reward_sums = vec![0.0; n_s * n_s];
    let mut batch = ExperienceBatch::default();
    for &(s, a, reward, next) in &steps {
        let s2 = next.map_or(rng::index(&mut r, n_s - 1), |p| p.0);
        counts[s * n_s + s2] += 1;
        reward_sums[s * n_s + s2] += reward;
        batch.push(Experience {
            s,
            a,
            r: reward,
            s_next: s2,
            a_next: None,
            done: false,
        });
    }
    let live = n_s - 1;
    let mut b = TabularMdp::builder(live, 1, gamma);
    for s in 0..live {
        let row: usize = counts[s * n_s..s * n_s + live].iter().sum();
        for s2 in 0..live {
            let c = counts[s * n_s + s2];
            if c > 0 {
                b.add(s, 0, s2, c as f64 / row as f64, reward_sums[s * n_s + s2] / c as f64);
            }
        }
    }
    let empirical = b.build().map_err(fail)?;
    let exact = policy_evaluation_exact(&empirical, &TabularPolicy::uniform(live, 1)).map_err(fail)?;
    let sol = lstd_solve(&batch, &FeatureMap::one_hot_states(live), gamma, 0.0, LstdConfig::default()).map_err(fail)?;
    let lstd_err = max_diff(sol.w.as_slice(), exact.values());

    // Agents: linear and tabular learners fed the same episodes.
    let (mut env, mdp) = make_random_walk(5).map_err(fail)?;
    let pi = TabularPolicy::uniform(7, 1);
    let mut tab = TdLambdaAgent::new(ValueTable::for_mdp(&mdp), alpha, 0.7, 1.0, LambdaView::Backward, pi.clone(), 4)
        .map_err(fail)?;
    let mut lin = LinearTdAgent::new(FeatureMap::one_hot_states(7), alpha, 0.7, 1.0, pi, 4).map_err(fail)?;
    let (mut grid, gmdp) = make_gridworld(3, 3, -1.0, &[(2, 2)]).map_err(fail)?;
    let schedule = ExplorationSchedule::constant(0.2).map_err(fail)?;
    let mut tab_q = SarsaLambdaAgent::new(QTable::for_mdp(&gmdp), alpha, 0.5, 1.0, LambdaView::Backward, schedule, 6)
        .map_err(fail)?;
    let mut lin_q = LinearSarsaLambdaAgent::new(
        FeatureMap::one_hot_pairs(9, 4),
        alpha,
        0.5,
        1.0,
        schedule,
        gmdp.terminal_mask().to_vec(),
        6,
    )
    .map_err(fail)?;
    let mut agent_steps = 0;
    for k in 0..200 {
        agent_steps += tab.run_episode(&mut env, k, 10_000).map_err(fail)?.steps;
        lin.run_episode(&mut env, k, 10_000).map_err(fail)?;
        worst = worst.max(max_diff(&tab.state_values().unwrap(), &lin.state_values().unwrap()));
        agent_steps += tab_q.run_episode(&mut grid, k, 10_000).map_err(fail)?.steps;
        lin_q.run_episode(&mut grid, k, 10_000).map_err(fail)?;
        worst = worst.max(max_diff(&tab_q.state_values().unwrap(), &lin_q.state_values().unwrap()));
    }

    let detail = format!(
        "1000 update steps and {agent_steps} agent steps: max diff {worst:.1e} (<= 1e-12); LSTD vs empirical model {lstd_err:.1e}"
    );
    if worst <= 1e-12 && lstd_err <= 1e-12 * (1.0 + max_abs(exact.values())) {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn lstd_oracle() -> Check {
    let mut worst = 0.0f64;
    for seed in 0..3 {
        let mut r = rng::seeded(seed);
        let mut b = TabularMdp::builder(5, 1, 0.9);
        let mut batch = ExperienceBatch::default();
        for s in 0..5 {
            for _ in 0..4 {
                let s2 = rng::index(&mut r, 5);
                let reward = rng::standard_normal(&mut r);
                b.add(s, 0, s2, 0.25, reward);
                batch.push(Experience {
                    s,
                    a: 0,
                    r: reward,
                    s_next: s2,
                    a_next: None,
                    done: false,
                });
            }
        }
        let mdp = b.build().map_err(fail)?;
        let v = policy_evaluation_exact(&mdp, &TabularPolicy::uniform(5, 1)).map_err(fail)?;
        let sol = lstd_solve(&batch, &FeatureMap::one_hot_states(5), 0.9, 0.0, LstdConfig::default()).map_err(fail)?;
        worst = worst.max(max_diff(sol.w.as_slice(), v.values()));
    }
    let two = ExperienceBatch::new(vec![
        Experience { s: 0, a: 0, r: 1.0, s_next: 1, a_next: None, done: false },
        Experience { s: 1, a: 0, r: 1.0, s_next: 0, a_next: None, done: false },
    ]);
    let w = lstd_solve(&two, &FeatureMap::one_hot_states(2), 0.5, 0.0, LstdConfig::default()).map_err(fail)?.w;
    let example_err = max_diff(w.as_slice(), &[2.0, 2.0]);
    let detail = format!(
        "3 chains: max|w - v_π| = {worst:.1e} (<= 1e-8); 2-state example w = [{:.12}, {:.12}]",
        w.as_slice()[0],
        w.as_slice()[1]
    );
    if worst <= 1e-8 && example_err <= 1e-12 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn random_mdp(seed: u64, n_s: usize, n_a: usize, gamma: f64) -> Result<TabularMdp, String> {
    let mut r = rng::seeded(seed);
    let mut b = TabularMdp::builder(n_s, n_a, gamma);
    for s in 0..n_s {
        for a in 0..n_a {
            let w: Vec<f64> = (0..n_s).map(|_| rng::uniform(&mut r) + 0.05).collect();
            let total: f64 = w.iter().sum();
            for (s2, x) in w.iter().enumerate() {
                b.add(s, a, s2, x / total, rng::standard_normal(&mut r));
            }
        }
    }
    b.build().map_err(fail)
}

fn random_policy(seed: u64, n_s: usize, n_a: usize, dim: usize) -> Result<SoftmaxPolicy, String> {
    let mut r = rng::seeded(seed);
    let rows: Vec<f64> = (0..n_s * n_a * dim).map(|_| rng::standard_normal(&mut r)).collect();
    let fm = FeatureMap::from_pair_rows(n_s, n_a, dim, rows).map_err(fail)?;
    let theta = (0..dim).map(|_| rng::standard_normal(&mut r)).collect();
    SoftmaxPolicy::new(fm, theta).map_err(fail)
}

fn central_difference(p: &SoftmaxPolicy, f: impl Fn(&SoftmaxPolicy) -> f64) -> Vec<f64> {
    let h = 1e-5;
    (0..p.theta().len())
        .map(|i| {
            let shifted = |d: f64| {
                let mut theta = p.theta().to_vec();
                theta[i] += d;
                SoftmaxPolicy::new(p.features().clone(), theta).expect("finite theta")
            };
            (f(&shifted(h)) - f(&shifted(-h))) / (2.0 * h)
        })
        .collect()
}

fn relative_error(g: &[f64], fd: &[f64]) -> f64 {
    max_diff(g, fd) / max_abs(g).max(1e-12)
}

fn gradient_checks() -> Check {
    let (mut score_err, mut grad_err, mut baseline_err) = (0.0f64, 0.0f64, 0.0f64);
    for seed in 0..20 {
        let n_s = 2 + (seed as usize % 4);
        let n_a = 2 + (seed as usize % 2);
        let mdp = random_mdp(100 + seed, n_s, n_a, 0.9)?;
        let p = random_policy(200 + seed, n_s, n_a, 4)?;
        for s in 0..n_s {
            for a in 0..n_a {
                let g = score_function(&p, s, a).map_err(fail)?;
                let fd = central_difference(&p, |q| softmax_policy(q, s).expect("valid state")[a].ln());
                score_err = score_err.max(relative_error(&g, &fd));
            }
        }
        for (objective, f) in [
            (Objective::MeanReward, objective_mean_reward as fn(&TabularMdp, &SoftmaxPolicy) -> _),
            (Objective::MeanValue, objective_mean_value),
        ] {
            let source = QSource::Exact(objective);
            let g = policy_gradient_estimate(&mdp, &p, source, Weighting::ActionValue, GradientMode::Exact).map_err(fail)?;
            let fd = central_difference(&p, |q| f(&mdp, q).expect("ergodic"));
            grad_err = grad_err.max(relative_error(&g.mean, &fd));
            let adv = policy_gradient_estimate(&mdp, &p, source, Weighting::Advantage, GradientMode::Exact).map_err(fail)?;
            baseline_err = baseline_err.max(max_diff(&g.mean, &adv.mean));
        }
    }
    let detail = format!(
        "20 MDPs: score rel err {score_err:.1e}, gradient rel err {grad_err:.1e} (<= 1e-5); baseline shift {baseline_err:.1e} (<= 1e-10)"
    );
    if score_err <= 1e-5 && grad_err <= 1e-5 && baseline_err <= 1e-10 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bandit_learnability() -> Check {
    let bandit = TabularMdp::builder(1, 2, 0.9)
        .transition(0, 0, 0, 1.0, 1.0)
        .transition(0, 1, 0, 1.0, 0.0)
        .build()
        .map_err(fail)?;
    let mut env = TabularEnv::new(bandit, Start::Fixed(0)).map_err(fail)?;
    let pairs = FeatureMap::one_hot_pairs(1, 2);
    let (alpha_actor, alpha_critic, gamma, steps, seed) = (0.05, 0.5, 0.9, 2000, 0);
    let mut ac = ActorCriticAgent::new(
        SoftmaxPolicy::zeros(pairs.clone()).map_err(fail)?,
        ActionValueCritic::zeros(pairs.clone()).map_err(fail)?,
        alpha_actor,
        alpha_critic,
        gamma,
        seed,
    )
    .map_err(fail)?;
    ac.run_episode(&mut env, 0, steps).map_err(fail)?;
    let mut a2c = AdvantageActorCriticAgent::new(
        SoftmaxPolicy::zeros(pairs).map_err(fail)?,
        StateValueCritic::zeros(FeatureMap::one_hot_states(1)).map_err(fail)?,
        None,
        alpha_actor,
        alpha_critic,
        gamma,
        seed,
    )
    .map_err(fail)?;
    a2c.run_episode(&mut env, 0, steps).map_err(fail)?;
    let p_ac = softmax_policy(&ac.policy, 0).map_err(fail)?[0];
    let p_a2c = softmax_policy(&a2c.policy, 0).map_err(fail)?[0];
    let var_ac = ac.gradient_stats().total_variance();
    let var_a2c = a2c.gradient_stats().total_variance();
    let detail = format!(
        "{steps} steps, γ = {gamma}: π(a1) AC {p_ac:.4}, A2C {p_a2c:.4} (>= 0.9); score-sample variance A2C {var_a2c:.4} <= AC {var_ac:.4}"
    );
    if p_ac >= 0.9 && p_a2c >= 0.9 && var_a2c <= var_ac {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn weighted_sharpe(stream: &[f64], eta: f64) -> f64 {
    let k = stream.len();
    let (mut a, mut b) = (0.0, 0.0);
    for (j, &r) in stream.iter().enumerate() {
        let w = eta * (1.0 - eta).powi((k - 1 - j) as i32);
        a += w * r;
        b += w * r * r;
    }
    a / (b - a * a).sqrt()
}

fn trading_accounting() -> Check {
    let n = 10_000;
    let prices = random_walk_prices(50.0, 0.0, 0.02, n + 2, 4).map_err(fail)?;
    let mut env = TradingEnv::new(prices.clone(), 2, 0.0, TradingReward::Raw).map_err(fail)?;
    env.reset(0);
    let mut r = rng::seeded(8);
    let (mut total, mut telescoped, mut prev) = (0.0, 0.0, 0i64);
    for t in 2..prices.len() {
        let a = rng::index(&mut r, 3);
        total += env.step(a).map_err(fail)?.reward;
        telescoped += prev as f64 * (prices[t] - prices[t - 1]);
        prev = a as i64 - 1;
    }
    let acct_err = (total - telescoped).abs();

    let eta = 0.02;
    let mut r = rng::seeded(0);
    let stream: Vec<f64> = (0..200).map(|_| 0.001 + 0.01 * rng::standard_normal(&mut r)).collect();
    let mut acc = DsrAccumulator::new(eta).map_err(fail)?;
    let cumulative: f64 = stream.iter().map(|&x| acc.update(x)).sum();
    let w = acc.warmup();
    let change = weighted_sharpe(&stream, eta) - weighted_sharpe(&stream[..w], eta);
    let rel = ((cumulative - change) / change).abs();
    let detail = format!(
        "{n} steps: |Σr - Σ pos·Δp| = {acct_err:.1e} (<= 1e-9); DSR Σ = {cumulative:.4} vs Sharpe change {change:.4}, rel err {:.1}% (<= 20%)",
        rel * 100.0
    );
    if acct_err <= 1e-9 && rel <= 0.2 {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn reproducibility() -> Check {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(configs_dir())
        .map_err(fail)?
        .map(|e| e.map(|e| e.path()))
        .collect::<Result<_, _>>()
        .map_err(fail)?;
    paths.sort();
    for path in &paths {
        let mut cfg = ExperimentConfig::load(path).map_err(fail)?;
        let a = run_experiment(&cfg).map_err(fail)?;
        let b = run_experiment(&cfg).map_err(fail)?;
        cfg.run.parallel = !cfg.run.parallel;
        let c = run_experiment(&cfg).map_err(fail)?;
        let bytes = records_to_csv(&a.records).map_err(fail)?;
        let same = bytes == records_to_csv(&b.records).map_err(fail)?
            && bytes == records_to_csv(&c.records).map_err(fail)?
            && summary_to_csv(&a.summary).map_err(fail)? == summary_to_csv(&b.summary).map_err(fail)?;
        if !same {
            return Err(format!("{} differs between runs", path.display()));
        }
    }
    Ok(format!("{} configs: reruns and parallel/sequential runs byte-identical", paths.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Check); 10] = [
        ("random-walk prediction", random_walk_td0),
        ("lambda=0 reductions", lambda_zero_reductions),
        ("forward/backward equivalence", forward_backward_equivalence),
        ("control optimality", q_learning_gridworld),
        ("one-hot embedding", one_hot_embedding),
        ("LSTD oracle", lstd_oracle),
        ("gradient checks", gradient_checks),
        ("bandit learnability", bandit_learnability),
        ("trading accounting", trading_accounting),
        ("reproducibility", reproducibility),
    ];
    let start = Instant::now();
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!(
        "{} passed, {failed} failed in {:.1} s",
        criteria.len() - failed,
        start.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}

//! Learners checked end to end against oracles built outside the crate:
//! closed forms, Monte Carlo averages and hand-enumerated returns.

use tdrl_core::agents::{oracle_values, rms_error, Agent, LambdaView, LstdAgent, NStepTdAgent, TdLambdaAgent};
use tdrl_core::env::{make_gridworld, make_random_walk, random_walk_mdp, Environment};
use tdrl_core::linear::{FeatureMap, LstdConfig};
use tdrl_core::mdp::{
    discounted_return, policy_evaluation_exact, sample_episode, value_iteration_exact, TabularPolicy, ValueTable,
};

#[test]
fn random_walk_values_are_the_closed_form() {
    for n in [3, 5, 7, 19] {
        let mdp = random_walk_mdp(n).unwrap();
        let v = policy_evaluation_exact(&mdp, &TabularPolicy::uniform(n + 2, 1)).unwrap();
        for s in 1..=n {
            assert!((v.values()[s] - s as f64 / (n + 1) as f64).abs() < 1e-12);
        }
    }
}

#[test]
fn gridworld_optimal_values_count_manhattan_steps() {
    let (_, mdp) = make_gridworld(5, 4, -1.0, &[(0, 0)]).unwrap();
    let (v, _) = value_iteration_exact(&mdp, 1e-12).unwrap();
    for y in 0..4 {
        for x in 0..5 {
            assert!((v.values()[y * 5 + x] + (x + y) as f64).abs() < 1e-9);
        }
    }
}

#[test]
fn exact_values_match_monte_carlo_returns() {
    let (_, mdp) = make_gridworld(3, 3, -1.0, &[(2, 2)]).unwrap();
    let pi = TabularPolicy::uniform(9, 4);
    let v = policy_evaluation_exact(&mdp.with_gamma(0.9).unwrap(), &pi).unwrap();
    let n = 4000;
    let returns: Vec<f64> = (0..n)
        .map(|i| {
            let traj = sample_episode(&mdp, &pi, 0, i, 10_000).unwrap();
            assert!(traj.is_complete());
            let rewards: Vec<f64> = traj.rewards().collect();
            discounted_return(&rewards, 0.9)
        })
        .collect();
    let mean = returns.iter().sum::<f64>() / n as f64;
    let sd = (returns.iter().map(|g| (g - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt();
    let se = sd / (n as f64).sqrt();
    assert!((mean - v.values()[0]).abs() < 4.0 * se, "MC {mean} ± {se}, exact {}", v.values()[0]);
}

#[test]
fn prediction_agents_approach_the_exact_values() {
    let (mut env, mdp) = make_random_walk(5).unwrap();
    let pi = TabularPolicy::uniform(7, 1);
    let mut agents: Vec<Box<dyn Agent>> = vec![
        Box::new(TdLambdaAgent::new(ValueTable::for_mdp(&mdp), 0.05, 0.5, 1.0, LambdaView::Backward, pi.clone(), 1).unwrap()),
        Box::new(TdLambdaAgent::new(ValueTable::for_mdp(&mdp), 0.05, 0.5, 1.0, LambdaView::Forward, pi.clone(), 1).unwrap()),
        Box::new(NStepTdAgent::new(ValueTable::for_mdp(&mdp), 3, 0.05, 1.0, pi.clone(), 1).unwrap()),
        Box::new(LstdAgent::new(FeatureMap::one_hot_states(7), 1.0, 0.0, LstdConfig::with_ridge(), pi, 1).unwrap()),
    ];
    for agent in agents.iter_mut() {
        for k in 0..500 {
            agent.run_episode(&mut env, k, 10_000).unwrap();
        }
        let oracle = oracle_values(&mdp, agent.oracle()).unwrap().unwrap();
        let rms = rms_error(&agent.state_values().unwrap(), &oracle, mdp.terminal_mask());
        assert!(rms < 0.1, "rms {rms}");
    }
}

#[test]
fn environments_expose_their_models() {
    let (mut env, mdp) = make_random_walk(5).unwrap();
    assert_eq!(env.model(), Some(&mdp));
    let s = env.reset(0);
    assert_eq!(s, 3);
    let mut steps = 0;
    loop {
        steps += 1;
        if env.step(0).unwrap().done {
            break;
        }
    }
    assert!(steps >= 3 && steps % 2 == 1);
}

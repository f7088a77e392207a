//! Softmax policies over linear pair features, their objectives and exact
//! gradients, and the actor-critic updates.
//!
//! `π_θ(a|s) ∝ exp(θᵀx(s,a))`, so the score is
//! `∇_θ log π_θ(a|s) = x(s,a) - Σ_b π_θ(b|s) x(s,b)`.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{check_discount, check_unit_interval, Error, Result};
use crate::linalg;
use crate::linear::{q_hat, sgd_update, v_hat, FeatureKind, FeatureMap, WeightVector};
use crate::math;
use crate::mdp::{
    action_values, policy_evaluation_exact, stationary_distribution, QTable, TabularMdp,
    TabularPolicy,
};
use crate::rng;

/// Critic step size as a multiple of the actor's, used when only the actor
/// rate is given.
pub const CRITIC_RATE_MULTIPLIER: f64 = 10.0;

/// Parameters `θ` of a softmax policy over pair features.
#[derive(Debug, Clone, PartialEq)]
pub struct SoftmaxPolicy {
    theta: Vec<f64>,
    fm: FeatureMap,
}

impl SoftmaxPolicy {
    pub fn new(fm: FeatureMap, theta: Vec<f64>) -> Result<Self> {
        fm.expect(FeatureKind::StateAction)?;
        if theta.len() != fm.dim() {
            return Err(Error::DimensionMismatch {
                expected: fm.dim(),
                found: theta.len(),
            });
        }
        if theta.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("policy parameters"));
        }
        Ok(Self { theta, fm })
    }

    /// `θ = 0`: uniform in every state.
    pub fn zeros(fm: FeatureMap) -> Result<Self> {
        let dim = fm.dim();
        Self::new(fm, vec![0.0; dim])
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn features(&self) -> &FeatureMap {
        &self.fm
    }

    pub fn n_states(&self) -> usize {
        self.fm.n_states()
    }

    pub fn n_actions(&self) -> usize {
        self.fm.n_actions()
    }

    /// `θ <- θ + scale * g`, refusing non-finite results.
    fn ascend(&mut self, scale: f64, g: &[f64]) -> Result<()> {
        if self
            .theta
            .iter()
            .zip(g)
            .any(|(&t, &x)| !(t + scale * x).is_finite())
        {
            return Err(Error::NonFinite("policy update"));
        }
        for (t, &x) in self.theta.iter_mut().zip(g) {
            *t += scale * x;
        }
        Ok(())
    }
}

fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut p: Vec<f64> = logits.iter().map(|&z| math::exp(z - max)).collect();
    let total: f64 = p.iter().sum();
    p.iter_mut().for_each(|x| *x /= total);
    p
}

/// `π_θ(·|s)`, computed with the maximum logit subtracted.
pub fn softmax_policy(params: &SoftmaxPolicy, s: usize) -> Result<Vec<f64>> {
    let logits = (0..params.n_actions())
        .map(|a| Ok(math::dot(params.fm.pair(s, a)?, &params.theta)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(softmax(&logits))
}

/// `∇_θ log π_θ(a|s) = x(s,a) - Σ_b π_θ(b|s) x(s,b)`.
pub fn score_function(params: &SoftmaxPolicy, s: usize, a: usize) -> Result<Vec<f64>> {
    let probs = softmax_policy(params, s)?;
    score_with(params, s, a, &probs)
}

fn score_with(params: &SoftmaxPolicy, s: usize, a: usize, probs: &[f64]) -> Result<Vec<f64>> {
    let mut g = params.fm.pair(s, a)?.to_vec();
    for (b, &p) in probs.iter().enumerate() {
        for (gi, &x) in g.iter_mut().zip(params.fm.pair(s, b)?) {
            *gi -= p * x;
        }
    }
    Ok(g)
}

/// The policy as an explicit table of `π_θ(a|s)`.
pub fn policy_table(params: &SoftmaxPolicy) -> Result<TabularPolicy> {
    let mut rows = Vec::with_capacity(params.n_states() * params.n_actions());
    for s in 0..params.n_states() {
        rows.extend(softmax_policy(params, s)?);
    }
    TabularPolicy::from_rows(params.n_states(), params.n_actions(), rows)
}

fn check_params(mdp: &TabularMdp, params: &SoftmaxPolicy) -> Result<()> {
    if params.n_states() != mdp.n_states() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_states(),
            found: params.n_states(),
        });
    }
    if params.n_actions() != mdp.n_actions() {
        return Err(Error::DimensionMismatch {
            expected: mdp.n_actions(),
            found: params.n_actions(),
        });
    }
    Ok(())
}

/// `J_avV(θ) = Σ_s d^π(s) V^π(s)`.
pub fn objective_mean_value(mdp: &TabularMdp, params: &SoftmaxPolicy) -> Result<f64> {
    check_params(mdp, params)?;
    let pi = policy_table(params)?;
    let d = stationary_distribution(mdp, &pi)?;
    let v = policy_evaluation_exact(mdp, &pi)?;
    Ok(math::dot(&d, v.values()))
}

/// `J_avR(θ) = Σ_s d^π(s) Σ_a π(a|s) R^a_s`.
pub fn objective_mean_reward(mdp: &TabularMdp, params: &SoftmaxPolicy) -> Result<f64> {
    check_params(mdp, params)?;
    let pi = policy_table(params)?;
    let d = stationary_distribution(mdp, &pi)?;
    Ok(mean_reward(mdp, &pi, &d))
}

fn mean_reward(mdp: &TabularMdp, pi: &TabularPolicy, d: &[f64]) -> f64 {
    (0..mdp.n_states())
        .map(|s| {
            let r: f64 = (0..mdp.n_actions())
                .map(|a| pi.prob(s, a) * mdp.expected_reward(s, a))
                .sum();
            d[s] * r
        })
        .sum()
}

/// Discounted `q_π(s,a) = R^a_s + γ Σ P^a_{ss'} v_π(s')`.
pub fn exact_action_values(mdp: &TabularMdp, policy: &TabularPolicy) -> Result<QTable> {
    let v = policy_evaluation_exact(mdp, policy)?;
    Ok(action_values(mdp, v.values()))
}

/// Differential action values of the average-reward setting and the mean
/// reward `J`.
///
/// Solves `(I - P_π + 1dᵀ) h = r_π - J 1` for the bias `h` (normalized by
/// `dᵀh = 0`), then `Q̃(s,a) = R^a_s - J + Σ P^a_{ss'} h(s')`. Row-major
/// `n_states x n_actions`.
pub fn differential_action_values(
    mdp: &TabularMdp,
    policy: &TabularPolicy,
) -> Result<(Vec<f64>, f64)> {
    let d = stationary_distribution(mdp, policy)?;
    let j = mean_reward(mdp, policy, &d);
    let n = mdp.n_states();
    let (p, r) = mdp.policy_kernel(policy);
    let mut a = vec![0.0; n * n];
    for s in 0..n {
        for t in 0..n {
            a[s * n + t] = -p[s * n + t] + d[t];
        }
        a[s * n + s] += 1.0;
    }
    let b: Vec<f64> = r.iter().map(|x| x - j).collect();
    let h = linalg::solve(&a, n, &b).ok_or(Error::NoUniqueStationary)?;
    let n_a = mdp.n_actions();
    let mut q = vec![0.0; n * n_a];
    for s in 0..n {
        for act in 0..n_a {
            let next: f64 = mdp.outcomes(s, act).iter().map(|o| o.prob * h[o.next]).sum();
            q[s * n_a + act] = mdp.expected_reward(s, act) - j + next;
        }
    }
    Ok((q, j))
}

/// Objective whose gradient is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    MeanReward,
    MeanValue,
}

/// Where the action values come from.
#[derive(Debug, Clone, Copy)]
pub enum QSource<'a> {
    /// Exact values for the objective: differential `Q̃` for `J_avR`, and
    /// `Q̃ / (1 - γ)` for `J_avV` (whose gradient is `∇J_avR / (1 - γ)`).
    Exact(Objective),
    /// A linear critic `Q_w`.
    Critic(&'a ActionValueCritic),
}

/// Multiplier of the score in each gradient sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weighting {
    /// `Q(s,a)`.
    ActionValue,
    /// `Q(s,a) - Σ_b π(b|s) Q(s,b)`.
    Advantage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradientMode {
    /// Full expectation over `d^π × π`.
    Exact,
    /// Average of `n_samples` draws `s ~ d^π`, `a ~ π(·|s)`.
    Sampled { n_samples: usize, seed: u64 },
}

/// Mean gradient and the per-component variance of a single gradient
/// sample (exact under [`GradientMode::Exact`], unbiased sample variance
/// otherwise).
#[derive(Debug, Clone, PartialEq)]
pub struct GradientEstimate {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl GradientEstimate {
    /// Trace of the per-sample covariance.
    pub fn total_variance(&self) -> f64 {
        self.variance.iter().sum()
    }
}

/// Policy-gradient estimate `E[∇_θ log π_θ(s,a) Q(s,a)]` over `d^π × π`.
pub fn policy_gradient_estimate(
    mdp: &TabularMdp,
    params: &SoftmaxPolicy,
    q_source: QSource<'_>,
    weighting: Weighting,
    mode: GradientMode,
) -> Result<GradientEstimate> {
    check_params(mdp, params)?;
    let pi = policy_table(params)?;
    let d = stationary_distribution(mdp, &pi)?;
    let n_a = mdp.n_actions();
    let q: Vec<f64> = match q_source {
        QSource::Exact(objective) => {
            let (q, _) = differential_action_values(mdp, &pi)?;
            match objective {
                Objective::MeanReward => q,
                Objective::MeanValue => {
                    let gamma = mdp.gamma();
                    if gamma >= 1.0 {
                        return Err(Error::InvalidParameter {
                            name: "gamma",
                            value: gamma,
                            expected: "gamma < 1 for the mean-value objective",
                        });
                    }
                    q.iter().map(|x| x / (1.0 - gamma)).collect()
                }
            }
        }
        QSource::Critic(critic) => {
            let mut q = vec![0.0; mdp.n_states() * n_a];
            for s in 0..mdp.n_states() {
                for a in 0..n_a {
                    q[s * n_a + a] = critic.value(s, a)?;
                }
            }
            q
        }
    };
    let weight = |s: usize, a: usize| -> f64 {
        let qa = q[s * n_a + a];
        match weighting {
            Weighting::ActionValue => qa,
            Weighting::Advantage => {
                let v: f64 = (0..n_a).map(|b| pi.prob(s, b) * q[s * n_a + b]).sum();
                qa - v
            }
        }
    };
    let dim = params.fm.dim();
    match mode {
        GradientMode::Exact => {
            let mut mean = vec![0.0; dim];
            let mut second = vec![0.0; dim];
            for s in 0..mdp.n_states() {
                if d[s] == 0.0 {
                    continue;
                }
                let probs = pi.row(s);
                for a in 0..n_a {
                    let mass = d[s] * probs[a];
                    if mass == 0.0 {
                        continue;
                    }
                    let g = score_with(params, s, a, probs)?;
                    let w = weight(s, a);
                    for i in 0..dim {
                        let x = g[i] * w;
                        mean[i] += mass * x;
                        second[i] += mass * x * x;
                    }
                }
            }
            let variance = (0..dim).map(|i| (second[i] - mean[i] * mean[i]).max(0.0)).collect();
            Ok(GradientEstimate { mean, variance })
        }
        GradientMode::Sampled { n_samples, seed } => {
            if n_samples < 2 {
                return Err(Error::InvalidParameter {
                    name: "n_samples",
                    value: n_samples as f64,
                    expected: "at least 2 samples",
                });
            }
            let mut r = rng::seeded(seed);
            let mut mean = vec![0.0; dim];
            let mut m2 = vec![0.0; dim];
            for k in 0..n_samples {
                let s = rng::categorical(&mut r, &d);
                let a = rng::categorical(&mut r, pi.row(s));
                let g = score_with(params, s, a, pi.row(s))?;
                let w = weight(s, a);
                // Welford
                for i in 0..dim {
                    let x = g[i] * w;
                    let delta = x - mean[i];
                    mean[i] += delta / (k + 1) as f64;
                    m2[i] += delta * (x - mean[i]);
                }
            }
            let variance = m2.iter().map(|x| x / (n_samples - 1) as f64).collect();
            Ok(GradientEstimate { mean, variance })
        }
    }
}

/// Linear action-value critic `Q_w(s,a) = x(s,a)ᵀw`.
#[derive(Debug, Clone, PartialEq)]
pub struct ActionValueCritic {
    pub w: WeightVector,
    pub fm: FeatureMap,
}

impl ActionValueCritic {
    pub fn zeros(fm: FeatureMap) -> Result<Self> {
        fm.expect(FeatureKind::StateAction)?;
        Ok(Self {
            w: WeightVector::zeros(fm.dim()),
            fm,
        })
    }

    pub fn value(&self, s: usize, a: usize) -> Result<f64> {
        q_hat(&self.fm, s, a, &self.w)
    }
}

/// Linear state-value critic `V_v(s) = x(s)ᵀv`.
#[derive(Debug, Clone, PartialEq)]
pub struct StateValueCritic {
    pub v: WeightVector,
    pub fm: FeatureMap,
}

impl StateValueCritic {
    pub fn zeros(fm: FeatureMap) -> Result<Self> {
        fm.expect(FeatureKind::State)?;
        Ok(Self {
            v: WeightVector::zeros(fm.dim()),
            fm,
        })
    }

    pub fn value(&self, s: usize) -> Result<f64> {
        v_hat(&self.fm, s, &self.v)
    }
}

/// How the actor trace decays between steps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceDecay {
    /// `E <- λE + score`.
    Lambda,
    /// `E <- γλE + score`.
    GammaLambda { gamma: f64 },
}

/// Eligibility trace over policy parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ActorTrace {
    e: Vec<f64>,
    lambda: f64,
    decay: TraceDecay,
}

impl ActorTrace {
    pub fn new(dim: usize, lambda: f64, decay: TraceDecay) -> Result<Self> {
        check_unit_interval("lambda", lambda)?;
        if let TraceDecay::GammaLambda { gamma } = decay {
            check_discount(gamma)?;
        }
        Ok(Self {
            e: vec![0.0; dim],
            lambda,
            decay,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.e
    }

    pub fn reset(&mut self) {
        self.e.iter_mut().for_each(|x| *x = 0.0);
    }

    fn accumulate(&mut self, score: &[f64]) {
        let factor = match self.decay {
            TraceDecay::Lambda => self.lambda,
            TraceDecay::GammaLambda { gamma } => gamma * self.lambda,
        };
        for (e, &g) in self.e.iter_mut().zip(score) {
            *e *= factor;
            *e += g;
        }
    }
}

/// What an actor-critic step did: the critic's TD error and the scalar
/// that multiplied the score (or trace) in the actor update.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ActorCriticStep {
    pub td_error: f64,
    pub actor_weight: f64,
}

fn check_rate(name: &'static str, alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter {
            name,
            value: alpha,
            expected: "a step size > 0",
        })
    }
}

/// Action-value actor-critic.
///
/// The actor moves by `α_actor score(s,a) Q_w(s,a)` using the critic before
/// this step's update; the critic then takes a semi-gradient SARSA(0) step
/// toward `r + γ Q_w(s',a')`.
#[allow(clippy::too_many_arguments)]
pub fn actor_critic_step(
    params: &mut SoftmaxPolicy,
    critic: &mut ActionValueCritic,
    s: usize,
    a: usize,
    r: f64,
    next: Option<(usize, usize)>,
    alpha_actor: f64,
    alpha_critic: f64,
    gamma: f64,
) -> Result<ActorCriticStep> {
    check_rate("alpha_actor", alpha_actor)?;
    check_rate("alpha_critic", alpha_critic)?;
    check_discount(gamma)?;
    let q_sa = critic.value(s, a)?;
    let q_next = match next {
        Some((s2, a2)) => critic.value(s2, a2)?,
        None => 0.0,
    };
    let score = score_function(params, s, a)?;
    let target = r + gamma * q_next;
    let mut w = critic.w.clone();
    let td_error = sgd_update(&mut w, critic.fm.pair(s, a)?, target, q_sa, alpha_critic)?;
    params.ascend(alpha_actor * q_sa, &score)?;
    critic.w = w;
    Ok(ActorCriticStep {
        td_error,
        actor_weight: q_sa,
    })
}

/// Advantage actor-critic driven by the TD error
/// `δ = r + γ V_v(s') - V_v(s)`.
///
/// The critic takes a semi-gradient TD(0) step. Without a trace the actor
/// moves by `α_actor δ score(s,a)`; with one, `E <- λE + score(s,a)` (or
/// `γλE + score` if the trace was built with [`TraceDecay::GammaLambda`])
/// and the actor moves by `α_actor δ E`. The trace is cleared when `next`
/// is `None`.
#[allow(clippy::too_many_arguments)]
pub fn advantage_actor_critic_step(
    params: &mut SoftmaxPolicy,
    critic: &mut StateValueCritic,
    trace: Option<&mut ActorTrace>,
    s: usize,
    a: usize,
    r: f64,
    next: Option<usize>,
    alpha_actor: f64,
    alpha_critic: f64,
    gamma: f64,
) -> Result<ActorCriticStep> {
    check_rate("alpha_actor", alpha_actor)?;
    check_rate("alpha_critic", alpha_critic)?;
    check_discount(gamma)?;
    let v_s = critic.value(s)?;
    let v_next = match next {
        Some(s2) => critic.value(s2)?,
        None => 0.0,
    };
    let target = r + gamma * v_next;
    let score = score_function(params, s, a)?;
    let mut v = critic.v.clone();
    let delta = sgd_update(&mut v, critic.fm.state(s)?, target, v_s, alpha_critic)?;
    let scale = alpha_actor * delta;
    match trace {
        Some(e) => {
            if e.e.len() != score.len() {
                return Err(Error::DimensionMismatch {
                    expected: score.len(),
                    found: e.e.len(),
                });
            }
            e.accumulate(&score);
            params.ascend(scale, &e.e)?;
            if next.is_none() {
                e.reset();
            }
        }
        None => params.ascend(scale, &score)?,
    }
    critic.v = v;
    Ok(ActorCriticStep {
        td_error: delta,
        actor_weight: delta,
    })
}
